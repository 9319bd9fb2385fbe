#include "hpst/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hpst/errors.hpp"

namespace hpst::diff {

Tensor::Tensor(std::vector<size_t> shape, std::vector<double> values) : shape_(std::move(shape)) {
    if (values.size() != size_of(shape_)) throw ShapeMismatch("tensor init data length");
    data_.assign(values.begin(), values.end());
}

Tensor Tensor::scalar(double v) {
    Tensor t({1});
    t[0] = v;
    return t;
}

bool Tensor::all_finite() const {
    for (double v : data_)
        if (!std::isfinite(v)) return false;
    return true;
}

static void require(bool ok, const char* msg) {
    if (!ok) throw ShapeMismatch(msg);
}

int Tape::push(Tensor value, std::function<void(Tape&)> back) {
    if (!value.all_finite()) throw NonFiniteError("primitive output");
    vals_.push_back(std::move(value));
    grads_.emplace_back();
    backs_.push_back(std::move(back));
    return static_cast<int>(vals_.size()) - 1;
}

int Tape::input(Tensor t) { return push(std::move(t), nullptr); }

int Tape::linear(int x, int w, int b) {
    const Tensor& X = vals_[x];
    const Tensor& W = vals_[w];
    const Tensor& B = vals_[b];
    require(X.shape().size() == 2 && W.shape().size() == 2 && B.shape().size() == 1, "linear ranks");
    const size_t n = X.rows(), din = X.cols(), dout = W.cols();
    require(W.rows() == din && B.size() == dout, "linear dims");
    Tensor Y({n, dout});
    for (size_t i = 0; i < n; ++i) {
        double* yi = Y.data() + i * dout;
        for (size_t o = 0; o < dout; ++o) yi[o] = B[o];
        const double* xi = X.data() + i * din;
        for (size_t k = 0; k < din; ++k) {
            const double xv = xi[k];
            const double* wk = W.data() + k * dout;
            for (size_t o = 0; o < dout; ++o) yi[o] += xv * wk[o];
        }
    }
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [x, w, b, out, n, din, dout](Tape& t) {
        const Tensor& G = t.grads_[out];
        const Tensor& X = t.vals_[x];
        const Tensor& W = t.vals_[w];
        Tensor& GX = t.grads_[x];
        Tensor& GW = t.grads_[w];
        Tensor& GB = t.grads_[b];
        for (size_t i = 0; i < n; ++i) {
            const double* gi = G.data() + i * dout;
            const double* xi = X.data() + i * din;
            double* gxi = GX.data() + i * din;
            for (size_t k = 0; k < din; ++k) {
                const double* wk = W.data() + k * dout;
                double* gwk = GW.data() + k * dout;
                double acc = 0.0;
                const double xv = xi[k];
                for (size_t o = 0; o < dout; ++o) {
                    acc += gi[o] * wk[o];
                    gwk[o] += xv * gi[o];
                }
                gxi[k] += acc;
            }
            for (size_t o = 0; o < dout; ++o) GB[o] += gi[o];
        }
    });
}

int Tape::relu(int x) {
    const Tensor& X = vals_[x];
    Tensor Y(X.shape());
    for (size_t i = 0; i < X.size(); ++i) Y[i] = X[i] > 0.0 ? X[i] : 0.0;
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [x, out](Tape& t) {
        const Tensor& G = t.grads_[out];
        const Tensor& X = t.vals_[x];
        Tensor& GX = t.grads_[x];
        for (size_t i = 0; i < X.size(); ++i)
            if (X[i] > 0.0) GX[i] += G[i];
    });
}

int Tape::add(int a, int b) {
    const Tensor& A = vals_[a];
    const Tensor& B = vals_[b];
    require(A.same_shape(B), "add shapes");
    Tensor Y(A.shape());
    for (size_t i = 0; i < A.size(); ++i) Y[i] = A[i] + B[i];
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [a, b, out](Tape& t) {
        const Tensor& G = t.grads_[out];
        Tensor& GA = t.grads_[a];
        Tensor& GB = t.grads_[b];
        for (size_t i = 0; i < G.size(); ++i) {
            GA[i] += G[i];
            GB[i] += G[i];
        }
    });
}

int Tape::mul(int a, int b) {
    const Tensor& A = vals_[a];
    const Tensor& B = vals_[b];
    require(A.same_shape(B), "mul shapes");
    Tensor Y(A.shape());
    for (size_t i = 0; i < A.size(); ++i) Y[i] = A[i] * B[i];
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [a, b, out](Tape& t) {
        const Tensor& G = t.grads_[out];
        const Tensor& A = t.vals_[a];
        const Tensor& B = t.vals_[b];
        Tensor& GA = t.grads_[a];
        Tensor& GB = t.grads_[b];
        for (size_t i = 0; i < G.size(); ++i) {
            GA[i] += G[i] * B[i];
            GB[i] += G[i] * A[i];
        }
    });
}

int Tape::scale(int x, double c) {
    const Tensor& X = vals_[x];
    Tensor Y(X.shape());
    for (size_t i = 0; i < X.size(); ++i) Y[i] = X[i] * c;
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [x, c, out](Tape& t) {
        const Tensor& G = t.grads_[out];
        Tensor& GX = t.grads_[x];
        for (size_t i = 0; i < G.size(); ++i) GX[i] += G[i] * c;
    });
}

int Tape::concat_cols(int a, int b) {
    const Tensor& A = vals_[a];
    const Tensor& B = vals_[b];
    require(A.shape().size() == 2 && B.shape().size() == 2 && A.rows() == B.rows(),
            "concat_cols shapes");
    const size_t n = A.rows(), da = A.cols(), db = B.cols();
    Tensor Y({n, da + db});
    for (size_t i = 0; i < n; ++i) {
        std::copy_n(A.data() + i * da, da, Y.data() + i * (da + db));
        std::copy_n(B.data() + i * db, db, Y.data() + i * (da + db) + da);
    }
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [a, b, out, n, da, db](Tape& t) {
        const Tensor& G = t.grads_[out];
        Tensor& GA = t.grads_[a];
        Tensor& GB = t.grads_[b];
        for (size_t i = 0; i < n; ++i) {
            const double* gi = G.data() + i * (da + db);
            for (size_t j = 0; j < da; ++j) GA.data()[i * da + j] += gi[j];
            for (size_t j = 0; j < db; ++j) GB.data()[i * db + j] += gi[da + j];
        }
    });
}

int Tape::gather_rows(int x, std::vector<int> idx) {
    const Tensor& X = vals_[x];
    require(X.shape().size() == 2, "gather_rows rank");
    const size_t d = X.cols();
    for (int i : idx) require(i >= 0 && static_cast<size_t>(i) < X.rows(), "gather_rows index");
    Tensor Y({idx.size(), d});
    for (size_t r = 0; r < idx.size(); ++r)
        std::copy_n(X.data() + static_cast<size_t>(idx[r]) * d, d, Y.data() + r * d);
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [x, idx = std::move(idx), out, d](Tape& t) {
        const Tensor& G = t.grads_[out];
        Tensor& GX = t.grads_[x];
        for (size_t r = 0; r < idx.size(); ++r) {
            const double* gr = G.data() + r * d;
            double* gx = GX.data() + static_cast<size_t>(idx[r]) * d;
            for (size_t j = 0; j < d; ++j) gx[j] += gr[j];
        }
    });
}

int Tape::layer_norm(int x, int gain, int shift) {
    constexpr double kEps = 1e-5;
    const Tensor& X = vals_[x];
    const Tensor& Gn = vals_[gain];
    const Tensor& Sh = vals_[shift];
    require(X.shape().size() == 2, "layer_norm rank");
    const size_t n = X.rows(), d = X.cols();
    require(Gn.size() == d && Sh.size() == d, "layer_norm param dims");
    Tensor Y({n, d});
    for (size_t i = 0; i < n; ++i) {
        const double* xi = X.data() + i * d;
        double mu = 0.0;
        for (size_t j = 0; j < d; ++j) mu += xi[j];
        mu /= static_cast<double>(d);
        double var = 0.0;
        for (size_t j = 0; j < d; ++j) var += (xi[j] - mu) * (xi[j] - mu);
        var /= static_cast<double>(d);
        const double inv = 1.0 / std::sqrt(var + kEps);
        double* yi = Y.data() + i * d;
        for (size_t j = 0; j < d; ++j) yi[j] = Gn[j] * (xi[j] - mu) * inv + Sh[j];
    }
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [x, gain, shift, out, n, d](Tape& t) {
        const Tensor& G = t.grads_[out];
        const Tensor& X = t.vals_[x];
        const Tensor& Gn = t.vals_[gain];
        Tensor& GX = t.grads_[x];
        Tensor& GGn = t.grads_[gain];
        Tensor& GSh = t.grads_[shift];
        for (size_t i = 0; i < n; ++i) {
            const double* xi = X.data() + i * d;
            const double* gi = G.data() + i * d;
            double mu = 0.0;
            for (size_t j = 0; j < d; ++j) mu += xi[j];
            mu /= static_cast<double>(d);
            double var = 0.0;
            for (size_t j = 0; j < d; ++j) var += (xi[j] - mu) * (xi[j] - mu);
            var /= static_cast<double>(d);
            const double inv = 1.0 / std::sqrt(var + 1e-5);
            double mean_dxh = 0.0, mean_dxh_xh = 0.0;
            for (size_t j = 0; j < d; ++j) {
                const double xh = (xi[j] - mu) * inv;
                const double dxh = gi[j] * Gn[j];
                mean_dxh += dxh;
                mean_dxh_xh += dxh * xh;
                GGn[j] += gi[j] * xh;
                GSh[j] += gi[j];
            }
            mean_dxh /= static_cast<double>(d);
            mean_dxh_xh /= static_cast<double>(d);
            double* gx = GX.data() + i * d;
            for (size_t j = 0; j < d; ++j) {
                const double xh = (xi[j] - mu) * inv;
                gx[j] += inv * (gi[j] * Gn[j] - mean_dxh - xh * mean_dxh_xh);
            }
        }
    });
}

int Tape::segment_softmax(int logits, std::vector<int> segment_of, int n_segments) {
    const Tensor& L = vals_[logits];
    require(L.shape().size() == 1 && L.size() == segment_of.size(), "segment_softmax shapes");
    for (int s : segment_of) require(s >= 0 && s < n_segments, "segment id");
    const size_t e = L.size();
    std::vector<double> seg_max(n_segments, -std::numeric_limits<double>::infinity());
    for (size_t i = 0; i < e; ++i)
        seg_max[segment_of[i]] = std::max(seg_max[segment_of[i]], L[i]);
    std::vector<double> seg_sum(n_segments, 0.0);
    Tensor Y({e});
    for (size_t i = 0; i < e; ++i) {
        Y[i] = std::exp(L[i] - seg_max[segment_of[i]]);
        seg_sum[segment_of[i]] += Y[i];
    }
    for (size_t i = 0; i < e; ++i) Y[i] /= seg_sum[segment_of[i]];
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [logits, seg = std::move(segment_of), n_segments, out](Tape& t) {
        const Tensor& G = t.grads_[out];
        const Tensor& Y = t.vals_[out];
        Tensor& GL = t.grads_[logits];
        std::vector<double> seg_dot(n_segments, 0.0);
        for (size_t i = 0; i < G.size(); ++i) seg_dot[seg[i]] += G[i] * Y[i];
        for (size_t i = 0; i < G.size(); ++i) GL[i] += Y[i] * (G[i] - seg_dot[seg[i]]);
    });
}

int Tape::segment_sum(int values, std::vector<int> segment_of, int n_segments) {
    const Tensor& V = vals_[values];
    require(V.shape().size() == 2 && V.rows() == segment_of.size(), "segment_sum shapes");
    for (int s : segment_of) require(s >= 0 && s < n_segments, "segment id");
    const size_t d = V.cols();
    Tensor Y({static_cast<size_t>(n_segments), d});
    for (size_t i = 0; i < V.rows(); ++i) {
        const double* vi = V.data() + i * d;
        double* ys = Y.data() + static_cast<size_t>(segment_of[i]) * d;
        for (size_t j = 0; j < d; ++j) ys[j] += vi[j];
    }
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [values, seg = std::move(segment_of), out, d](Tape& t) {
        const Tensor& G = t.grads_[out];
        Tensor& GV = t.grads_[values];
        for (size_t i = 0; i < seg.size(); ++i) {
            const double* gs = G.data() + static_cast<size_t>(seg[i]) * d;
            double* gv = GV.data() + i * d;
            for (size_t j = 0; j < d; ++j) gv[j] += gs[j];
        }
    });
}

int Tape::row_dot(int a, int b) {
    const Tensor& A = vals_[a];
    const Tensor& B = vals_[b];
    require(A.same_shape(B) && A.shape().size() == 2, "row_dot shapes");
    const size_t n = A.rows(), d = A.cols();
    Tensor Y({n});
    for (size_t i = 0; i < n; ++i) {
        double acc = 0.0;
        for (size_t j = 0; j < d; ++j) acc += A.at(i, j) * B.at(i, j);
        Y[i] = acc;
    }
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [a, b, out, n, d](Tape& t) {
        const Tensor& G = t.grads_[out];
        const Tensor& A = t.vals_[a];
        const Tensor& B = t.vals_[b];
        Tensor& GA = t.grads_[a];
        Tensor& GB = t.grads_[b];
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < d; ++j) {
                GA.at(i, j) += G[i] * B.at(i, j);
                GB.at(i, j) += G[i] * A.at(i, j);
            }
    });
}

int Tape::mul_rows(int x, int s) {
    const Tensor& X = vals_[x];
    const Tensor& S = vals_[s];
    require(X.shape().size() == 2 && S.shape().size() == 1 && X.rows() == S.size(),
            "mul_rows shapes");
    const size_t n = X.rows(), d = X.cols();
    Tensor Y({n, d});
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < d; ++j) Y.at(i, j) = X.at(i, j) * S[i];
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [x, s, out, n, d](Tape& t) {
        const Tensor& G = t.grads_[out];
        const Tensor& X = t.vals_[x];
        const Tensor& S = t.vals_[s];
        Tensor& GX = t.grads_[x];
        Tensor& GS = t.grads_[s];
        for (size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            for (size_t j = 0; j < d; ++j) {
                GX.at(i, j) += G.at(i, j) * S[i];
                acc += G.at(i, j) * X.at(i, j);
            }
            GS[i] += acc;
        }
    });
}

int Tape::scale_rows(int x, std::vector<double> s) {
    const Tensor& X = vals_[x];
    require(X.shape().size() == 2 && X.rows() == s.size(), "scale_rows shapes");
    const size_t n = X.rows(), d = X.cols();
    Tensor Y({n, d});
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < d; ++j) Y.at(i, j) = X.at(i, j) * s[i];
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [x, s = std::move(s), out, d](Tape& t) {
        const Tensor& G = t.grads_[out];
        Tensor& GX = t.grads_[x];
        for (size_t i = 0; i < s.size(); ++i)
            for (size_t j = 0; j < d; ++j) GX.at(i, j) += G.at(i, j) * s[i];
    });
}

int Tape::reshape(int x, std::vector<size_t> shape) {
    const Tensor& X = vals_[x];
    Tensor Y(shape);
    require(Y.size() == X.size(), "reshape size");
    std::copy_n(X.data(), X.size(), Y.data());
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [x, out](Tape& t) {
        const Tensor& G = t.grads_[out];
        Tensor& GX = t.grads_[x];
        for (size_t i = 0; i < G.size(); ++i) GX[i] += G[i];
    });
}

int Tape::logsumexp_rows(int x) {
    const Tensor& X = vals_[x];
    require(X.shape().size() == 2, "logsumexp rank");
    const size_t n = X.rows(), c = X.cols();
    require(c >= 1, "logsumexp empty rows");
    Tensor Y({n});
    for (size_t i = 0; i < n; ++i) {
        const double* xi = X.data() + i * c;
        double m = xi[0];
        for (size_t j = 1; j < c; ++j) m = std::max(m, xi[j]);
        double acc = 0.0;
        for (size_t j = 0; j < c; ++j) acc += std::exp(xi[j] - m);
        Y[i] = m + std::log(acc);
    }
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [x, out, n, c](Tape& t) {
        const Tensor& G = t.grads_[out];
        const Tensor& X = t.vals_[x];
        const Tensor& Y = t.vals_[out];
        Tensor& GX = t.grads_[x];
        for (size_t i = 0; i < n; ++i)
            for (size_t j = 0; j < c; ++j)
                GX.at(i, j) += G[i] * std::exp(X.at(i, j) - Y[i]);
    });
}

int Tape::pick(int x, std::vector<int> labels) {
    const Tensor& X = vals_[x];
    require(X.shape().size() == 2 && X.rows() == labels.size(), "pick shapes");
    const size_t c = X.cols();
    for (int l : labels)
        if (l < 0 || static_cast<size_t>(l) >= c) throw LabelOutOfRange(std::to_string(l));
    Tensor Y({labels.size()});
    for (size_t i = 0; i < labels.size(); ++i) Y[i] = X.at(i, labels[i]);
    const int out = static_cast<int>(vals_.size());
    return push(std::move(Y), [x, labels = std::move(labels), out](Tape& t) {
        const Tensor& G = t.grads_[out];
        Tensor& GX = t.grads_[x];
        for (size_t i = 0; i < labels.size(); ++i) GX.at(i, labels[i]) += G[i];
    });
}

int Tape::sum_all(int x) {
    const Tensor& X = vals_[x];
    double acc = 0.0;
    for (size_t i = 0; i < X.size(); ++i) acc += X[i];
    const int out = static_cast<int>(vals_.size());
    return push(Tensor::scalar(acc), [x, out](Tape& t) {
        const double g = t.grads_[out][0];
        Tensor& GX = t.grads_[x];
        for (size_t i = 0; i < GX.size(); ++i) GX[i] += g;
    });
}

void Tape::backward(int scalar_id) {
    require(scalar_id >= 0 && static_cast<size_t>(scalar_id) < vals_.size() &&
                vals_[scalar_id].size() == 1,
            "backward expects a scalar node");
    for (size_t i = 0; i < grads_.size(); ++i) grads_[i] = Tensor(vals_[i].shape());
    grads_[scalar_id][0] = 1.0;
    for (int id = scalar_id; id >= 0; --id)
        if (backs_[id]) backs_[id](*this);
    for (const Tensor& g : grads_)
        if (!g.all_finite()) throw NonFiniteGradient("backward produced NaN/Inf");
}

double grad_check(const std::function<int(Tape&, const std::vector<int>&)>& fn,
                  const std::vector<Tensor>& inputs, double epsilon) {
    Tape tape;
    std::vector<int> ids;
    ids.reserve(inputs.size());
    for (const Tensor& t : inputs) ids.push_back(tape.input(t));
    int loss = fn(tape, ids);
    tape.backward(loss);
    std::vector<Tensor> analytic;
    for (int id : ids) analytic.push_back(tape.grad(id));

    auto eval = [&](const std::vector<Tensor>& perturbed) {
        Tape t2;
        std::vector<int> ids2;
        for (const Tensor& t : perturbed) ids2.push_back(t2.input(t));
        int l2 = fn(t2, ids2);
        return t2.value(l2)[0];
    };

    double max_err = 0.0;
    std::vector<Tensor> work = inputs;
    for (size_t i = 0; i < inputs.size(); ++i) {
        for (size_t j = 0; j < inputs[i].size(); ++j) {
            const double orig = work[i][j];
            work[i][j] = orig + epsilon;
            const double up = eval(work);
            work[i][j] = orig - epsilon;
            const double down = eval(work);
            work[i][j] = orig;
            const double numeric = (up - down) / (2.0 * epsilon);
            const double a = analytic[i][j];
            if (!std::isfinite(a)) throw NonFiniteGradient("analytic gradient entry");
            const double err = std::abs(a - numeric) / std::max({1.0, std::abs(a), std::abs(numeric)});
            max_err = std::max(max_err, err);
        }
    }
    return max_err;
}

}  // namespace hpst::diff
