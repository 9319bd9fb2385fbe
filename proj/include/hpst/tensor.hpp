#pragma once

#include <cstddef>
#include <functional>
#include <numeric>
#include <vector>

#include "hpst/memstats.hpp"

namespace hpst::diff {

template <class T>
struct CountingAlloc {
    using value_type = T;
    CountingAlloc() = default;
    template <class U>
    CountingAlloc(const CountingAlloc<U>&) {}
    T* allocate(size_t n) {
        memstats::on_alloc(n * sizeof(T));
        return static_cast<T*>(::operator new(n * sizeof(T)));
    }
    void deallocate(T* p, size_t n) {
        memstats::on_free(n * sizeof(T));
        ::operator delete(p);
    }
    bool operator==(const CountingAlloc&) const { return true; }
};

class Tensor {
public:
    Tensor() = default;
    explicit Tensor(std::vector<size_t> shape)
        : shape_(std::move(shape)), data_(size_of(shape_), 0.0) {}
    Tensor(std::vector<size_t> shape, std::vector<double> values);
    static Tensor scalar(double v);

    const std::vector<size_t>& shape() const { return shape_; }
    size_t size() const { return data_.size(); }
    size_t rows() const { return shape_.empty() ? 0 : shape_[0]; }
    size_t cols() const { return shape_.size() < 2 ? 1 : shape_[1]; }

    double* data() { return data_.data(); }
    const double* data() const { return data_.data(); }
    double& operator[](size_t i) { return data_[i]; }
    double operator[](size_t i) const { return data_[i]; }
    double& at(size_t r, size_t c) { return data_[r * cols() + c]; }
    double at(size_t r, size_t c) const { return data_[r * cols() + c]; }

    bool same_shape(const Tensor& o) const { return shape_ == o.shape_; }
    bool all_finite() const;

private:
    static size_t size_of(const std::vector<size_t>& shape) {
        size_t n = 1;
        for (size_t d : shape) n *= d;
        return n;
    }
    std::vector<size_t> shape_;
    std::vector<double, CountingAlloc<double>> data_;
};

// Reverse-mode tape over the primitives the HPST forward pass needs.
// Node values are immutable once recorded; backward visits nodes in reverse
// recording order exactly once. Single-threaded by contract.
class Tape {
public:
    Tape() = default;
    Tape(const Tape&) = delete;
    Tape& operator=(const Tape&) = delete;

    int input(Tensor t);

    const Tensor& value(int id) const { return vals_[id]; }
    const Tensor& grad(int id) const { return grads_[id]; }
    size_t n_nodes() const { return vals_.size(); }

    // out = x . w + b  for x [n, d_in], w [d_in, d_out], b [d_out]
    int linear(int x, int w, int b);
    int relu(int x);
    int add(int a, int b);              // same shape
    int mul(int a, int b);              // elementwise, same shape
    int scale(int x, double c);
    int concat_cols(int a, int b);      // [n, da] ++ [n, db]
    int gather_rows(int x, std::vector<int> idx);
    int layer_norm(int x, int gain, int shift);  // last axis, eps 1e-5
    int segment_softmax(int logits, std::vector<int> segment_of, int n_segments);
    int segment_sum(int values, std::vector<int> segment_of, int n_segments);
    int row_dot(int a, int b);          // [E, d] x [E, d] -> [E]
    int mul_rows(int x, int s);         // [E, d] scaled per row by s [E]
    int scale_rows(int x, std::vector<double> s);  // constant per-row scales
    int reshape(int x, std::vector<size_t> shape);
    int logsumexp_rows(int x);          // [n, C] -> [n]
    int pick(int x, std::vector<int> labels);  // [n, C] -> [n], entry at label
    int sum_all(int x);                 // -> scalar [1]

    void backward(int scalar_id);

private:
    int push(Tensor value, std::function<void(Tape&)> back);
    Tensor& grad_mut(int id) { return grads_[id]; }

    std::vector<Tensor> vals_;
    std::vector<Tensor> grads_;
    std::vector<std::function<void(Tape&)>> backs_;
};

// Max over input entries of |analytic - central difference| /
// max(1, |analytic|, |numeric|) for a scalar-valued tape program.
double grad_check(const std::function<int(Tape&, const std::vector<int>&)>& fn,
                  const std::vector<Tensor>& inputs, double epsilon = 1e-6);

}  // namespace hpst::diff
