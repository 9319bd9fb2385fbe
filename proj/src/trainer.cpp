#include "hpst/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "hpst/errors.hpp"
#include "hpst/evaluate.hpp"
#include "hpst/loss.hpp"

namespace hpst {

void TrainConfig::validate() const {
    if (epochs < 1) throw ConfigError("epochs must be >= 1");
    if (learning_rate <= 0) throw ConfigError("learning_rate must be > 0");
    if (lambda < 0 || lambda > 1) throw ConfigError("lambda must be in [0,1]");
    if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
    if (patience < 0) throw ConfigError("patience must be >= 0");
    hyper.validate();
}

void adam_step(ModelWeights& weights, const std::map<std::string, diff::Tensor>& grads,
               OptimizerState& state, const AdamParams& params) {
    ++state.step;
    const double bc1 = 1.0 - std::pow(params.beta1, static_cast<double>(state.step));
    const double bc2 = 1.0 - std::pow(params.beta2, static_cast<double>(state.step));
    for (auto& [path, w] : weights) {
        auto git = grads.find(path);
        if (git == grads.end()) throw ShapeMismatch("missing gradient for " + path);
        const diff::Tensor& g = git->second;
        if (!g.same_shape(w)) throw ShapeMismatch("gradient shape for " + path);
        diff::Tensor& m = state.m.try_emplace(path, diff::Tensor(w.shape())).first->second;
        diff::Tensor& v = state.v.try_emplace(path, diff::Tensor(w.shape())).first->second;
        for (size_t i = 0; i < w.size(); ++i) {
            m[i] = params.beta1 * m[i] + (1.0 - params.beta1) * g[i];
            v[i] = params.beta2 * v[i] + (1.0 - params.beta2) * g[i] * g[i];
            const double mhat = m[i] / bc1;
            const double vhat = v[i] / bc2;
            w[i] -= params.lr * mhat / (std::sqrt(vhat) + params.eps);
        }
    }
}

namespace {

constexpr char kMagic[4] = {'H', 'P', 'S', 'T'};
constexpr uint32_t kCheckpointVersion = 1;

template <class T>
void put(std::ostream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <class T>
T get(std::istream& in) {
    T v;
    in.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!in) throw CorruptCheckpoint("truncated file");
    return v;
}

std::map<std::string, double> hyper_to_map(const HyperParams& h) {
    return {{"base_dim", static_cast<double>(h.base_dim)},
            {"base_voxel_size", h.base_voxel_size},
            {"instance_slots", static_cast<double>(h.instance_slots)},
            {"k_nn", static_cast<double>(h.k_nn)},
            {"m", static_cast<double>(h.m)},
            {"n", static_cast<double>(h.n)},
            {"n_classes", static_cast<double>(h.n_classes)},
            {"use_inter", h.use_inter ? 1.0 : 0.0}};
}

HyperParams hyper_from_map(const std::map<std::string, double>& m) {
    HyperParams h;
    auto need = [&](const char* key) {
        auto it = m.find(key);
        if (it == m.end()) throw CorruptCheckpoint(std::string("missing hyper key ") + key);
        return it->second;
    };
    h.base_dim = static_cast<int>(need("base_dim"));
    h.base_voxel_size = need("base_voxel_size");
    h.instance_slots = static_cast<int>(need("instance_slots"));
    h.k_nn = static_cast<int>(need("k_nn"));
    h.m = static_cast<int>(need("m"));
    h.n = static_cast<int>(need("n"));
    h.n_classes = static_cast<int>(need("n_classes"));
    h.use_inter = need("use_inter") != 0.0;
    return h;
}

}  // namespace

void save_checkpoint(const ModelWeights& weights, const HyperParams& hyper,
                     const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out.write(kMagic, 4);
    put<uint32_t>(out, kCheckpointVersion);
    auto hm = hyper_to_map(hyper);
    put<uint32_t>(out, static_cast<uint32_t>(hm.size()));
    for (const auto& [key, val] : hm) {
        put<uint16_t>(out, static_cast<uint16_t>(key.size()));
        out.write(key.data(), static_cast<std::streamsize>(key.size()));
        put<double>(out, val);
    }
    put<uint32_t>(out, static_cast<uint32_t>(weights.size()));
    for (const auto& [name, tensor] : weights) {
        put<uint16_t>(out, static_cast<uint16_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        put<uint8_t>(out, static_cast<uint8_t>(tensor.shape().size()));
        for (size_t d : tensor.shape()) put<uint32_t>(out, static_cast<uint32_t>(d));
        out.write(reinterpret_cast<const char*>(tensor.data()),
                  static_cast<std::streamsize>(tensor.size() * sizeof(double)));
    }
    if (!out) throw IoError("write failed on " + path);
}

std::pair<ModelWeights, HyperParams> load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open " + path);
    char magic[4];
    in.read(magic, 4);
    if (!in || std::memcmp(magic, kMagic, 4) != 0) throw CorruptCheckpoint("bad magic");
    if (get<uint32_t>(in) != kCheckpointVersion) throw CorruptCheckpoint("unknown version");
    std::map<std::string, double> hm;
    const uint32_t n_keys = get<uint32_t>(in);
    for (uint32_t i = 0; i < n_keys; ++i) {
        const uint16_t len = get<uint16_t>(in);
        std::string key(len, '\0');
        in.read(key.data(), len);
        if (!in) throw CorruptCheckpoint("truncated hyper key");
        hm[key] = get<double>(in);
    }
    HyperParams hyper = hyper_from_map(hm);
    hyper.validate();

    ModelWeights weights;
    const uint32_t n_tensors = get<uint32_t>(in);
    for (uint32_t i = 0; i < n_tensors; ++i) {
        const uint16_t len = get<uint16_t>(in);
        std::string name(len, '\0');
        in.read(name.data(), len);
        if (!in) throw CorruptCheckpoint("truncated tensor name");
        const uint8_t rank = get<uint8_t>(in);
        std::vector<size_t> shape;
        for (uint8_t r = 0; r < rank; ++r) shape.push_back(get<uint32_t>(in));
        diff::Tensor t(shape);
        in.read(reinterpret_cast<char*>(t.data()),
                static_cast<std::streamsize>(t.size() * sizeof(double)));
        if (!in) throw CorruptCheckpoint("truncated tensor data");
        weights[name] = std::move(t);
    }

    // Shape check against a freshly keyed layout for this hyper.
    ModelWeights expect = init_weights(hyper, 0);
    if (expect.size() != weights.size()) throw CorruptCheckpoint("unexpected tensor set");
    for (const auto& [name, tensor] : expect) {
        auto it = weights.find(name);
        if (it == weights.end()) throw CorruptCheckpoint("missing tensor " + name);
        if (!it->second.same_shape(tensor)) throw CorruptCheckpoint("shape mismatch for " + name);
    }
    return {std::move(weights), hyper};
}

std::array<double, 3> accumulate_event_gradients(const ModelWeights& weights,
                                                 const HyperParams& hyper, const Event& event,
                                                 double lambda,
                                                 std::map<std::string, diff::Tensor>& grads) {
    diff::Tape tape;
    ParamNodes params = load_params(tape, weights);
    ForwardOut out = forward(tape, event, params, hyper);
    std::array<std::vector<int>, 2> sem_labels, ins_labels;
    for (int j = 0; j < 2; ++j)
        for (const Hit& h : event.views[j].hits) {
            sem_labels[j].push_back(h.sem_label);
            ins_labels[j].push_back(h.ins_label);
        }
    int sem = semantic_loss(tape, out.sem_logits, sem_labels);
    auto [ins, matching] = instance_loss(tape, out.ins_logits, ins_labels);
    int total = total_loss_node(tape, sem, ins, lambda);
    tape.backward(total);
    for (const auto& [path, id] : params.ids) {
        const diff::Tensor& g = tape.grad(id);
        auto it = grads.try_emplace(path, diff::Tensor(g.shape())).first;
        for (size_t i = 0; i < g.size(); ++i) it->second[i] += g[i];
    }
    return {tape.value(sem)[0], tape.value(ins)[0], tape.value(total)[0]};
}

TrainResult train(const std::string& dataset_path, const TrainConfig& config,
                  const std::string& checkpoint_path, const std::string& log_path) {
    config.validate();
    Dataset ds = read_events(dataset_path);
    if (ds.header.n_classes != config.hyper.n_classes ||
        ds.header.p_max > config.hyper.instance_slots)
        throw ConfigMismatch("dataset n_classes/p_max do not fit the model config");

    // Deterministic 10% validation split by event-id hash.
    auto hash_of = [](uint64_t id) {
        uint64_t x = id + 0x9e3779b97f4a7c15ULL;
        x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
        x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
        return x ^ (x >> 31);
    };
    std::vector<size_t> train_idx, val_idx;
    for (size_t i = 0; i < ds.events.size(); ++i) {
        if (hash_of(ds.events[i].event_id) % 10 == 0)
            val_idx.push_back(i);
        else
            train_idx.push_back(i);
    }
    if (train_idx.empty()) {  // tiny datasets train on everything
        train_idx.resize(ds.events.size());
        std::iota(train_idx.begin(), train_idx.end(), 0);
        val_idx.clear();
    }

    ModelWeights weights = init_weights(config.hyper, config.seed);
    OptimizerState opt;
    AdamParams adam;
    adam.lr = config.learning_rate;
    std::mt19937_64 shuffle_rng(config.seed ^ 0x5bf0a8f2c1d3e64bULL);

    std::ofstream log;
    if (!log_path.empty()) {
        log.open(log_path);
        if (!log) throw IoError("cannot open " + log_path + " for writing");
    }

    TrainResult result;
    result.best_val_total = std::numeric_limits<double>::infinity();
    ModelWeights best_weights = weights;
    int since_best = 0;

    std::vector<Event> val_events;
    for (size_t i : val_idx) val_events.push_back(ds.events[i]);

    for (int epoch = 0; epoch < config.epochs; ++epoch) {
        // Cosine decay from the configured rate to a tenth of it.
        if (config.epochs > 1) {
            const double frac = static_cast<double>(epoch) / (config.epochs - 1);
            adam.lr = config.learning_rate * (0.1 + 0.45 * (1.0 + std::cos(M_PI * frac)));
        }
        std::vector<size_t> order = train_idx;
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double sum_sem = 0.0, sum_ins = 0.0, sum_total = 0.0;
        for (size_t start = 0; start < order.size(); start += config.batch_size) {
            const size_t end = std::min(order.size(), start + config.batch_size);
            std::map<std::string, diff::Tensor> grads;
            for (size_t i = start; i < end; ++i) {
                const Event& event = ds.events[order[i]];
                try {
                    auto [s, ins, tot] =
                        accumulate_event_gradients(weights, config.hyper, event, config.lambda,
                                                   grads);
                    sum_sem += s;
                    sum_ins += ins;
                    sum_total += tot;
                } catch (const NonFiniteError&) {
                    throw NonFiniteLoss("event " + std::to_string(event.event_id));
                } catch (const NonFiniteGradient&) {
                    throw NonFiniteLoss("event " + std::to_string(event.event_id));
                }
            }
            const double inv = 1.0 / static_cast<double>(end - start);
            for (auto& [path, g] : grads)
                for (size_t i = 0; i < g.size(); ++i) g[i] *= inv;
            adam_step(weights, grads, opt, adam);
        }

        EpochLog el;
        el.epoch = epoch;
        const double inv_n = 1.0 / static_cast<double>(std::max<size_t>(1, order.size()));
        el.train_sem = sum_sem * inv_n;
        el.train_ins = sum_ins * inv_n;
        el.train_total = sum_total * inv_n;

        double val_total = el.train_total;  // fallback when no val split
        if (!val_events.empty()) {
            double vs = 0.0;
            size_t n = 0;
            for (const Event& event : val_events) {
                diff::Tape tape;
                ParamNodes params = load_params(tape, weights);
                ForwardOut out = forward(tape, event, params, config.hyper);
                std::array<std::vector<int>, 2> sem_labels, ins_labels;
                for (int j = 0; j < 2; ++j)
                    for (const Hit& h : event.views[j].hits) {
                        sem_labels[j].push_back(h.sem_label);
                        ins_labels[j].push_back(h.ins_label);
                    }
                int sem = semantic_loss(tape, out.sem_logits, sem_labels);
                auto [ins, matching] = instance_loss(tape, out.ins_logits, ins_labels);
                int total = total_loss_node(tape, sem, ins, config.lambda);
                vs += tape.value(total)[0];
                ++n;
            }
            val_total = vs / static_cast<double>(n);
            EvalReport rep = evaluate(weights, config.hyper, val_events);
            el.val_auc = rep.auc.macro;
            el.val_seg_acc = rep.segmentation_acc;
        }
        el.val_total = val_total;
        result.log.push_back(el);
        if (log) {
            std::ostringstream line;
            line.precision(9);
            line << "{\"epoch\":" << el.epoch << ",\"train_sem\":" << el.train_sem
                 << ",\"train_ins\":" << el.train_ins << ",\"train_total\":" << el.train_total
                 << ",\"val_total\":" << el.val_total << ",\"val_auc\":" << el.val_auc
                 << ",\"val_seg_acc\":" << el.val_seg_acc << "}";
            log << line.str() << "\n";
        }

        if (val_total < result.best_val_total) {
            result.best_val_total = val_total;
            result.best_epoch = epoch;
            best_weights = weights;
            since_best = 0;
        } else if (config.patience > 0 && ++since_best >= config.patience) {
            break;
        }
    }
    save_checkpoint(best_weights, config.hyper, checkpoint_path);
    return result;
}

}  // namespace hpst
