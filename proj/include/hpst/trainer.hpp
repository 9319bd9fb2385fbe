#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hpst/model.hpp"

namespace hpst {

struct TrainConfig {
    int epochs = 8;
    double learning_rate = 1e-3;
    double lambda = 0.5;
    int batch_size = 16;  // events per optimizer step, via gradient accumulation
    uint64_t seed = 0;
    int patience = 0;  // early-stop patience in epochs; 0 disables
    HyperParams hyper;

    void validate() const;
};

struct AdamParams {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

struct OptimizerState {
    std::map<std::string, diff::Tensor> m;
    std::map<std::string, diff::Tensor> v;
    uint64_t step = 0;
};

// Bias-corrected Adam update, applied in sorted parameter-path order.
void adam_step(ModelWeights& weights, const std::map<std::string, diff::Tensor>& grads,
               OptimizerState& state, const AdamParams& params);

void save_checkpoint(const ModelWeights& weights, const HyperParams& hyper,
                     const std::string& path);
std::pair<ModelWeights, HyperParams> load_checkpoint(const std::string& path);

struct EpochLog {
    int epoch = 0;
    double train_sem = 0.0;
    double train_ins = 0.0;
    double train_total = 0.0;
    double val_total = 0.0;
    double val_auc = 0.0;
    double val_seg_acc = 0.0;
};

struct TrainResult {
    std::vector<EpochLog> log;
    int best_epoch = 0;
    double best_val_total = 0.0;
};

// Deterministic given (seed, config, dataset) in single-threaded mode. Writes
// the best-validation checkpoint to checkpoint_path and one structured text
// line per epoch to log_path (empty log_path disables the log file).
TrainResult train(const std::string& dataset_path, const TrainConfig& config,
                  const std::string& checkpoint_path, const std::string& log_path = "");

// Accumulates d(total_loss)/d(param) for one event into grads; returns
// (sem, ins, total) loss values.
std::array<double, 3> accumulate_event_gradients(const ModelWeights& weights,
                                                 const HyperParams& hyper, const Event& event,
                                                 double lambda,
                                                 std::map<std::string, diff::Tensor>& grads);

}  // namespace hpst
