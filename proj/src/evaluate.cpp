#include "hpst/evaluate.hpp"

#include <algorithm>
#include <cmath>

namespace hpst {

Predictions predict_event(const ModelWeights& weights, const HyperParams& hyper,
                          const Event& event) {
    diff::Tape tape;
    ParamNodes params = load_params(tape, weights);
    ForwardOut out = forward(tape, event, params, hyper);
    Predictions pred;
    for (int j = 0; j < 2; ++j) {
        const diff::Tensor& sem = tape.value(out.sem_logits[j]);
        const diff::Tensor& ins = tape.value(out.ins_logits[j]);
        pred.sem_probs[j].resize(sem.rows());
        pred.ins_slot[j].resize(ins.rows());
        for (size_t k = 0; k < sem.rows(); ++k) {
            double m = sem.at(k, 0);
            for (size_t c = 1; c < sem.cols(); ++c) m = std::max(m, sem.at(k, c));
            double sum = 0.0;
            pred.sem_probs[j][k].resize(sem.cols());
            for (size_t c = 0; c < sem.cols(); ++c) {
                pred.sem_probs[j][k][c] = std::exp(sem.at(k, c) - m);
                sum += pred.sem_probs[j][k][c];
            }
            for (size_t c = 0; c < sem.cols(); ++c) pred.sem_probs[j][k][c] /= sum;
            size_t best = 0;
            for (size_t s = 1; s < ins.cols(); ++s)
                if (ins.at(k, s) > ins.at(k, best)) best = s;
            pred.ins_slot[j][k] = static_cast<int>(best);
        }
    }
    return pred;
}

EvalReport evaluate(const ModelWeights& weights, const HyperParams& hyper,
                    const std::vector<Event>& events) {
    EvalReport report;
    std::vector<std::vector<double>> all_scores;
    std::vector<int> all_classes;
    double weighted_acc = 0.0;
    size_t total_hits = 0;
    for (const Event& event : events) {
        Predictions pred = predict_event(weights, hyper, event);
        std::vector<int> ins_pred, ins_true, sem_true;
        for (int j = 0; j < 2; ++j) {
            const auto& hits = event.views[j].hits;
            for (size_t k = 0; k < hits.size(); ++k) {
                all_scores.push_back(pred.sem_probs[j][k]);
                all_classes.push_back(hits[k].sem_label);
                ins_pred.push_back(pred.ins_slot[j][k]);
                ins_true.push_back(hits[k].ins_label);
                sem_true.push_back(hits[k].sem_label);
            }
        }
        if (!ins_pred.empty()) {
            weighted_acc += segmentation_accuracy(ins_pred, ins_true) *
                            static_cast<double>(ins_pred.size());
            total_hits += ins_pred.size();
        }
        for (const ProngScore& ps :
             prong_purity_efficiency(ins_pred, ins_true, sem_true, event.event_id)) {
            report.purity_hist[ps.class_id].add(ps.purity);
            report.efficiency_hist[ps.class_id].add(ps.efficiency);
        }
    }
    report.n_events = events.size();
    report.n_hits = total_hits;
    if (total_hits > 0) report.segmentation_acc = weighted_acc / static_cast<double>(total_hits);
    if (all_scores.size() >= 2) report.auc = ovr_auc(all_scores, all_classes);
    return report;
}

}  // namespace hpst
