#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace hpst {

struct ProngScore {
    uint64_t event_id = 0;
    int true_instance = 0;
    int class_id = 0;
    double efficiency = 0.0;
    double purity = 0.0;
    size_t n_hits = 0;
};

struct AucResult {
    std::map<int, double> per_class;  // classes skipped when one-sided
    double macro = 0.0;
};

// Rank-based (Mann-Whitney) one-vs-rest AUC with midrank tie handling.
// scores: per-hit probability vectors (rows sum to 1 within 1e-6).
AucResult ovr_auc(const std::vector<std::vector<double>>& class_scores,
                  const std::vector<int>& true_classes);

// Hungarian-matched hit agreement fraction for one event.
double segmentation_accuracy(const std::vector<int>& ins_pred, const std::vector<int>& ins_true);

// Per true prong efficiency/purity under many-to-one predicted-to-true
// assignment (each predicted prong goes to the true prong sharing most hits,
// ties to the lower true id).
std::vector<ProngScore> prong_purity_efficiency(const std::vector<int>& ins_pred,
                                                const std::vector<int>& ins_true,
                                                const std::vector<int>& sem_true,
                                                uint64_t event_id = 0);

struct Histogram {
    std::vector<size_t> bins = std::vector<size_t>(20, 0);  // over [0, 1]
    void add(double x);
    size_t total() const;
};

struct EvalReport {
    AucResult auc;
    double segmentation_acc = 0.0;  // hit-weighted mean over events
    std::map<int, Histogram> purity_hist;      // per class
    std::map<int, Histogram> efficiency_hist;  // per class
    size_t n_events = 0;
    size_t n_hits = 0;
};

}  // namespace hpst
