#include "hpst/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "hpst/errors.hpp"
#include "hpst/loss.hpp"

namespace hpst {

AucResult ovr_auc(const std::vector<std::vector<double>>& class_scores,
                  const std::vector<int>& true_classes) {
    if (class_scores.size() != true_classes.size()) throw ShapeMismatch("ovr_auc inputs");
    if (class_scores.size() < 2) throw DegenerateInput("ovr_auc needs at least 2 hits");
    const size_t n = class_scores.size();
    const size_t n_cls = class_scores[0].size();
    for (const auto& row : class_scores) {
        if (row.size() != n_cls) throw ShapeMismatch("ragged score rows");
        double s = std::accumulate(row.begin(), row.end(), 0.0);
        if (std::abs(s - 1.0) > 1e-6) throw DegenerateInput("score row does not sum to 1");
    }

    AucResult out;
    std::vector<size_t> order(n);
    std::vector<double> ranks(n);
    for (size_t c = 0; c < n_cls; ++c) {
        size_t n_pos = 0;
        for (int t : true_classes)
            if (static_cast<size_t>(t) == c) ++n_pos;
        if (n_pos == 0 || n_pos == n) continue;  // one-sided: skipped

        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](size_t a, size_t b) {
            return class_scores[a][c] < class_scores[b][c];
        });
        // midranks
        size_t i = 0;
        while (i < n) {
            size_t j = i;
            while (j + 1 < n && class_scores[order[j + 1]][c] == class_scores[order[i]][c]) ++j;
            const double mid = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
            for (size_t k = i; k <= j; ++k) ranks[order[k]] = mid;
            i = j + 1;
        }
        double rank_sum = 0.0;
        for (size_t k = 0; k < n; ++k)
            if (static_cast<size_t>(true_classes[k]) == c) rank_sum += ranks[k];
        const double n_neg = static_cast<double>(n - n_pos);
        const double auc = (rank_sum - static_cast<double>(n_pos) * (n_pos + 1) / 2.0) /
                           (static_cast<double>(n_pos) * n_neg);
        out.per_class[static_cast<int>(c)] = auc;
    }
    if (!out.per_class.empty()) {
        double acc = 0.0;
        for (const auto& [c, a] : out.per_class) acc += a;
        out.macro = acc / static_cast<double>(out.per_class.size());
    }
    return out;
}

double segmentation_accuracy(const std::vector<int>& ins_pred, const std::vector<int>& ins_true) {
    if (ins_pred.size() != ins_true.size()) throw ShapeMismatch("segmentation_accuracy inputs");
    if (ins_pred.empty()) return 1.0;
    int n_slots = 0, n_true = 0;
    for (int p : ins_pred) n_slots = std::max(n_slots, p + 1);
    for (int t : ins_true) n_true = std::max(n_true, t + 1);
    const int n = std::max(n_slots, n_true);
    // Maximize matched agreement: minimize negated overlap counts.
    std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
    for (size_t k = 0; k < ins_pred.size(); ++k) cost[ins_pred[k]][ins_true[k]] -= 1.0;
    Assignment asg = linear_sum_assignment(cost);
    return -asg.total_cost / static_cast<double>(ins_pred.size());
}

std::vector<ProngScore> prong_purity_efficiency(const std::vector<int>& ins_pred,
                                                const std::vector<int>& ins_true,
                                                const std::vector<int>& sem_true,
                                                uint64_t event_id) {
    if (ins_pred.size() != ins_true.size() || ins_true.size() != sem_true.size())
        throw ShapeMismatch("prong_purity_efficiency inputs");
    int n_slots = 0, n_true = 0;
    for (int p : ins_pred) n_slots = std::max(n_slots, p + 1);
    for (int t : ins_true) n_true = std::max(n_true, t + 1);

    // overlap[s][t] = hits shared by predicted prong s and true prong t
    std::vector<std::vector<size_t>> overlap(n_slots, std::vector<size_t>(n_true, 0));
    std::vector<size_t> pred_size(n_slots, 0), true_size(n_true, 0);
    for (size_t k = 0; k < ins_pred.size(); ++k) {
        ++overlap[ins_pred[k]][ins_true[k]];
        ++pred_size[ins_pred[k]];
        ++true_size[ins_true[k]];
    }
    // Each nonempty predicted prong joins the true prong with most shared
    // hits, ties to the lower true id. Many-to-one is allowed.
    std::vector<int> assigned_to(n_slots, -1);
    for (int s = 0; s < n_slots; ++s) {
        if (pred_size[s] == 0) continue;
        size_t best = 0;
        int best_t = -1;
        for (int t = 0; t < n_true; ++t)
            if (overlap[s][t] > best) {
                best = overlap[s][t];
                best_t = t;
            }
        assigned_to[s] = best_t;  // -1 only if the prong shares no hits (impossible here)
    }

    std::vector<int> prong_class(n_true, 0);
    for (size_t k = 0; k < ins_true.size(); ++k) prong_class[ins_true[k]] = sem_true[k];

    std::vector<ProngScore> out;
    for (int t = 0; t < n_true; ++t) {
        if (true_size[t] == 0) continue;
        size_t covered = 0, union_size = 0;
        for (int s = 0; s < n_slots; ++s) {
            if (assigned_to[s] != t) continue;
            covered += overlap[s][t];
            union_size += pred_size[s];
        }
        ProngScore ps;
        ps.event_id = event_id;
        ps.true_instance = t;
        ps.class_id = prong_class[t];
        ps.n_hits = true_size[t];
        ps.efficiency = static_cast<double>(covered) / static_cast<double>(true_size[t]);
        ps.purity = union_size == 0 ? 0.0
                                    : static_cast<double>(covered) / static_cast<double>(union_size);
        out.push_back(ps);
    }
    return out;
}

void Histogram::add(double x) {
    int b = static_cast<int>(x * 20.0);
    b = std::clamp(b, 0, 19);
    ++bins[b];
}

size_t Histogram::total() const {
    size_t n = 0;
    for (size_t b : bins) n += b;
    return n;
}

}  // namespace hpst
