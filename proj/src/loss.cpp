#include "hpst/loss.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "hpst/errors.hpp"

namespace hpst {

namespace {

// Jonker-Volgenant style shortest augmenting path; returns min total cost and
// row -> col assignment for an n x n matrix addressed through index maps.
double jv_solve(const std::vector<std::vector<double>>& cost, const std::vector<int>& rows,
                const std::vector<int>& cols, std::vector<int>* row_to_col = nullptr) {
    const int n = static_cast<int>(rows.size());
    if (n == 0) return 0.0;
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, std::numeric_limits<double>::infinity());
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                double cur = cost[rows[i0 - 1]][cols[j - 1]] - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }
    double total = 0.0;
    if (row_to_col) row_to_col->assign(n, -1);
    for (int j = 1; j <= n; ++j) {
        if (p[j] == 0) continue;
        if (row_to_col) (*row_to_col)[p[j] - 1] = j - 1;
        total += cost[rows[p[j] - 1]][cols[j - 1]];
    }
    return total;
}

}  // namespace

Assignment linear_sum_assignment(const std::vector<std::vector<double>>& cost) {
    const int n = static_cast<int>(cost.size());
    double scale = 1.0;
    for (const auto& row : cost) {
        if (static_cast<int>(row.size()) != n) throw ShapeMismatch("cost matrix must be square");
        for (double c : row) {
            if (!std::isfinite(c)) throw NonFiniteCost("cost matrix entry");
            scale = std::max(scale, std::abs(c));
        }
    }
    Assignment result;
    if (n == 0) return result;

    std::vector<int> all_rows(n), all_cols(n);
    for (int i = 0; i < n; ++i) all_rows[i] = all_cols[i] = i;
    const double optimum = jv_solve(cost, all_rows, all_cols);
    const double tol = 1e-9 * scale * n;

    // Lexicographic refinement: fix each row in order to the smallest column
    // that still admits a completion at the optimal total cost.
    std::vector<char> col_used(n, 0);
    result.col_of_row.assign(n, -1);
    double fixed = 0.0;
    for (int i = 0; i < n; ++i) {
        std::vector<int> rem_rows;
        for (int r = i + 1; r < n; ++r) rem_rows.push_back(r);
        bool placed = false;
        for (int j = 0; j < n && !placed; ++j) {
            if (col_used[j]) continue;
            std::vector<int> rem_cols;
            for (int c = 0; c < n; ++c)
                if (!col_used[c] && c != j) rem_cols.push_back(c);
            const double completion = jv_solve(cost, rem_rows, rem_cols);
            if (fixed + cost[i][j] + completion <= optimum + tol) {
                result.col_of_row[i] = j;
                col_used[j] = 1;
                fixed += cost[i][j];
                placed = true;
            }
        }
        if (!placed) throw NonFiniteCost("refinement failed to place a row");
    }
    result.total_cost = fixed;
    return result;
}

int semantic_loss(diff::Tape& tape, const std::array<int, 2>& sem_logits,
                  const std::array<std::vector<int>, 2>& sem_labels) {
    size_t total_hits = sem_labels[0].size() + sem_labels[1].size();
    if (total_hits == 0) return tape.input(diff::Tensor::scalar(0.0));
    int acc = -1;
    for (int v = 0; v < 2; ++v) {
        const auto& labels = sem_labels[v];
        if (tape.value(sem_logits[v]).rows() != labels.size())
            throw ShapeMismatch("semantic_loss logits vs labels");
        if (labels.empty()) continue;
        int lse = tape.logsumexp_rows(sem_logits[v]);
        int picked = tape.pick(sem_logits[v], labels);
        int per_hit = tape.add(lse, tape.scale(picked, -1.0));
        int s = tape.sum_all(tape.reshape(per_hit, {labels.size(), 1}));
        acc = acc < 0 ? s : tape.add(acc, s);
    }
    return tape.scale(acc, 1.0 / static_cast<double>(total_hits));
}

std::pair<int, std::vector<int>> instance_loss(diff::Tape& tape,
                                               const std::array<int, 2>& ins_logits,
                                               const std::array<std::vector<int>, 2>& ins_labels) {
    const size_t total_hits = ins_labels[0].size() + ins_labels[1].size();
    const size_t slots = std::max(tape.value(ins_logits[0]).cols(), tape.value(ins_logits[1]).cols());
    if (total_hits == 0) return {tape.input(diff::Tensor::scalar(0.0)), std::vector<int>(slots, -1)};

    int n_labels = 0;
    for (int v = 0; v < 2; ++v)
        for (int l : ins_labels[v]) n_labels = std::max(n_labels, l + 1);
    if (static_cast<size_t>(n_labels) > slots)
        throw TooManyInstances(std::to_string(n_labels) + " labels for " +
                               std::to_string(slots) + " slots");

    // cost[s][p] = mean over hits with true instance p of -log softmax[s],
    // from forward values only; dummy columns p >= P cost 0.
    std::vector<std::vector<double>> cost(slots, std::vector<double>(slots, 0.0));
    std::vector<size_t> label_count(n_labels, 0);
    for (int v = 0; v < 2; ++v) {
        const diff::Tensor& L = tape.value(ins_logits[v]);
        if (L.rows() != ins_labels[v].size()) throw ShapeMismatch("instance_loss logits vs labels");
        for (size_t k = 0; k < ins_labels[v].size(); ++k) {
            const int p = ins_labels[v][k];
            ++label_count[p];
            double m = L.at(k, 0);
            for (size_t s = 1; s < slots; ++s) m = std::max(m, L.at(k, s));
            double lse = 0.0;
            for (size_t s = 0; s < slots; ++s) lse += std::exp(L.at(k, s) - m);
            lse = m + std::log(lse);
            for (size_t s = 0; s < slots; ++s) cost[s][p] += lse - L.at(k, s);
        }
    }
    for (int p = 0; p < n_labels; ++p)
        for (size_t s = 0; s < slots; ++s) cost[s][p] /= static_cast<double>(label_count[p]);

    Assignment asg = linear_sum_assignment(cost);
    std::vector<int> slot_of_label(n_labels, -1);
    for (size_t s = 0; s < slots; ++s)
        if (asg.col_of_row[s] < n_labels) slot_of_label[asg.col_of_row[s]] = static_cast<int>(s);

    int acc = -1;
    for (int v = 0; v < 2; ++v) {
        if (ins_labels[v].empty()) continue;
        std::vector<int> target(ins_labels[v].size());
        for (size_t k = 0; k < target.size(); ++k) target[k] = slot_of_label[ins_labels[v][k]];
        int lse = tape.logsumexp_rows(ins_logits[v]);
        int picked = tape.pick(ins_logits[v], target);
        int per_hit = tape.add(lse, tape.scale(picked, -1.0));
        int s = tape.sum_all(tape.reshape(per_hit, {target.size(), 1}));
        acc = acc < 0 ? s : tape.add(acc, s);
    }
    int loss = tape.scale(acc, 1.0 / static_cast<double>(total_hits));
    return {loss, asg.col_of_row};
}

int total_loss_node(diff::Tape& tape, int sem, int ins, double lambda) {
    if (lambda < 0.0 || lambda > 1.0) throw ConfigError("lambda must be in [0,1]");
    return tape.add(tape.scale(sem, lambda), tape.scale(ins, 1.0 - lambda));
}

}  // namespace hpst
