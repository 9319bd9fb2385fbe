#pragma once

#include <array>
#include <utility>
#include <vector>

#include "hpst/tensor.hpp"

namespace hpst {

struct Assignment {
    std::vector<int> col_of_row;
    double total_cost = 0.0;
};

// Minimum-cost perfect matching on a square finite cost matrix. Among
// cost-optimal solutions, returns the lexicographically smallest assignment
// vector. Throws NonFiniteCost.
Assignment linear_sum_assignment(const std::vector<std::vector<double>>& cost);

struct LossBreakdown {
    double sem = 0.0;
    double ins = 0.0;
    double total = 0.0;
    double lambda = 0.5;
    std::vector<int> matching;  // slot -> matched column (>= P means dummy)
};

// Mean over all hits in both views of -log softmax(logits)[true class].
// Returns a scalar tape node; zero hits yields a constant 0.
int semantic_loss(diff::Tape& tape, const std::array<int, 2>& sem_logits,
                  const std::array<std::vector<int>, 2>& sem_labels);

// Permutation-optimal instance cross-entropy. One joint matching per event
// over both views; the matching is a constant during backward. Returns the
// scalar loss node and the slot -> label matching.
std::pair<int, std::vector<int>> instance_loss(diff::Tape& tape,
                                               const std::array<int, 2>& ins_logits,
                                               const std::array<std::vector<int>, 2>& ins_labels);

int total_loss_node(diff::Tape& tape, int sem, int ins, double lambda);

}  // namespace hpst
