#pragma once

#include <array>
#include <vector>

#include "hpst/event.hpp"
#include "hpst/metrics.hpp"
#include "hpst/model.hpp"

namespace hpst {

struct Predictions {
    std::array<std::vector<std::vector<double>>, 2> sem_probs;  // per view, per hit
    std::array<std::vector<int>, 2> ins_slot;                   // argmax slot per hit
};

Predictions predict_event(const ModelWeights& weights, const HyperParams& hyper,
                          const Event& event);

EvalReport evaluate(const ModelWeights& weights, const HyperParams& hyper,
                    const std::vector<Event>& events);

}  // namespace hpst
