#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "hpst/event.hpp"

namespace hpst {

struct GenConfig {
    uint64_t seed = 0;
    std::array<int, 2> n_prongs_range = {1, 6};
    double hits_per_prong_mean = 20.0;  // both views combined
    double noise_hit_rate = 3.0;        // Poisson mean per event
    std::vector<double> class_mixture = {0.3, 0.3, 0.1, 0.1, 0.1, 0.1};
    double cross_view_ambiguity = 0.5;
    int n_classes = kDefaultClasses;
    int p_max = kDefaultInstanceSlots;

    void validate() const;  // throws ConfigError
};

// Geometry of one generated prong before projection into the two views.
struct ProngSpec {
    int class_id = 0;
    std::array<double, 3> vertex = {0, 0, 0};
    std::array<double, 3> direction = {0, 0, 1};  // unit norm
    double length = 1.0;                          // planes traversed
    std::array<double, 2> width_profile = {0, 0}; // per-view scatter (XZ, YZ)
    bool kink = false;
    bool shower = false;
    double log_value_mu = 0.0;     // hit-value lognormal parameters
    double log_value_sigma = 0.3;
    std::array<double, 2> log_value_offset = {0, 0};  // per-view shift of mu
};

// Deterministic given (event_id, config); throws DegenerateEvent after 100
// failed attempts.
Event generate_event(uint64_t event_id, const GenConfig& config);

DatasetHeader generate_dataset(uint64_t n_events, const GenConfig& config,
                               const std::string& out_path);

}  // namespace hpst
