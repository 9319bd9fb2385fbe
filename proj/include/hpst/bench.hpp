#pragma once

#include <cstdint>
#include <vector>

#include "hpst/event.hpp"
#include "hpst/model.hpp"

namespace hpst {

struct BenchReport {
    size_t n_samples = 0;
    double mean_time_s = 0.0;
    double sd_time_s = 0.0;
    double peak_mem_mib = 0.0;     // peak incremental tensor allocation
    double sparse_bytes = 0.0;     // mean per event, analytic
    double dense_bytes = 0.0;      // analytic, 2*80*100 f64
    size_t crossover_hits = 0;     // first K with sparse >= dense
    double mean_hits = 0.0;
};

// Analytic representation sizes: per hit two f64 coordinates plus one f64
// value; dense is the full 2 x 80 x 100 f64 grid.
inline double sparse_bytes_for(size_t n_hits) { return static_cast<double>(n_hits) * 24.0; }
inline double dense_bytes_grid() { return 2.0 * 80.0 * 100.0 * 8.0; }
inline size_t sparse_dense_crossover() {
    size_t k = static_cast<size_t>(dense_bytes_grid() / 24.0);
    while (sparse_bytes_for(k) < dense_bytes_grid()) ++k;
    return k;
}

// Single-threaded timing of per-event forward passes after one warm-up pass.
BenchReport bench_inference(const ModelWeights& weights, const HyperParams& hyper,
                            const std::vector<Event>& events, size_t n_samples = 100);

}  // namespace hpst
