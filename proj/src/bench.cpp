#include "hpst/bench.hpp"

#include <chrono>
#include <cmath>

#include "hpst/errors.hpp"
#include "hpst/memstats.hpp"

namespace hpst {

BenchReport bench_inference(const ModelWeights& weights, const HyperParams& hyper,
                            const std::vector<Event>& events, size_t n_samples) {
    if (events.empty()) throw DegenerateInput("bench needs at least one event");
    auto run_forward = [&](const Event& event) {
        diff::Tape tape;
        ParamNodes params = load_params(tape, weights);
        forward(tape, event, params, hyper);
    };
    run_forward(events[0]);  // warm-up

    const size_t baseline = memstats::current_bytes();
    memstats::reset_peak();

    BenchReport report;
    report.n_samples = n_samples;
    double sum = 0.0, sum_sq = 0.0, hit_sum = 0.0;
    for (size_t i = 0; i < n_samples; ++i) {
        const Event& event = events[i % events.size()];
        const auto t0 = std::chrono::steady_clock::now();
        run_forward(event);
        const auto t1 = std::chrono::steady_clock::now();
        const double dt = std::chrono::duration<double>(t1 - t0).count();
        sum += dt;
        sum_sq += dt * dt;
        hit_sum += static_cast<double>(event.total_hits());
    }
    report.mean_time_s = sum / static_cast<double>(n_samples);
    const double var = sum_sq / static_cast<double>(n_samples) -
                       report.mean_time_s * report.mean_time_s;
    report.sd_time_s = std::sqrt(std::max(0.0, var));
    report.peak_mem_mib =
        static_cast<double>(memstats::peak_bytes() - baseline) / (1024.0 * 1024.0);
    report.mean_hits = hit_sum / static_cast<double>(n_samples);
    report.sparse_bytes = report.mean_hits * 24.0;
    report.dense_bytes = dense_bytes_grid();
    report.crossover_hits = sparse_dense_crossover();
    return report;
}

}  // namespace hpst
