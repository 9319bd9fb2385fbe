#pragma once

#include <atomic>
#include <cstddef>

namespace hpst::memstats {

// Tensor-payload allocation accounting. Counters are process-global; the
// bench contract runs inference single-threaded so peak tracking is exact.
inline std::atomic<size_t> g_current{0};
inline std::atomic<size_t> g_peak{0};

inline void on_alloc(size_t bytes) {
    size_t cur = g_current.fetch_add(bytes) + bytes;
    size_t peak = g_peak.load();
    while (cur > peak && !g_peak.compare_exchange_weak(peak, cur)) {
    }
}

inline void on_free(size_t bytes) { g_current.fetch_sub(bytes); }

inline size_t current_bytes() { return g_current.load(); }
inline size_t peak_bytes() { return g_peak.load(); }
inline void reset_peak() { g_peak.store(g_current.load()); }

}  // namespace hpst::memstats
