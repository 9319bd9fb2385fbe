#include "hpst/synthgen.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "hpst/errors.hpp"

namespace hpst {

namespace {

uint64_t splitmix64(uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Class shape constants. Widths for the electron/photon pair and jitters for
// the muon/pion pair come in a low/high pair; in ambiguous mode the two views'
// parameters are correlated for one class of the pair and anti-correlated for
// the other, so per-view marginals coincide.
constexpr double kConeLo = 0.5, kConeHi = 2.4;
constexpr double kTrackLo = 0.12, kTrackHi = 1.3;
// Per-view log-value shifts used in ambiguous mode: the first class of a pair
// draws the same shift in both views, the second draws opposite shifts. The
// per-view marginal is a symmetric +-delta mixture either way; only the
// cross-view comparison separates the pair.
constexpr double kShowerValueShift = 0.6, kTrackValueShift = 0.45;

struct ClassShape {
    double rel_length;   // scales hits_per_prong_mean / 2
    double log_value_mu;
    double log_value_sigma;
};

// electron, muon, proton, pion, photon, other
constexpr ClassShape kShapes[6] = {
    {0.85, -0.1, 0.4}, {1.6, 0.0, 0.25}, {0.5, 0.8, 0.3},
    {1.0, 0.1, 0.3},   {0.85, -0.1, 0.4}, {0.45, -0.3, 0.4},
};
constexpr double kAmbiguousTrackRelLength = 1.2;   // shared by mu/pi when ambiguous
constexpr double kAmbiguousShowerRelLength = 1.1;  // shared by e/gamma when ambiguous

int sample_class(std::mt19937_64& rng, const std::vector<double>& mixture) {
    double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    for (size_t c = 0; c < mixture.size(); ++c) {
        acc += mixture[c];
        if (u < acc) return static_cast<int>(c);
    }
    return static_cast<int>(mixture.size()) - 1;
}

int sample_poisson(std::mt19937_64& rng, double mean) {
    if (mean <= 0.0) return 0;
    return std::poisson_distribution<int>(mean)(rng);
}

double gauss_clamped(std::mt19937_64& rng) {
    return std::clamp(std::normal_distribution<double>(0.0, 0.45)(rng), -1.0, 1.0);
}

struct ProngHits {
    std::vector<Hit> view_hits[2];
};

ProngHits make_prong(std::mt19937_64& rng, const GenConfig& cfg, const ProngSpec& spec) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    ProngHits out;
    const int n_steps = std::max(3, static_cast<int>(std::lround(spec.length)));
    const double dz = 0.7 + 0.6 * unif(rng);  // strictly forward in z
    // Transverse slopes per view from the 3D direction, bounded so a prong
    // mostly stays in the grid.
    double sx = spec.direction[0] / std::max(0.3, spec.direction[2]);
    double sy = spec.direction[1] / std::max(0.3, spec.direction[2]);
    sx = std::clamp(sx, -2.0, 2.0);
    sy = std::clamp(sy, -2.0, 2.0);
    double kink_sx = 0.0, kink_sy = 0.0;
    if (spec.kink) {
        double ang = (unif(rng) < 0.5 ? 1.0 : -1.0) * (0.8 + 0.8 * unif(rng));
        kink_sx = ang;
        kink_sy = -ang * 0.6;
    }
    const std::array<double, 2> mu_log = {spec.log_value_mu + spec.log_value_offset[0],
                                          spec.log_value_mu + spec.log_value_offset[1]};
    const double sigma_log = spec.log_value_sigma;
    for (int t = 0; t < n_steps; ++t) {
        const double z = spec.vertex[2] + t * dz;
        if (z < 0.0 || z >= kPlanes) continue;
        const double frac = static_cast<double>(t) / std::max(1, n_steps - 1);
        const double grow = spec.shower ? (0.25 + frac) : 1.0;
        double base[2] = {spec.vertex[0] + t * dz * sx, spec.vertex[1] + t * dz * sy};
        if (spec.kink && t > n_steps / 2) {
            const double after = (t - n_steps / 2) * dz;
            base[0] += after * kink_sx;
            base[1] += after * kink_sy;
        }
        for (int v = 0; v < 2; ++v) {
            const double trans = base[v] + gauss(rng) * spec.width_profile[v] * grow;
            if (trans < 0.0 || trans >= kTransverseCells) continue;
            Hit h;
            h.coord = {trans, z};
            h.value = std::exp(mu_log[v] + sigma_log * gauss(rng));
            h.sem_label = spec.class_id;
            out.view_hits[v].push_back(h);
        }
    }
    (void)cfg;
    return out;
}

bool try_generate(uint64_t event_id, const GenConfig& cfg, std::mt19937_64& rng, Event& out) {
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const int n_prongs = std::uniform_int_distribution<int>(cfg.n_prongs_range[0],
                                                           cfg.n_prongs_range[1])(rng);
    // Shared interaction vertex; prongs fan out from it.
    const double vx = 12.0 + 56.0 * unif(rng);
    const double vy = 12.0 + 56.0 * unif(rng);
    const double vz = 10.0 + 55.0 * unif(rng);

    std::vector<ProngHits> prongs;
    for (int p = 0; p < n_prongs; ++p) {
        ProngSpec spec;
        spec.class_id = sample_class(rng, cfg.class_mixture);
        spec.vertex = {vx, vy, vz};
        double dx = gauss_clamped(rng);
        double dy = gauss_clamped(rng);
        double dzc = 0.5 + 0.5 * unif(rng);
        double norm = std::sqrt(dx * dx + dy * dy + dzc * dzc);
        spec.direction = {dx / norm, dy / norm, dzc / norm};

        const bool pair_eg = spec.class_id == 0 || spec.class_id == 4;
        const bool pair_mp = spec.class_id == 1 || spec.class_id == 3;
        const bool ambiguous = (pair_eg || pair_mp) && unif(rng) < cfg.cross_view_ambiguity;
        spec.shower = pair_eg;
        spec.log_value_mu = kShapes[spec.class_id].log_value_mu;
        spec.log_value_sigma = kShapes[spec.class_id].log_value_sigma;
        double rel = kShapes[spec.class_id].rel_length;
        if (pair_eg) {
            if (ambiguous) {
                rel = kAmbiguousShowerRelLength;
                const double s = unif(rng) < 0.5 ? kConeLo : kConeHi;
                const double u = (unif(rng) < 0.5 ? 1.0 : -1.0) * kShowerValueShift;
                if (spec.class_id == 0) {
                    spec.width_profile = {s, s};  // electron: correlated widths
                    spec.log_value_offset = {u, u};
                } else {
                    spec.width_profile = {s, s == kConeLo ? kConeHi : kConeLo};  // photon
                    spec.log_value_offset = {u, -u};
                }
            } else {
                spec.width_profile = spec.class_id == 0 ? std::array<double, 2>{kConeHi, kConeHi}
                                                        : std::array<double, 2>{kConeLo, kConeLo};
            }
        } else if (pair_mp) {
            if (ambiguous) {
                rel = kAmbiguousTrackRelLength;
                // Shared value distribution: neither track class may carry
                // per-view energy signal when the pair is ambiguous.
                spec.log_value_mu = 0.05;
                spec.log_value_sigma = 0.28;
                const double w = unif(rng) < 0.5 ? kTrackLo : kTrackHi;
                const double u = (unif(rng) < 0.5 ? 1.0 : -1.0) * kTrackValueShift;
                if (spec.class_id == 1) {
                    spec.width_profile = {w, w};  // muon: correlated jitter
                    spec.log_value_offset = {u, u};
                } else {
                    spec.width_profile = {w, w == kTrackLo ? kTrackHi : kTrackLo};  // pion
                    spec.log_value_offset = {u, -u};
                }
            } else {
                spec.kink = spec.class_id == 3;
                spec.width_profile = spec.class_id == 1
                                         ? std::array<double, 2>{kTrackLo, kTrackLo}
                                         : std::array<double, 2>{0.35, 0.35};
            }
        } else {
            spec.width_profile = {0.3, 0.3};
        }
        const double base_len = cfg.hits_per_prong_mean / 2.0 * rel;
        spec.length = std::max(3.0, base_len * (0.75 + 0.5 * unif(rng)));
        prongs.push_back(make_prong(rng, cfg, spec));
    }

    // Keep only prongs with hits in both views; relabel contiguously.
    out = Event{};
    out.event_id = event_id;
    out.views[0].view_id = 0;
    out.views[1].view_id = 1;
    int next_id = 0;
    for (auto& ph : prongs) {
        if (ph.view_hits[0].empty() || ph.view_hits[1].empty()) continue;
        if (next_id >= cfg.p_max) break;
        for (int v = 0; v < 2; ++v)
            for (Hit h : ph.view_hits[v]) {
                h.ins_label = next_id;
                out.views[v].hits.push_back(h);
            }
        ++next_id;
    }
    if (next_id == 0) return false;

    int n_noise = sample_poisson(rng, cfg.noise_hit_rate);
    n_noise = std::min(n_noise, cfg.p_max - next_id);
    for (int i = 0; i < n_noise; ++i) {
        Hit h;
        h.coord = {kTransverseCells * unif(rng), kPlanes * unif(rng)};
        h.value = std::exp(-1.2 + 0.3 * std::normal_distribution<double>(0.0, 1.0)(rng));
        h.sem_label = cfg.n_classes - 1;  // "other"
        h.ins_label = next_id++;
        out.views[unif(rng) < 0.5 ? 0 : 1].hits.push_back(h);
    }
    return true;
}

}  // namespace

void GenConfig::validate() const {
    if (n_prongs_range[0] < 1 || n_prongs_range[1] < n_prongs_range[0])
        throw ConfigError("n_prongs_range must be a nonempty range with lower bound >= 1");
    if (n_prongs_range[1] > p_max) throw ConfigError("n_prongs_range exceeds p_max");
    if (hits_per_prong_mean <= 0) throw ConfigError("hits_per_prong_mean must be > 0");
    if (noise_hit_rate < 0) throw ConfigError("noise_hit_rate must be >= 0");
    if (cross_view_ambiguity < 0 || cross_view_ambiguity > 1)
        throw ConfigError("cross_view_ambiguity must be in [0,1]");
    if (static_cast<int>(class_mixture.size()) != n_classes)
        throw ConfigError("class_mixture length must equal n_classes");
    double sum = std::accumulate(class_mixture.begin(), class_mixture.end(), 0.0);
    if (std::abs(sum - 1.0) > 1e-9) throw ConfigError("class_mixture must sum to 1");
    for (double p : class_mixture)
        if (p < 0) throw ConfigError("class_mixture entries must be >= 0");
    if (n_classes < 2 || p_max < 1) throw ConfigError("n_classes >= 2 and p_max >= 1 required");
}

Event generate_event(uint64_t event_id, const GenConfig& config) {
    config.validate();
    std::mt19937_64 rng(splitmix64(config.seed ^ splitmix64(event_id)));
    Event e;
    for (int attempt = 0; attempt < 100; ++attempt)
        if (try_generate(event_id, config, rng, e)) return e;
    throw DegenerateEvent("event " + std::to_string(event_id) +
                          ": no prong landed in the grid after 100 attempts");
}

DatasetHeader generate_dataset(uint64_t n_events, const GenConfig& config,
                               const std::string& out_path) {
    config.validate();
    std::vector<Event> events;
    events.reserve(n_events);
    for (uint64_t i = 0; i < n_events; ++i) events.push_back(generate_event(i, config));
    DatasetHeader header;
    header.n_events = n_events;
    header.n_classes = config.n_classes;
    header.p_max = config.p_max;
    write_events(events, header, out_path);
    return header;
}

}  // namespace hpst
