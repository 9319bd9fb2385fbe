#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "hpst/errors.hpp"
#include "hpst/event.hpp"
#include "hpst/synthgen.hpp"

using namespace hpst;

namespace {

bool events_equal(const Event& a, const Event& b) {
    if (a.event_id != b.event_id) return false;
    for (int v = 0; v < 2; ++v) {
        if (a.views[v].hits.size() != b.views[v].hits.size()) return false;
        for (size_t k = 0; k < a.views[v].hits.size(); ++k) {
            const Hit& ha = a.views[v].hits[k];
            const Hit& hb = b.views[v].hits[k];
            if (ha.coord != hb.coord || ha.value != hb.value || ha.sem_label != hb.sem_label ||
                ha.ins_label != hb.ins_label)
                return false;
        }
    }
    return true;
}

// residual spread of transverse position around a least-squares line in z
double line_residual_rms(const std::vector<Hit>& hits) {
    const size_t n = hits.size();
    double sz = 0, st = 0, szz = 0, szt = 0;
    for (const Hit& h : hits) {
        sz += h.coord[1];
        st += h.coord[0];
        szz += h.coord[1] * h.coord[1];
        szt += h.coord[1] * h.coord[0];
    }
    const double denom = n * szz - sz * sz;
    const double b = denom == 0.0 ? 0.0 : (n * szt - sz * st) / denom;
    const double a = (st - b * sz) / n;
    double ss = 0.0;
    for (const Hit& h : hits) {
        const double r = h.coord[0] - (a + b * h.coord[1]);
        ss += r * r;
    }
    return std::sqrt(ss / n);
}

}  // namespace

TEST_CASE("config validation rejects bad settings") {
    GenConfig cfg;
    cfg.n_prongs_range = {0, 3};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = GenConfig{};
    cfg.cross_view_ambiguity = 1.5;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = GenConfig{};
    cfg.class_mixture = {0.5, 0.5};
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = GenConfig{};
    cfg.class_mixture = {0.5, 0.3, 0.1, 0.1, 0.1, 0.1};  // sums to 1.2
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    cfg = GenConfig{};
    cfg.n_prongs_range = {1, 9};  // exceeds p_max
    CHECK_THROWS_AS(cfg.validate(), ConfigError);
    CHECK_NOTHROW(GenConfig{}.validate());
}

TEST_CASE("generation is deterministic in event id and seed") {
    GenConfig cfg;
    cfg.seed = 123;
    Event a = generate_event(7, cfg);
    Event b = generate_event(7, cfg);
    CHECK(events_equal(a, b));
    Event c = generate_event(8, cfg);
    CHECK_FALSE(events_equal(a, c));
    GenConfig other = cfg;
    other.seed = 124;
    CHECK_FALSE(events_equal(a, generate_event(7, other)));
}

TEST_CASE("a single clean muon is a monotone forward track") {
    GenConfig cfg;
    cfg.seed = 5;
    cfg.n_prongs_range = {1, 1};
    cfg.noise_hit_rate = 0.0;
    cfg.cross_view_ambiguity = 0.0;
    cfg.class_mixture = {0.0, 1.0, 0.0, 0.0, 0.0, 0.0};
    for (uint64_t id = 0; id < 50; ++id) {
        Event e = generate_event(id, cfg);
        for (int v = 0; v < 2; ++v) {
            REQUIRE(!e.views[v].hits.empty());
            for (const Hit& h : e.views[v].hits) {
                CHECK(h.sem_label == 1);
                CHECK(h.ins_label == 0);
            }
            for (size_t k = 1; k < e.views[v].hits.size(); ++k)
                CHECK(e.views[v].hits[k].coord[1] > e.views[v].hits[k - 1].coord[1]);
        }
    }
}

TEST_CASE("generated events pass validation") {
    GenConfig cfg;
    cfg.seed = 99;
    for (uint64_t id = 0; id < 500; ++id) {
        Event e = generate_event(id, cfg);
        CHECK(validate_event(e).empty());
        CHECK(e.views[0].hits.size() + e.views[1].hits.size() > 0);
    }
}

TEST_CASE("mean hit count per event sits in the target band") {
    GenConfig cfg;
    cfg.seed = 2024;
    size_t total = 0;
    const uint64_t n = 5000;
    for (uint64_t id = 0; id < n; ++id) {
        Event e = generate_event(id, cfg);
        total += e.views[0].hits.size() + e.views[1].hits.size();
    }
    const double mean = static_cast<double>(total) / n;
    CHECK(mean >= 60.0);
    CHECK(mean <= 80.0);
}

TEST_CASE("prong class frequencies roughly follow the mixture") {
    GenConfig cfg;
    cfg.seed = 77;
    cfg.noise_hit_rate = 0.0;
    std::map<int, size_t> counts;
    size_t prongs = 0;
    for (uint64_t id = 0; id < 2000; ++id) {
        Event e = generate_event(id, cfg);
        std::map<int, int> class_of;  // instance -> class
        for (const auto& view : e.views)
            for (const Hit& h : view.hits) class_of[h.ins_label] = h.sem_label;
        for (const auto& [ins, cls] : class_of) {
            ++counts[cls];
            ++prongs;
        }
    }
    // survival differs per class, so only loose bands
    for (int c : {0, 1}) CHECK(static_cast<double>(counts[c]) / prongs > 0.18);
    for (int c = 0; c < 6; ++c) {
        CHECK(counts[c] > 0);
        CHECK(static_cast<double>(counts[c]) / prongs < 0.55);
    }
}

TEST_CASE("prongs occupy overlapping plane ranges in the two views") {
    GenConfig cfg;
    cfg.seed = 31;
    cfg.noise_hit_rate = 0.0;
    double overlap_sum = 0.0;
    size_t n_prongs = 0;
    for (uint64_t id = 0; id < 300; ++id) {
        Event e = generate_event(id, cfg);
        std::map<int, std::array<std::set<long>, 2>> planes;
        for (int v = 0; v < 2; ++v)
            for (const Hit& h : e.views[v].hits)
                planes[h.ins_label][v].insert(static_cast<long>(std::floor(h.coord[1])));
        for (const auto& [ins, per_view] : planes) {
            if (per_view[0].empty() || per_view[1].empty()) continue;
            std::vector<long> shared;
            std::set_intersection(per_view[0].begin(), per_view[0].end(), per_view[1].begin(),
                                  per_view[1].end(), std::back_inserter(shared));
            const size_t uni = per_view[0].size() + per_view[1].size() - shared.size();
            overlap_sum += static_cast<double>(shared.size()) / uni;
            ++n_prongs;
        }
    }
    REQUIRE(n_prongs > 0);
    CHECK(overlap_sum / n_prongs > 0.5);
}

TEST_CASE("noise hits are labeled other with their own instance ids") {
    GenConfig cfg;
    cfg.seed = 13;
    cfg.noise_hit_rate = 3.0;
    cfg.class_mixture = {0.5, 0.5, 0.0, 0.0, 0.0, 0.0};  // prongs never class 5
    bool saw_noise = false;
    for (uint64_t id = 0; id < 200; ++id) {
        Event e = generate_event(id, cfg);
        CHECK(validate_event(e).empty());
        std::map<int, size_t> hits_of_instance;
        for (const auto& view : e.views)
            for (const Hit& h : view.hits) ++hits_of_instance[h.ins_label];
        for (const auto& view : e.views)
            for (const Hit& h : view.hits)
                if (h.sem_label == 5) {
                    saw_noise = true;
                    CHECK(hits_of_instance[h.ins_label] == 1);
                }
        CHECK(e.n_instances() <= cfg.p_max);
    }
    CHECK(saw_noise);
}

TEST_CASE("fully ambiguous shower widths separate only in the joint view") {
    GenConfig cfg;
    cfg.seed = 404;
    cfg.n_prongs_range = {1, 1};
    cfg.noise_hit_rate = 0.0;
    cfg.cross_view_ambiguity = 1.0;
    cfg.class_mixture = {0.5, 0.0, 0.0, 0.0, 0.5, 0.0};  // electron vs photon only

    struct Sample {
        double w0, w1;
        int cls;
    };
    std::vector<Sample> samples;
    for (uint64_t id = 0; samples.size() < 1200 && id < 4000; ++id) {
        Event e = generate_event(id, cfg);
        if (e.views[0].hits.size() < 5 || e.views[1].hits.size() < 5) continue;
        samples.push_back({line_residual_rms(e.views[0].hits), line_residual_rms(e.views[1].hits),
                           e.views[0].hits[0].sem_label});
    }
    REQUIRE(samples.size() >= 1000);

    const size_t half = samples.size() / 2;
    auto centroid_accuracy = [&](auto feature_of) {
        // nearest-centroid classifier fit on the first half, scored on the rest
        std::array<std::vector<double>, 2> sums = {};
        std::array<size_t, 2> counts = {0, 0};
        for (size_t i = 0; i < half; ++i) {
            auto f = feature_of(samples[i]);
            const int y = samples[i].cls == 0 ? 0 : 1;
            if (sums[y].empty()) sums[y].assign(f.size(), 0.0);
            for (size_t d = 0; d < f.size(); ++d) sums[y][d] += f[d];
            ++counts[y];
        }
        size_t correct = 0;
        for (size_t i = half; i < samples.size(); ++i) {
            auto f = feature_of(samples[i]);
            double dist[2] = {0.0, 0.0};
            for (int y = 0; y < 2; ++y)
                for (size_t d = 0; d < f.size(); ++d) {
                    const double diff = f[d] - sums[y][d] / counts[y];
                    dist[y] += diff * diff;
                }
            const int pred = dist[0] <= dist[1] ? 0 : 1;
            if (pred == (samples[i].cls == 0 ? 0 : 1)) ++correct;
        }
        return static_cast<double>(correct) / (samples.size() - half);
    };

    const double marginal = centroid_accuracy(
        [](const Sample& s) { return std::vector<double>{s.w0}; });
    // the joint statistic needs both views: normalized width asymmetry
    const double joint = centroid_accuracy([](const Sample& s) {
        return std::vector<double>{std::abs(s.w0 - s.w1) / (s.w0 + s.w1)};
    });
    CHECK(marginal < 0.62);  // single view carries ~no signal
    CHECK(joint > 0.8);      // both views together resolve the pair
    CHECK(joint - marginal >= 0.10);
}

TEST_CASE("fully ambiguous value shifts separate only in the joint view") {
    GenConfig cfg;
    cfg.seed = 405;
    cfg.n_prongs_range = {1, 1};
    cfg.noise_hit_rate = 0.0;
    cfg.cross_view_ambiguity = 1.0;
    cfg.class_mixture = {0.5, 0.0, 0.0, 0.0, 0.5, 0.0};  // electron vs photon only

    struct Sample {
        double m0, m1;  // mean log hit value per view
        int cls;
    };
    std::vector<Sample> samples;
    for (uint64_t id = 0; samples.size() < 1200 && id < 4000; ++id) {
        Event e = generate_event(id, cfg);
        if (e.views[0].hits.size() < 5 || e.views[1].hits.size() < 5) continue;
        Sample s{0.0, 0.0, e.views[0].hits[0].sem_label};
        for (int v = 0; v < 2; ++v) {
            double& m = v == 0 ? s.m0 : s.m1;
            for (const Hit& h : e.views[v].hits) m += std::log(h.value);
            m /= e.views[v].hits.size();
        }
        samples.push_back(s);
    }
    REQUIRE(samples.size() >= 1000);

    // threshold-free oracles: per-view mean log value vs cross-view disagreement
    const size_t half = samples.size() / 2;
    auto accuracy = [&](auto feature_of) {
        std::array<double, 2> sum = {0.0, 0.0};
        std::array<size_t, 2> cnt = {0, 0};
        for (size_t i = 0; i < half; ++i) {
            const int y = samples[i].cls == 0 ? 0 : 1;
            sum[y] += feature_of(samples[i]);
            ++cnt[y];
        }
        const double c0 = sum[0] / cnt[0], c1 = sum[1] / cnt[1];
        size_t correct = 0;
        for (size_t i = half; i < samples.size(); ++i) {
            const double f = feature_of(samples[i]);
            const int pred = std::abs(f - c0) <= std::abs(f - c1) ? 0 : 1;
            if (pred == (samples[i].cls == 0 ? 0 : 1)) ++correct;
        }
        return static_cast<double>(correct) / (samples.size() - half);
    };

    const double marginal = accuracy([](const Sample& s) { return s.m0; });
    const double joint = accuracy([](const Sample& s) { return std::abs(s.m0 - s.m1); });
    CHECK(marginal < 0.62);
    CHECK(joint > 0.9);  // the cross-view value comparison is nearly clean
    CHECK(joint - marginal >= 0.25);
}

TEST_CASE("generate_dataset writes a deterministic readable file") {
    GenConfig cfg;
    cfg.seed = 55;
    const std::string p1 = "synth_ds1.tmp", p2 = "synth_ds2.tmp";
    DatasetHeader h = generate_dataset(20, cfg, p1);
    CHECK(h.n_events == 20);
    generate_dataset(20, cfg, p2);
    std::ifstream a(p1), b(p2);
    std::stringstream sa, sb;
    sa << a.rdbuf();
    sb << b.rdbuf();
    CHECK(sa.str() == sb.str());
    Dataset ds = read_events(p1);
    CHECK(ds.events.size() == 20);
    CHECK(ds.header.p_max == 8);
    for (size_t i = 0; i < 20; ++i) CHECK(ds.events[i].event_id == i);
    std::remove(p1.c_str());
    std::remove(p2.c_str());
}
