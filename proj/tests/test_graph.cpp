#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>
#include <tuple>

#include "hpst/graph.hpp"

using namespace hpst;

namespace {

std::vector<Coord> random_coords(std::mt19937_64& rng, size_t n) {
    std::uniform_real_distribution<double> ux(0.0, 80.0), uz(0.0, 100.0);
    std::vector<Coord> out(n);
    for (auto& c : out) c = {ux(rng), uz(rng)};
    return out;
}

// exhaustive O(n^2) intra-view oracle with the same tie rule
std::vector<std::vector<int>> brute_intra(const std::vector<Coord>& coords, int k_nn) {
    std::vector<std::vector<int>> out(coords.size());
    for (size_t k = 0; k < coords.size(); ++k) {
        std::vector<std::pair<double, int>> cand;
        for (size_t j = 0; j < coords.size(); ++j) {
            if (j == k) continue;
            double dx = coords[j][0] - coords[k][0], dz = coords[j][1] - coords[k][1];
            cand.emplace_back(dx * dx + dz * dz, static_cast<int>(j));
        }
        std::sort(cand.begin(), cand.end());
        for (size_t i = 0; i < cand.size() && i < static_cast<size_t>(k_nn); ++i)
            out[k].push_back(cand[i].second);
    }
    return out;
}

}  // namespace

TEST_CASE("knn_intra single point has no neighbors") {
    EdgeSet es = knn_intra({{1.0, 2.0}}, 4);
    REQUIRE(es.neighbors.size() == 1);
    CHECK(es.neighbors[0].empty());
}

TEST_CASE("knn_intra two points are mutual neighbors") {
    EdgeSet es = knn_intra({{1.0, 2.0}, {5.0, 9.0}}, 4);
    REQUIRE(es.neighbors.size() == 2);
    CHECK(es.neighbors[0] == std::vector<int>{1});
    CHECK(es.neighbors[1] == std::vector<int>{0});
}

TEST_CASE("knn_intra matches the brute-force oracle") {
    std::mt19937_64 rng(11);
    auto coords = random_coords(rng, 50);
    EdgeSet es = knn_intra(coords, 8);
    CHECK(es.neighbors == brute_intra(coords, 8));
}

TEST_CASE("knn_intra empty input") {
    CHECK(knn_intra({}, 4).neighbors.empty());
}

TEST_CASE("knn_inter with empty source yields empty lists") {
    EdgeSet es = knn_inter({}, {{1.0, 2.0}, {3.0, 4.0}}, 1, 0, 4);
    REQUIRE(es.neighbors.size() == 2);
    CHECK(es.neighbors[0].empty());
    CHECK(es.neighbors[1].empty());
}

TEST_CASE("knn_inter single source hit neighbors every destination") {
    EdgeSet es = knn_inter({{40.0, 5.0}}, {{10.0, 4.0}, {70.0, 90.0}}, 1, 0, 4);
    REQUIRE(es.neighbors.size() == 2);
    CHECK(es.neighbors[0] == std::vector<int>{0});
    CHECK(es.neighbors[1] == std::vector<int>{0});
}

TEST_CASE("knn_inter matches brute force with the documented tie rule") {
    std::mt19937_64 rng(13);
    auto src = random_coords(rng, 37);
    auto dst = random_coords(rng, 41);
    EdgeSet es = knn_inter(src, dst, 0, 1, 4);
    for (size_t k = 0; k < dst.size(); ++k) {
        std::vector<std::tuple<double, double, int>> cand;
        for (size_t j = 0; j < src.size(); ++j)
            cand.emplace_back(std::abs(src[j][1] - dst[k][1]), std::abs(src[j][0] - dst[k][0]),
                              static_cast<int>(j));
        std::sort(cand.begin(), cand.end());
        std::vector<int> expect;
        for (size_t i = 0; i < 4; ++i) expect.push_back(std::get<2>(cand[i]));
        CHECK(es.neighbors[k] == expect);
    }
}

TEST_CASE("knn_intra is invariant under translation") {
    std::mt19937_64 rng(17);
    auto coords = random_coords(rng, 30);
    auto shifted = coords;
    for (auto& c : shifted) {
        c[0] += 13.75;
        c[1] -= 4.5;
    }
    CHECK(knn_intra(coords, 6).neighbors == knn_intra(shifted, 6).neighbors);
}

TEST_CASE("knn_intra permutation invariance up to the tie rule") {
    std::mt19937_64 rng(19);
    auto coords = random_coords(rng, 24);
    std::vector<int> perm(coords.size());
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<Coord> permuted(coords.size());
    for (size_t i = 0; i < coords.size(); ++i) permuted[perm[i]] = coords[i];
    EdgeSet orig = knn_intra(coords, 5);
    EdgeSet shuf = knn_intra(permuted, 5);
    for (size_t i = 0; i < coords.size(); ++i) {
        std::set<int> a(orig.neighbors[i].begin(), orig.neighbors[i].end());
        std::set<int> b;
        for (int j : shuf.neighbors[perm[i]]) {
            // map back through the permutation
            int back = static_cast<int>(std::find(perm.begin(), perm.end(), j) - perm.begin());
            b.insert(back);
        }
        CHECK(a == b);  // random continuous coords: ties have measure zero
    }
}

TEST_CASE("voxel_assign groups all points in one voxel") {
    std::vector<Coord> coords = {{1.0, 1.0}, {1.5, 0.5}, {0.25, 1.75}};
    VoxelAssignment va = voxel_assign(coords, 2.0);
    REQUIRE(va.groups.size() == 1);
    CHECK(va.groups[0] == std::vector<int>{0, 1, 2});
    CHECK(va.barycenters[0][0] == doctest::Approx((1.0 + 1.5 + 0.25) / 3.0));
    CHECK(va.barycenters[0][1] == doctest::Approx((1.0 + 0.5 + 1.75) / 3.0));
}

TEST_CASE("voxel boundary points go to the higher cell") {
    VoxelAssignment va = voxel_assign({{2.0, 0.0}, {1.999, 0.0}}, 2.0);
    REQUIRE(va.groups.size() == 2);
    CHECK(va.group_of[0] != va.group_of[1]);
}

TEST_CASE("voxel_assign matches independent floor division on random points") {
    std::mt19937_64 rng(23);
    auto coords = random_coords(rng, 100);
    VoxelAssignment va = voxel_assign(coords, 2.0);
    // partition property
    std::set<int> seen;
    size_t total = 0;
    for (size_t g = 0; g < va.groups.size(); ++g) {
        total += va.groups[g].size();
        for (int i : va.groups[g]) {
            CHECK(seen.insert(i).second);
            CHECK(va.group_of[i] == static_cast<int>(g));
        }
    }
    CHECK(total == coords.size());
    // same-cell relation matches floor division
    auto cell = [&](int i) {
        return std::pair<long, long>(static_cast<long>(std::floor(coords[i][0] / 2.0)),
                                     static_cast<long>(std::floor(coords[i][1] / 2.0)));
    };
    for (int i = 0; i < 100; ++i)
        for (int j = 0; j < 100; ++j)
            CHECK((va.group_of[i] == va.group_of[j]) == (cell(i) == cell(j)));
    // barycenters inside closed voxel bounds
    for (size_t g = 0; g < va.groups.size(); ++g) {
        auto [cx, cz] = cell(va.groups[g][0]);
        CHECK(va.barycenters[g][0] >= cx * 2.0);
        CHECK(va.barycenters[g][0] <= (cx + 1) * 2.0);
        CHECK(va.barycenters[g][1] >= cz * 2.0);
        CHECK(va.barycenters[g][1] <= (cz + 1) * 2.0);
    }
}
