#include "hpst/graph.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>

namespace hpst {

EdgeSet knn_intra(const std::vector<Coord>& coords, int k_nn) {
    EdgeSet es;
    es.k_nn = k_nn;
    const int n = static_cast<int>(coords.size());
    es.neighbors.resize(n);
    std::vector<std::pair<double, int>> cand;
    for (int k = 0; k < n; ++k) {
        cand.clear();
        for (int j = 0; j < n; ++j) {
            if (j == k) continue;
            double dx = coords[j][0] - coords[k][0];
            double dz = coords[j][1] - coords[k][1];
            cand.emplace_back(dx * dx + dz * dz, j);
        }
        int take = std::min<int>(k_nn, static_cast<int>(cand.size()));
        std::partial_sort(cand.begin(), cand.begin() + take, cand.end());
        es.neighbors[k].reserve(take);
        for (int i = 0; i < take; ++i) es.neighbors[k].push_back(cand[i].second);
    }
    return es;
}

EdgeSet knn_inter(const std::vector<Coord>& src_coords, const std::vector<Coord>& dst_coords,
                  int src_view, int dst_view, int k_nn) {
    EdgeSet es;
    es.src_view = src_view;
    es.dst_view = dst_view;
    es.k_nn = k_nn;
    const int n_dst = static_cast<int>(dst_coords.size());
    const int n_src = static_cast<int>(src_coords.size());
    es.neighbors.resize(n_dst);
    std::vector<std::tuple<double, double, int>> cand;
    for (int k = 0; k < n_dst; ++k) {
        cand.clear();
        for (int j = 0; j < n_src; ++j) {
            double dplane = std::abs(src_coords[j][1] - dst_coords[k][1]);
            double dtrans = std::abs(src_coords[j][0] - dst_coords[k][0]);
            cand.emplace_back(dplane, dtrans, j);
        }
        int take = std::min<int>(k_nn, n_src);
        std::partial_sort(cand.begin(), cand.begin() + take, cand.end());
        es.neighbors[k].reserve(take);
        for (int i = 0; i < take; ++i) es.neighbors[k].push_back(std::get<2>(cand[i]));
    }
    return es;
}

VoxelAssignment voxel_assign(const std::vector<Coord>& coords, double voxel_size) {
    VoxelAssignment va;
    va.voxel_size = voxel_size;
    std::map<std::pair<int64_t, int64_t>, std::vector<int>> cells;
    for (int i = 0; i < static_cast<int>(coords.size()); ++i) {
        int64_t cx = static_cast<int64_t>(std::floor(coords[i][0] / voxel_size));
        int64_t cz = static_cast<int64_t>(std::floor(coords[i][1] / voxel_size));
        cells[{cx, cz}].push_back(i);
    }
    va.group_of.assign(coords.size(), -1);
    for (auto& [cell, members] : cells) {
        int g = static_cast<int>(va.groups.size());
        Coord bc = {0.0, 0.0};
        for (int i : members) {
            bc[0] += coords[i][0];
            bc[1] += coords[i][1];
            va.group_of[i] = g;
        }
        bc[0] /= static_cast<double>(members.size());
        bc[1] /= static_cast<double>(members.size());
        va.groups.push_back(std::move(members));
        va.barycenters.push_back(bc);
    }
    return va;
}

}  // namespace hpst
