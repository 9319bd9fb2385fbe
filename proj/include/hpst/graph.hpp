#pragma once

#include <array>
#include <cstddef>
#include <vector>

namespace hpst {

using Coord = std::array<double, 2>;  // (transverse, plane)

// Directed neighbor lists for one (source view -> destination view) pair.
// neighbors[k] lists source point indices attending into destination point k,
// nearest first.
struct EdgeSet {
    int src_view = 0;
    int dst_view = 0;
    int k_nn = 0;
    std::vector<std::vector<int>> neighbors;

    size_t n_edges() const {
        size_t n = 0;
        for (const auto& nb : neighbors) n += nb.size();
        return n;
    }
};

struct VoxelAssignment {
    double voxel_size = 1.0;
    std::vector<std::vector<int>> groups;  // ascending member indices per cell
    std::vector<Coord> barycenters;        // unweighted mean coordinate per group
    std::vector<int> group_of;             // point index -> group index
};

// k nearest points within one view by Euclidean distance; self excluded.
// Ties broken by lower point index.
EdgeSet knn_intra(const std::vector<Coord>& coords, int k_nn);

// k nearest source-view points per destination point under the inter-view
// distance |plane - plane'|; ties broken by smaller |transverse delta|, then
// by lower source index.
EdgeSet knn_inter(const std::vector<Coord>& src_coords, const std::vector<Coord>& dst_coords,
                  int src_view, int dst_view, int k_nn);

// Partition points into floor(coord / voxel_size) cells; cells ordered
// lexicographically, members ascending.
VoxelAssignment voxel_assign(const std::vector<Coord>& coords, double voxel_size);

}  // namespace hpst
