#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hpst/event.hpp"
#include "hpst/graph.hpp"
#include "hpst/tensor.hpp"

namespace hpst {

struct HyperParams {
    int n = 2;               // half-depth; the UNet has 2n stages
    int m = 1;               // blocks per stage
    int base_dim = 32;
    int k_nn = 8;
    double base_voxel_size = 2.0;  // doubled per pooling step
    int n_classes = kDefaultClasses;
    int instance_slots = kDefaultInstanceSlots;
    bool use_inter = true;   // inter-view attention ablation switch

    void validate() const;  // throws ConfigError
    int stage_dim(int s) const { return base_dim << s; }
};

// Parameter tensors keyed by stage/block/role path, e.g. "enc0/blk0/intra/q/w".
using ModelWeights = std::map<std::string, diff::Tensor>;

ModelWeights init_weights(const HyperParams& hyper, uint64_t seed);
size_t parameter_count(const ModelWeights& weights);

// Tape node per parameter path; one per forward tape.
struct ParamNodes {
    std::map<std::string, int> ids;
    int get(const std::string& path) const;  // throws ConfigMismatch if missing
};
ParamNodes load_params(diff::Tape& tape, const ModelWeights& weights);

// Attention head count for a feature width (4 when divisible, else 2, else 1).
int attention_heads(size_t d);

// Intra-view attention: multi-head scaled dot-product logits plus a relative-
// position term from a 2 -> d MLP (per-head logit bias and per-channel value
// bias) on coordinate differences; destination points with no neighbors
// output exactly zero.
int intra_attention(diff::Tape& tape, int features, const std::vector<Coord>& coords,
                    const EdgeSet& edges, const ParamNodes& params, const std::string& prefix);

// Inter-view attention: queries from the destination view, keys/values from
// the source view under the ordered-pair projections; no positional term.
int inter_attention(diff::Tape& tape, int dst_features, int src_features, const EdgeSet& edges,
                    const ParamNodes& params, const std::string& prefix);

struct StageEdges {
    std::array<EdgeSet, 2> intra;
    std::array<EdgeSet, 2> inter_into;  // inter_into[j]: edges (1-j) -> j
};
StageEdges build_stage_edges(const std::array<std::vector<Coord>, 2>& coords, int k_nn);

// Pre-norm residual block with parallel intra/inter attention paths followed
// by a residual MLP.
std::array<int, 2> block_forward(diff::Tape& tape, const std::array<int, 2>& features,
                                 const std::array<std::vector<Coord>, 2>& coords,
                                 const StageEdges& edges, const ParamNodes& params,
                                 const std::string& block_prefix, bool use_inter);

struct PoolRecord {
    VoxelAssignment assignment;
    std::vector<Coord> pre_coords;
    int skip_features = -1;  // tape node snapshot at pre-pool resolution
};

// Mean-pool features over voxel groups; pooled coordinates are barycenters.
std::pair<int, PoolRecord> voxel_pool(diff::Tape& tape, int features,
                                      const std::vector<Coord>& coords, double voxel_size);

// Broadcast each voxel's pooled feature back to its member points and concat
// the recorded skip snapshot. The caller applies the width projection.
int unpool(diff::Tape& tape, int pooled_features, const PoolRecord& record);

struct ForwardOut {
    std::array<int, 2> sem_logits;  // tape nodes, [K_j, C]
    std::array<int, 2> ins_logits;  // tape nodes, [K_j, S]
};

ForwardOut forward(diff::Tape& tape, const Event& event, const ParamNodes& params,
                   const HyperParams& hyper);

}  // namespace hpst
