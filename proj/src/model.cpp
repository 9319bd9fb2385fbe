#include "hpst/model.hpp"

#include <cmath>
#include <random>

#include "hpst/errors.hpp"

namespace hpst {

void HyperParams::validate() const {
    if (n < 1 || m < 1) throw ConfigError("n and m must be >= 1");
    if (base_dim < 2 || base_dim % 2 != 0) throw ConfigError("base_dim must be even and >= 2");
    if (k_nn < 1) throw ConfigError("k_nn must be >= 1");
    if (base_voxel_size <= 0) throw ConfigError("base_voxel_size must be > 0");
    if (n_classes < 2) throw ConfigError("n_classes must be >= 2");
    if (instance_slots < 1) throw ConfigError("instance_slots must be >= 1");
}

int attention_heads(size_t d) { return d % 4 == 0 ? 4 : (d % 2 == 0 ? 2 : 1); }

namespace {

void add_linear(ModelWeights& w, const std::string& prefix, size_t din, size_t dout) {
    w[prefix + "/w"] = diff::Tensor({din, dout});
    w[prefix + "/b"] = diff::Tensor({dout});
}

void add_layer_norm(ModelWeights& w, const std::string& prefix, size_t d) {
    diff::Tensor gain({d});
    for (size_t i = 0; i < d; ++i) gain[i] = 1.0;
    w[prefix + "/g"] = std::move(gain);
    w[prefix + "/s"] = diff::Tensor({d});
}

void add_block(ModelWeights& w, const std::string& prefix, size_t d, bool use_inter) {
    add_layer_norm(w, prefix + "/ln1", d);
    for (const char* role : {"q", "k", "v", "out"})
        add_linear(w, prefix + "/intra/" + role, d, d);
    add_linear(w, prefix + "/intra/rpe/l1", 2, d);
    add_linear(w, prefix + "/intra/rpe/l2", d, attention_heads(d));
    add_linear(w, prefix + "/intra/rpe/l3", d, d);
    if (use_inter) {
        for (const char* pair : {"inter01", "inter10"})
            for (const char* role : {"q", "k", "v", "out"})
                add_linear(w, prefix + "/" + pair + "/" + role, d, d);
    }
    add_layer_norm(w, prefix + "/ln2", d);
    add_linear(w, prefix + "/mlp/l1", d, 2 * d);
    add_linear(w, prefix + "/mlp/l2", 2 * d, d);
}

}  // namespace

ModelWeights init_weights(const HyperParams& hyper, uint64_t seed) {
    hyper.validate();
    ModelWeights w;
    add_linear(w, "embed", 3, hyper.base_dim);
    for (int s = 0; s < hyper.n; ++s) {
        const size_t d = hyper.stage_dim(s);
        for (int b = 0; b < hyper.m; ++b)
            add_block(w, "enc" + std::to_string(s) + "/blk" + std::to_string(b), d,
                      hyper.use_inter);
        add_linear(w, "enc" + std::to_string(s) + "/pool_proj", d, 2 * d);
    }
    for (int t = 0; t < hyper.n; ++t) {
        const size_t d_in = hyper.stage_dim(hyper.n - t);
        const size_t d_out = hyper.stage_dim(hyper.n - 1 - t);
        add_linear(w, "dec" + std::to_string(t) + "/unpool_proj", d_in + d_out, d_out);
        for (int b = 0; b < hyper.m; ++b)
            add_block(w, "dec" + std::to_string(t) + "/blk" + std::to_string(b), d_out,
                      hyper.use_inter);
    }
    add_linear(w, "sem_head", hyper.base_dim, hyper.n_classes);
    add_linear(w, "ins_head", hyper.base_dim, hyper.instance_slots);

    // Xavier-uniform fill in sorted path order so init is seed-deterministic.
    std::mt19937_64 rng(seed);
    for (auto& [path, tensor] : w) {
        if (path.size() >= 2 && path.substr(path.size() - 2) == "/w") {
            const double bound = std::sqrt(6.0 / static_cast<double>(tensor.shape()[0] +
                                                                     tensor.shape()[1]));
            std::uniform_real_distribution<double> dist(-bound, bound);
            for (size_t i = 0; i < tensor.size(); ++i) tensor[i] = dist(rng);
        }
    }
    return w;
}

size_t parameter_count(const ModelWeights& weights) {
    size_t n = 0;
    for (const auto& [path, tensor] : weights) n += tensor.size();
    return n;
}

int ParamNodes::get(const std::string& path) const {
    auto it = ids.find(path);
    if (it == ids.end()) throw ConfigMismatch("missing parameter " + path);
    return it->second;
}

ParamNodes load_params(diff::Tape& tape, const ModelWeights& weights) {
    ParamNodes nodes;
    for (const auto& [path, tensor] : weights) nodes.ids[path] = tape.input(tensor);
    return nodes;
}

namespace {

struct FlatEdges {
    std::vector<int> src, dst;
    std::vector<double> dst_mask;  // 1 where the destination point has neighbors
};

FlatEdges flatten(const EdgeSet& edges) {
    FlatEdges f;
    f.dst_mask.assign(edges.neighbors.size(), 0.0);
    for (size_t k = 0; k < edges.neighbors.size(); ++k)
        for (int s : edges.neighbors[k]) {
            f.src.push_back(s);
            f.dst.push_back(static_cast<int>(k));
            f.dst_mask[k] = 1.0;
        }
    return f;
}

// Multi-head attention over an edge list. Heads are column slices; the
// row-major reshape [E, d] -> [E*H, d/H] turns them into per-(edge, head)
// rows so one segment softmax with segment ids dst*H + head handles all
// heads at once. `rpe_node` carries per-(edge, head) logit biases, flattened
// edge-major; `rpe_val_node` carries per-edge value biases over all d columns.
int attention_core(diff::Tape& tape, int q_feats, int kv_feats, const FlatEdges& edges,
                   const ParamNodes& params, const std::string& prefix, int rpe_node,
                   int rpe_val_node = -1) {
    const size_t d = tape.value(q_feats).cols();
    const size_t n_dst = tape.value(q_feats).rows();
    const size_t heads = static_cast<size_t>(attention_heads(d));
    const size_t dh = d / heads;
    const size_t n_edges = edges.src.size();
    int q = tape.linear(q_feats, params.get(prefix + "/q/w"), params.get(prefix + "/q/b"));
    int k = tape.linear(kv_feats, params.get(prefix + "/k/w"), params.get(prefix + "/k/b"));
    int v = tape.linear(kv_feats, params.get(prefix + "/v/w"), params.get(prefix + "/v/b"));
    int qe = tape.gather_rows(q, edges.dst);
    int ke = tape.gather_rows(k, edges.src);
    int ve = tape.gather_rows(v, edges.src);
    if (rpe_val_node >= 0) ve = tape.add(ve, rpe_val_node);
    int qh = tape.reshape(qe, {n_edges * heads, dh});
    int kh = tape.reshape(ke, {n_edges * heads, dh});
    int vh = tape.reshape(ve, {n_edges * heads, dh});
    int logits = tape.scale(tape.row_dot(qh, kh), 1.0 / std::sqrt(static_cast<double>(dh)));
    if (rpe_node >= 0) logits = tape.add(logits, rpe_node);
    std::vector<int> seg(n_edges * heads);
    for (size_t e = 0; e < n_edges; ++e)
        for (size_t h = 0; h < heads; ++h)
            seg[e * heads + h] = edges.dst[e] * static_cast<int>(heads) + static_cast<int>(h);
    const int n_segments = static_cast<int>(n_dst * heads);
    int alpha = tape.segment_softmax(logits, seg, n_segments);
    int summed = tape.segment_sum(tape.mul_rows(vh, alpha), seg, n_segments);
    int merged = tape.reshape(summed, {n_dst, d});
    int out = tape.linear(merged, params.get(prefix + "/out/w"), params.get(prefix + "/out/b"));
    return tape.scale_rows(out, edges.dst_mask);
}

}  // namespace

int intra_attention(diff::Tape& tape, int features, const std::vector<Coord>& coords,
                    const EdgeSet& edges, const ParamNodes& params, const std::string& prefix) {
    FlatEdges f = flatten(edges);
    diff::Tensor diffs({f.src.size(), 2});
    for (size_t e = 0; e < f.src.size(); ++e) {
        diffs.at(e, 0) = coords[f.dst[e]][0] - coords[f.src[e]][0];
        diffs.at(e, 1) = coords[f.dst[e]][1] - coords[f.src[e]][1];
    }
    int din = tape.input(std::move(diffs));
    int h = tape.relu(tape.linear(din, params.get(prefix + "/rpe/l1/w"),
                                  params.get(prefix + "/rpe/l1/b")));
    const size_t heads = static_cast<size_t>(attention_heads(tape.value(features).cols()));
    int r = tape.linear(h, params.get(prefix + "/rpe/l2/w"), params.get(prefix + "/rpe/l2/b"));
    int rpe = tape.reshape(r, {f.src.size() * heads});
    // Positional term on the values as well: aggregated MLP(delta) lets a block
    // measure the geometry of its neighborhood (e.g. local spread), which the
    // content-only weighted mean cannot express.
    int rv = tape.linear(h, params.get(prefix + "/rpe/l3/w"), params.get(prefix + "/rpe/l3/b"));
    return attention_core(tape, features, features, f, params, prefix, rpe, rv);
}

int inter_attention(diff::Tape& tape, int dst_features, int src_features, const EdgeSet& edges,
                    const ParamNodes& params, const std::string& prefix) {
    FlatEdges f = flatten(edges);
    return attention_core(tape, dst_features, src_features, f, params, prefix, -1);
}

StageEdges build_stage_edges(const std::array<std::vector<Coord>, 2>& coords, int k_nn) {
    StageEdges e;
    for (int j = 0; j < 2; ++j) {
        e.intra[j] = knn_intra(coords[j], k_nn);
        e.inter_into[j] = knn_inter(coords[1 - j], coords[j], 1 - j, j, k_nn);
    }
    return e;
}

std::array<int, 2> block_forward(diff::Tape& tape, const std::array<int, 2>& features,
                                 const std::array<std::vector<Coord>, 2>& coords,
                                 const StageEdges& edges, const ParamNodes& params,
                                 const std::string& block_prefix, bool use_inter) {
    std::array<int, 2> normed;
    for (int j = 0; j < 2; ++j)
        normed[j] = tape.layer_norm(features[j], params.get(block_prefix + "/ln1/g"),
                                    params.get(block_prefix + "/ln1/s"));
    std::array<int, 2> h;
    for (int j = 0; j < 2; ++j) {
        int a = intra_attention(tape, normed[j], coords[j], edges.intra[j], params,
                                block_prefix + "/intra");
        h[j] = tape.add(features[j], a);
        if (use_inter) {
            const std::string pair = j == 0 ? "/inter10" : "/inter01";
            int i = inter_attention(tape, normed[j], normed[1 - j], edges.inter_into[j], params,
                                    block_prefix + pair);
            h[j] = tape.add(h[j], i);
        }
    }
    for (int j = 0; j < 2; ++j) {
        int hn = tape.layer_norm(h[j], params.get(block_prefix + "/ln2/g"),
                                 params.get(block_prefix + "/ln2/s"));
        int m1 = tape.relu(tape.linear(hn, params.get(block_prefix + "/mlp/l1/w"),
                                       params.get(block_prefix + "/mlp/l1/b")));
        int m2 = tape.linear(m1, params.get(block_prefix + "/mlp/l2/w"),
                             params.get(block_prefix + "/mlp/l2/b"));
        h[j] = tape.add(h[j], m2);
    }
    return h;
}

std::pair<int, PoolRecord> voxel_pool(diff::Tape& tape, int features,
                                      const std::vector<Coord>& coords, double voxel_size) {
    PoolRecord rec;
    rec.assignment = voxel_assign(coords, voxel_size);
    rec.pre_coords = coords;
    rec.skip_features = features;
    const int n_groups = static_cast<int>(rec.assignment.groups.size());
    int sums = tape.segment_sum(features, rec.assignment.group_of, n_groups);
    std::vector<double> inv_count(n_groups);
    for (int g = 0; g < n_groups; ++g)
        inv_count[g] = 1.0 / static_cast<double>(rec.assignment.groups[g].size());
    int pooled = tape.scale_rows(sums, inv_count);
    return {pooled, rec};
}

int unpool(diff::Tape& tape, int pooled_features, const PoolRecord& record) {
    if (tape.value(pooled_features).rows() != record.assignment.groups.size())
        throw RecordMismatch("pooled rows vs group count");
    if (tape.value(record.skip_features).rows() != record.pre_coords.size())
        throw RecordMismatch("skip snapshot vs pre-pool point count");
    int up = tape.gather_rows(pooled_features, record.assignment.group_of);
    return tape.concat_cols(up, record.skip_features);
}

ForwardOut forward(diff::Tape& tape, const Event& event, const ParamNodes& params,
                   const HyperParams& hyper) {
    hyper.validate();
    std::array<int, 2> feats;
    std::array<std::vector<Coord>, 2> coords;
    for (int j = 0; j < 2; ++j) {
        const auto& hits = event.views[j].hits;
        diff::Tensor x({hits.size(), 3});
        coords[j].resize(hits.size());
        for (size_t k = 0; k < hits.size(); ++k) {
            x.at(k, 0) = hits[k].coord[0] / kTransverseCells;
            x.at(k, 1) = hits[k].coord[1] / kPlanes;
            x.at(k, 2) = std::log1p(hits[k].value);
            coords[j][k] = hits[k].coord;
        }
        feats[j] = tape.linear(tape.input(std::move(x)), params.get("embed/w"),
                               params.get("embed/b"));
    }

    struct StageRecord {
        std::array<PoolRecord, 2> pool;
        std::array<std::vector<Coord>, 2> coords;
        StageEdges edges;
    };
    std::vector<StageRecord> records;

    for (int s = 0; s < hyper.n; ++s) {
        StageEdges edges = build_stage_edges(coords, hyper.k_nn);
        const std::string stage = "enc" + std::to_string(s);
        for (int b = 0; b < hyper.m; ++b)
            feats = block_forward(tape, feats, coords, edges, params,
                                  stage + "/blk" + std::to_string(b), hyper.use_inter);
        StageRecord rec;
        rec.coords = coords;
        rec.edges = std::move(edges);
        const double voxel = hyper.base_voxel_size * std::pow(2.0, s);
        for (int j = 0; j < 2; ++j) {
            auto [pooled, pr] = voxel_pool(tape, feats[j], coords[j], voxel);
            feats[j] = tape.linear(pooled, params.get(stage + "/pool_proj/w"),
                                   params.get(stage + "/pool_proj/b"));
            coords[j] = pr.assignment.barycenters;
            rec.pool[j] = std::move(pr);
        }
        records.push_back(std::move(rec));
    }

    for (int t = 0; t < hyper.n; ++t) {
        const StageRecord& rec = records[hyper.n - 1 - t];
        const std::string stage = "dec" + std::to_string(t);
        for (int j = 0; j < 2; ++j) {
            int cat = unpool(tape, feats[j], rec.pool[j]);
            feats[j] = tape.linear(cat, params.get(stage + "/unpool_proj/w"),
                                   params.get(stage + "/unpool_proj/b"));
        }
        coords = rec.coords;
        for (int b = 0; b < hyper.m; ++b)
            feats = block_forward(tape, feats, coords, rec.edges, params,
                                  stage + "/blk" + std::to_string(b), hyper.use_inter);
    }

    ForwardOut out;
    for (int j = 0; j < 2; ++j) {
        out.sem_logits[j] = tape.linear(feats[j], params.get("sem_head/w"),
                                        params.get("sem_head/b"));
        out.ins_logits[j] = tape.linear(feats[j], params.get("ins_head/w"),
                                        params.get("ins_head/b"));
    }
    return out;
}

}  // namespace hpst
