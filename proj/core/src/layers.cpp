#include "gclab/layers.hpp"

#include <algorithm>
#include <cmath>

namespace gclab {

using ad::Matrix;
using ad::Tape;
using ad::Tensor;

GraphBatch GraphBatch::from_graphs(std::span<const Graph* const> graphs) {
    GraphBatch b;
    b.graph = disjoint_union(graphs);
    b.offsets.reserve(graphs.size() + 1);
    for (const Graph* g : graphs) b.offsets.push_back(b.offsets.back() + g->num_nodes());
    return b;
}

GraphBatch GraphBatch::single(const Graph& g) {
    const Graph* one[] = {&g};
    return from_graphs(one);
}

Linear Linear::init(std::size_t in, std::size_t out, Rng& rng) {
    return {Tensor::parameter(ad::glorot_uniform(in, out, rng)), Tensor::parameter(Matrix(1, out))};
}

Tensor Linear::forward(Tape& t, const Tensor& x) const {
    return ad::add_bias(t, ad::matmul(t, x, weight), bias);
}

GinParams GinParams::init(std::size_t in, std::size_t out, Rng& rng) {
    GinParams p;
    p.first = Linear::init(in, out, rng);
    p.second = Linear::init(out, out, rng);
    return p;
}

Gatv2Params Gatv2Params::init(std::size_t in, std::size_t out, Rng& rng) {
    Gatv2Params p;
    p.w_left = Tensor::parameter(ad::glorot_uniform(in, out, rng));
    p.w_right = Tensor::parameter(ad::glorot_uniform(in, out, rng));
    p.attention = Tensor::parameter(ad::glorot_uniform(out, 1, rng));
    return p;
}

SagPoolParams SagPoolParams::init(std::size_t in, double ratio, Rng& rng) {
    return {GcnParams::init(in, 1, rng), ratio};
}

namespace {
void check_rows(const char* op, const GraphBatch& batch, const Tensor& x) {
    if (x.rows() != batch.num_nodes()) {
        throw ad::ShapeError(std::string(op) + ": feature rows " + std::to_string(x.rows()) + " != batch nodes " +
                             std::to_string(batch.num_nodes()));
    }
}
}  // namespace

Tensor gcn_layer(Tape& t, const GraphBatch& batch, const Tensor& x, const GcnParams& p) {
    check_rows("gcn_layer", batch, x);
    if (x.cols() != p.linear.in_dim()) throw ad::ShapeError("gcn_layer: input width does not match weight");
    const auto norm = ad::SparseMatrix::gcn_normalized(batch.graph);
    // Propagate on the narrower side of the linear map.
    if (p.linear.in_dim() <= p.linear.out_dim()) {
        return p.linear.forward(t, ad::spmm(t, norm, x));
    }
    return ad::add_bias(t, ad::spmm(t, norm, ad::matmul(t, x, p.linear.weight)), p.linear.bias);
}

Tensor gin_layer(Tape& t, const GraphBatch& batch, const Tensor& x, const GinParams& p) {
    check_rows("gin_layer", batch, x);
    if (x.cols() != p.first.in_dim()) throw ad::ShapeError("gin_layer: input width does not match weight");
    Tensor agg = ad::spmm(t, ad::SparseMatrix::adjacency(batch.graph), x);
    Tensor self = p.eps == 0.0 ? x : ad::scale(t, x, 1.0 + p.eps);
    Tensor h = ad::add(t, self, agg);
    return p.second.forward(t, ad::relu(t, p.first.forward(t, h)));
}

AttentionEdges AttentionEdges::closed_neighborhoods(const Graph& g) {
    AttentionEdges e;
    const std::size_t n = g.num_nodes();
    e.offsets.reserve(n + 1);
    e.offsets.push_back(0);
    e.receivers.reserve(g.adjacency().size() + n);
    e.senders.reserve(g.adjacency().size() + n);
    for (NodeId i = 0; i < n; ++i) {
        bool self_done = false;
        for (NodeId j : g.neighbors(i)) {
            if (!self_done && j > i) {
                e.receivers.push_back(i);
                e.senders.push_back(i);
                self_done = true;
            }
            e.receivers.push_back(i);
            e.senders.push_back(j);
        }
        if (!self_done) {
            e.receivers.push_back(i);
            e.senders.push_back(i);
        }
        e.offsets.push_back(e.senders.size());
    }
    return e;
}

namespace {
struct Gatv2Pieces {
    Tensor alpha;   // E x 1
    Tensor values;  // E x H, W_right x_j per edge
};

Gatv2Pieces gatv2_pieces(Tape& t, const AttentionEdges& edges, const Tensor& x, const Gatv2Params& p) {
    if (x.cols() != p.w_left.rows() || x.cols() != p.w_right.rows()) {
        throw ad::ShapeError("gatv2_layer: input width does not match weight");
    }
    Tensor left = ad::matmul(t, x, p.w_left);
    Tensor right = ad::matmul(t, x, p.w_right);
    Tensor values = ad::gather_rows(t, right, edges.senders);
    Tensor pre = ad::add(t, ad::gather_rows(t, left, edges.receivers), values);
    Tensor scores = ad::matmul(t, ad::leaky_relu(t, pre, p.slope), p.attention);
    return {ad::segment_softmax(t, scores, edges.offsets), values};
}
}  // namespace

Tensor gatv2_attention(Tape& t, const AttentionEdges& edges, const Tensor& x, const Gatv2Params& p) {
    return gatv2_pieces(t, edges, x, p).alpha;
}

Tensor gatv2_layer(Tape& t, const GraphBatch& batch, const Tensor& x, const Gatv2Params& p) {
    check_rows("gatv2_layer", batch, x);
    const auto edges = AttentionEdges::closed_neighborhoods(batch.graph);
    auto pieces = gatv2_pieces(t, edges, x, p);
    return ad::rowsum_segments(t, ad::mul_col(t, pieces.values, pieces.alpha), edges.offsets);
}

std::size_t sagpool_keep_count(std::size_t n, double ratio) {
    if (n == 0) return 0;
    // Shave a rounding hair so that e.g. 0.3 * 10 keeps 3 nodes, not 4.
    const double raw = std::ceil(ratio * static_cast<double>(n) - 1e-9);
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::max(raw, 1.0)), 1, n);
}

SagPoolOutput sagpool(Tape& t, const GraphBatch& batch, const Tensor& x, const SagPoolParams& p) {
    if (!(p.ratio > 0.0 && p.ratio <= 1.0)) throw std::invalid_argument("sagpool: ratio must lie in (0, 1]");
    check_rows("sagpool", batch, x);
    Tensor scores = ad::tanh(t, gcn_layer(t, batch, x, p.score));

    SagPoolOutput out;
    out.batch.offsets.reserve(batch.offsets.size());
    const auto& s = scores.value().data;
    for (std::size_t g = 0; g < batch.num_graphs(); ++g) {
        const std::size_t lo = batch.offsets[g];
        const std::size_t n = batch.graph_size(g);
        const std::size_t keep = sagpool_keep_count(n, p.ratio);
        auto local = ad::topk_indices(std::span<const double>(s.data() + lo, n), keep);
        if (keep < n) {
            double dropped = -std::numeric_limits<double>::infinity();
            std::vector<bool> is_kept(n, false);
            for (std::size_t i : local) is_kept[i] = true;
            for (std::size_t i = 0; i < n; ++i)
                if (!is_kept[i]) dropped = std::max(dropped, s[lo + i]);
            out.margin = std::min(out.margin, s[lo + local.back()] - dropped);
        }
        std::sort(local.begin(), local.end());
        for (std::size_t i : local) out.kept.push_back(static_cast<NodeId>(lo + i));
        out.batch.offsets.push_back(out.kept.size());
    }
    out.batch.graph = batch.graph.induced_subgraph(out.kept);

    Tensor kept_x = ad::gather_rows(t, x, out.kept);
    Tensor kept_s = ad::gather_rows(t, scores, out.kept);
    out.features = ad::mul_col(t, kept_x, kept_s);
    const Tensor parts[] = {ad::segment_mean(t, out.features, out.batch.offsets),
                            ad::segment_max(t, out.features, out.batch.offsets)};
    out.readout = ad::concat_cols(t, parts);
    return out;
}

Tensor readout_sum_linear(Tape& t, const Tensor& x, ad::Segments segments, const Linear& linear) {
    return linear.forward(t, ad::rowsum_segments(t, x, segments));
}

}  // namespace gclab
