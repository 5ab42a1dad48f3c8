#pragma once

#include <cstddef>
#include <limits>
#include <span>
#include <vector>

#include "gclab/graph.hpp"
#include "gclab/rng.hpp"
#include "gclab/tensor.hpp"

namespace gclab {

/// A minibatch of graphs merged into one block-diagonal graph. Nodes of graph
/// g occupy the contiguous range [offsets[g], offsets[g+1]).
struct GraphBatch {
    Graph graph;
    std::vector<std::size_t> offsets{0};

    static GraphBatch from_graphs(std::span<const Graph* const> graphs);
    static GraphBatch single(const Graph& g);

    std::size_t num_graphs() const { return offsets.size() - 1; }
    std::size_t num_nodes() const { return graph.num_nodes(); }
    std::size_t graph_size(std::size_t g) const { return offsets[g + 1] - offsets[g]; }
};

/// y = x W + b.
struct Linear {
    ad::Tensor weight;  // in x out
    ad::Tensor bias;    // 1 x out

    /// Glorot-uniform weight, zero bias.
    static Linear init(std::size_t in, std::size_t out, Rng& rng);

    std::size_t in_dim() const { return weight.rows(); }
    std::size_t out_dim() const { return weight.cols(); }
    ad::Tensor forward(ad::Tape& t, const ad::Tensor& x) const;
};

struct GcnParams {
    Linear linear;
    static GcnParams init(std::size_t in, std::size_t out, Rng& rng) { return {Linear::init(in, out, rng)}; }
};

/// Two-layer MLP applied after sum aggregation. eps is fixed, not learned.
struct GinParams {
    Linear first;
    Linear second;
    double eps = 0.0;
    static GinParams init(std::size_t in, std::size_t out, Rng& rng);
};

/// Single-head GATv2. Scoring uses W [x_i || x_j] = W_left x_i + W_right x_j;
/// the value of a neighbor j is W_right x_j.
struct Gatv2Params {
    ad::Tensor w_left;     // in x H, applied to the receiving node
    ad::Tensor w_right;    // in x H, applied to the sending node
    ad::Tensor attention;  // H x 1
    double slope = 0.2;
    static Gatv2Params init(std::size_t in, std::size_t out, Rng& rng);
};

struct SagPoolParams {
    GcnParams score;  // in -> 1
    double ratio = 0.5;
    static SagPoolParams init(std::size_t in, double ratio, Rng& rng);
};

/// A X W + b with A = D^-1/2 (A + I) D^-1/2.
ad::Tensor gcn_layer(ad::Tape& t, const GraphBatch& batch, const ad::Tensor& x, const GcnParams& p);

/// MLP((1 + eps) x + sum of neighbor x), MLP = Linear -> ReLU -> Linear.
ad::Tensor gin_layer(ad::Tape& t, const GraphBatch& batch, const ad::Tensor& x, const GinParams& p);

/// Attention edges of a batch: for every node i its closed neighborhood
/// N(i) + {i}, ascending by neighbor id. Edges of node i occupy
/// [offsets[i], offsets[i+1]).
struct AttentionEdges {
    std::vector<NodeId> receivers;
    std::vector<NodeId> senders;
    std::vector<std::size_t> offsets;

    static AttentionEdges closed_neighborhoods(const Graph& g);
};

/// Attention coefficients alpha_ij (one row per edge of `edges`).
ad::Tensor gatv2_attention(ad::Tape& t, const AttentionEdges& edges, const ad::Tensor& x, const Gatv2Params& p);

ad::Tensor gatv2_layer(ad::Tape& t, const GraphBatch& batch, const ad::Tensor& x, const Gatv2Params& p);

struct SagPoolOutput {
    GraphBatch batch;            // induced subgraphs on the kept nodes
    ad::Tensor features;         // kept rows gated by their scores
    ad::Tensor readout;          // [mean || max] per graph, width 2 * dim
    std::vector<NodeId> kept;    // kept node ids of the input batch, ascending
    // Smallest score gap between the last kept and the first dropped node
    // over all graphs; infinity when nothing was dropped. Zero means the
    // kept set was decided by node order.
    double margin = std::numeric_limits<double>::infinity();
};

/// Number of nodes kept from a graph of n nodes at ratio r: ceil(r n),
/// at least one node for a nonempty graph.
std::size_t sagpool_keep_count(std::size_t n, double ratio);

/// Scores nodes with tanh(GCN(x)) (width 1), keeps the top ceil(r n_g) nodes
/// of every graph (ties to the lower node id), gates their features by the
/// score and reads out [mean || max].
SagPoolOutput sagpool(ad::Tape& t, const GraphBatch& batch, const ad::Tensor& x, const SagPoolParams& p);

/// Per-graph feature sum followed by one linear map.
ad::Tensor readout_sum_linear(ad::Tape& t, const ad::Tensor& x, ad::Segments segments, const Linear& linear);

}  // namespace gclab
