#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace gclab {

using NodeId = std::uint32_t;
using Edge = std::pair<NodeId, NodeId>;

/// Raised when an edge list references a node outside [0, n).
class EdgeRangeError : public std::out_of_range {
public:
    EdgeRangeError(std::size_t n, std::size_t u, std::size_t v);

    std::size_t num_nodes() const { return n_; }
    std::pair<std::size_t, std::size_t> pair() const { return {u_, v_}; }

private:
    std::size_t n_, u_, v_;
};

/// Immutable undirected simple graph stored as a symmetric CSR.
///
/// Every neighbor slice is strictly increasing, there are no self-loops and
/// no duplicate edges. Isolated nodes are allowed.
class Graph {
public:
    Graph() : offsets_(1, 0) {}

    /// Builds a graph from an arbitrary edge list. Self-loops are dropped and
    /// duplicates (in either orientation) are merged.
    static Graph from_edge_list(std::size_t n, std::span<const Edge> edges);

    /// Canonical edge list: every edge once as (u, v) with u < v, sorted.
    std::vector<Edge> to_edge_list() const;

    std::size_t num_nodes() const { return offsets_.size() - 1; }
    std::size_t num_edges() const { return neighbors_.size() / 2; }

    std::size_t degree(NodeId v) const { return offsets_[v + 1] - offsets_[v]; }
    std::vector<std::size_t> degrees() const;
    std::size_t max_degree() const;

    std::span<const NodeId> neighbors(NodeId v) const {
        return {neighbors_.data() + offsets_[v], neighbors_.data() + offsets_[v + 1]};
    }
    bool has_edge(NodeId u, NodeId v) const;

    std::span<const std::size_t> offsets() const { return offsets_; }
    std::span<const NodeId> adjacency() const { return neighbors_; }

    /// y[v] = sum of x[u] over the neighbors u of v.
    std::vector<double> adjacency_matvec(std::span<const double> x) const;

    /// Subgraph induced on `keep` (strictly increasing node ids). Node i of
    /// the result corresponds to keep[i].
    Graph induced_subgraph(std::span<const NodeId> keep) const;

    /// Relabels node v as perm[v].
    Graph permuted(std::span<const NodeId> perm) const;

    friend bool operator==(const Graph&, const Graph&) = default;
    friend Graph disjoint_union(std::span<const Graph* const> parts);

private:
    Graph(std::vector<std::size_t> offsets, std::vector<NodeId> neighbors)
        : offsets_(std::move(offsets)), neighbors_(std::move(neighbors)) {}

    std::vector<std::size_t> offsets_;
    std::vector<NodeId> neighbors_;
};

/// Disjoint union of graphs; node ids of graph g are shifted by the sum of the
/// sizes of graphs 0..g-1.
Graph disjoint_union(std::span<const Graph* const> parts);

/// The eight network classes. Integer codes are fixed and serialized by name.
enum class ClassLabel : std::uint8_t {
    ER_low = 0,
    ER_high = 1,
    WS_low = 2,
    WS_high = 3,
    BA_low = 4,
    BA_high = 5,
    GRID_low = 6,
    GRID_high = 7,
};

inline constexpr std::size_t kNumClasses = 8;

std::string_view class_name(ClassLabel label);
ClassLabel class_from_name(std::string_view name);
ClassLabel class_from_code(std::size_t code);
inline std::size_t class_code(ClassLabel label) { return static_cast<std::size_t>(label); }

}  // namespace gclab
