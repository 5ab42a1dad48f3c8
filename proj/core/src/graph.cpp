#include "gclab/graph.hpp"

#include <algorithm>
#include <array>
#include <numeric>

namespace gclab {

EdgeRangeError::EdgeRangeError(std::size_t n, std::size_t u, std::size_t v)
    : std::out_of_range("edge (" + std::to_string(u) + ", " + std::to_string(v) +
                        ") out of range for a graph with " + std::to_string(n) + " nodes"),
      n_(n), u_(u), v_(v) {}

Graph Graph::from_edge_list(std::size_t n, std::span<const Edge> edges) {
    std::vector<std::size_t> offsets(n + 1, 0);
    for (const auto& [u, v] : edges) {
        if (u >= n || v >= n) throw EdgeRangeError(n, u, v);
        if (u == v) continue;
        ++offsets[u + 1];
        ++offsets[v + 1];
    }
    std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());

    std::vector<NodeId> neighbors(offsets.back());
    std::vector<std::size_t> cursor(offsets.begin(), offsets.end() - 1);
    for (const auto& [u, v] : edges) {
        if (u == v) continue;
        neighbors[cursor[u]++] = v;
        neighbors[cursor[v]++] = u;
    }

    // Sort each slice and squeeze out duplicates in place.
    std::vector<std::size_t> packed(n + 1, 0);
    std::size_t out = 0;
    for (std::size_t v = 0; v < n; ++v) {
        auto first = neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[v]);
        auto last = neighbors.begin() + static_cast<std::ptrdiff_t>(offsets[v + 1]);
        std::sort(first, last);
        auto unique_end = std::unique(first, last);
        for (auto it = first; it != unique_end; ++it) neighbors[out++] = *it;
        packed[v + 1] = out;
    }
    neighbors.resize(out);
    neighbors.shrink_to_fit();
    return Graph(std::move(packed), std::move(neighbors));
}

std::vector<Edge> Graph::to_edge_list() const {
    std::vector<Edge> edges;
    edges.reserve(num_edges());
    for (NodeId u = 0; u < num_nodes(); ++u) {
        for (NodeId v : neighbors(u)) {
            if (u < v) edges.emplace_back(u, v);
        }
    }
    return edges;
}

std::vector<std::size_t> Graph::degrees() const {
    std::vector<std::size_t> d(num_nodes());
    for (NodeId v = 0; v < num_nodes(); ++v) d[v] = degree(v);
    return d;
}

std::size_t Graph::max_degree() const {
    std::size_t best = 0;
    for (NodeId v = 0; v < num_nodes(); ++v) best = std::max(best, degree(v));
    return best;
}

bool Graph::has_edge(NodeId u, NodeId v) const {
    if (u >= num_nodes() || v >= num_nodes()) return false;
    auto nb = neighbors(u);
    return std::binary_search(nb.begin(), nb.end(), v);
}

std::vector<double> Graph::adjacency_matvec(std::span<const double> x) const {
    if (x.size() != num_nodes()) {
        throw std::invalid_argument("adjacency_matvec: vector length " + std::to_string(x.size()) +
                                    " != node count " + std::to_string(num_nodes()));
    }
    std::vector<double> y(num_nodes(), 0.0);
    for (NodeId v = 0; v < num_nodes(); ++v) {
        double acc = 0.0;
        for (NodeId u : neighbors(v)) acc += x[u];
        y[v] = acc;
    }
    return y;
}

Graph Graph::induced_subgraph(std::span<const NodeId> keep) const {
    constexpr NodeId kDropped = ~NodeId{0};
    std::vector<NodeId> remap(num_nodes(), kDropped);
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (keep[i] >= num_nodes() || (i > 0 && keep[i] <= keep[i - 1])) {
            throw std::invalid_argument("induced_subgraph: keep list must be strictly increasing node ids");
        }
        remap[keep[i]] = static_cast<NodeId>(i);
    }
    std::vector<std::size_t> offsets(keep.size() + 1, 0);
    std::vector<NodeId> neighbors;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        // Ascending source slice + monotone remap keeps the new slice sorted.
        for (NodeId u : this->neighbors(keep[i])) {
            if (remap[u] != kDropped) neighbors.push_back(remap[u]);
        }
        offsets[i + 1] = neighbors.size();
    }
    return Graph(std::move(offsets), std::move(neighbors));
}

Graph Graph::permuted(std::span<const NodeId> perm) const {
    if (perm.size() != num_nodes()) throw std::invalid_argument("permuted: permutation size mismatch");
    auto edges = to_edge_list();
    for (auto& [u, v] : edges) {
        u = perm[u];
        v = perm[v];
    }
    return from_edge_list(num_nodes(), edges);
}

Graph disjoint_union(std::span<const Graph* const> parts) {
    std::size_t total_nodes = 0, total_adj = 0;
    for (const Graph* g : parts) {
        total_nodes += g->num_nodes();
        total_adj += g->adjacency().size();
    }
    std::vector<std::size_t> offsets;
    offsets.reserve(total_nodes + 1);
    offsets.push_back(0);
    std::vector<NodeId> neighbors;
    neighbors.reserve(total_adj);
    NodeId shift = 0;
    for (const Graph* g : parts) {
        const std::size_t base = neighbors.size();
        for (NodeId u : g->adjacency()) neighbors.push_back(u + shift);
        for (std::size_t v = 1; v < g->offsets_.size(); ++v) offsets.push_back(base + g->offsets_[v]);
        shift += static_cast<NodeId>(g->num_nodes());
    }
    return Graph(std::move(offsets), std::move(neighbors));
}

namespace {
constexpr std::array<std::string_view, kNumClasses> kClassNames = {
    "ER_low", "ER_high", "WS_low", "WS_high", "BA_low", "BA_high", "GRID_low", "GRID_high",
};
}  // namespace

std::string_view class_name(ClassLabel label) { return kClassNames.at(class_code(label)); }

ClassLabel class_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kClassNames.size(); ++i) {
        if (kClassNames[i] == name) return static_cast<ClassLabel>(i);
    }
    throw std::invalid_argument("unknown class name '" + std::string(name) + "'");
}

ClassLabel class_from_code(std::size_t code) {
    if (code >= kNumClasses) throw std::out_of_range("class code " + std::to_string(code) + " out of range");
    return static_cast<ClassLabel>(code);
}

}  // namespace gclab
