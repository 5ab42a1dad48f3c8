#include "gclab/generators.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "gclab/rng.hpp"

namespace gclab {

namespace {

std::size_t uniform_index(Rng& rng, std::size_t n) {
    return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng);
}

// Mutable adjacency used only while a generator is running.
class EdgeSetBuilder {
public:
    explicit EdgeSetBuilder(std::size_t n) : adj_(n) {}

    bool has(NodeId u, NodeId v) const {
        const auto& a = adj_[u];
        return std::find(a.begin(), a.end(), v) != a.end();
    }
    void add(NodeId u, NodeId v) {
        adj_[u].push_back(v);
        adj_[v].push_back(u);
    }
    void remove(NodeId u, NodeId v) {
        std::erase(adj_[u], v);
        std::erase(adj_[v], u);
    }
    std::size_t degree(NodeId u) const { return adj_[u].size(); }

    Graph build() const {
        std::vector<Edge> edges;
        for (NodeId u = 0; u < adj_.size(); ++u) {
            for (NodeId v : adj_[u]) {
                if (u < v) edges.emplace_back(u, v);
            }
        }
        return Graph::from_edge_list(adj_.size(), edges);
    }

private:
    std::vector<std::vector<NodeId>> adj_;
};

}  // namespace

Graph gen_er(std::size_t n, double p, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("gen_er: need n >= 2, got " + std::to_string(n));
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("gen_er: p must lie in [0, 1]");
    Rng rng(seed);
    std::vector<Edge> edges;
    for (NodeId u = 0; u < n; ++u) {
        for (NodeId v = u + 1; v < n; ++v) {
            if (uniform01(rng) < p) edges.emplace_back(u, v);
        }
    }
    return Graph::from_edge_list(n, edges);
}

Graph gen_ws(std::size_t n, std::size_t k, double rewire_p, std::uint64_t seed) {
    if (k % 2 != 0) throw std::invalid_argument("gen_ws: k must be even, got " + std::to_string(k));
    if (k >= n) throw std::invalid_argument("gen_ws: need k < n");
    if (!(rewire_p >= 0.0 && rewire_p <= 1.0)) throw std::invalid_argument("gen_ws: rewire_p must lie in [0, 1]");
    Rng rng(seed);
    EdgeSetBuilder g(n);
    const std::size_t half = k / 2;
    for (std::size_t j = 1; j <= half; ++j) {
        for (std::size_t u = 0; u < n; ++u) g.add(static_cast<NodeId>(u), static_cast<NodeId>((u + j) % n));
    }
    for (std::size_t j = 1; j <= half; ++j) {
        for (std::size_t u = 0; u < n; ++u) {
            if (uniform01(rng) >= rewire_p) continue;
            const auto src = static_cast<NodeId>(u);
            const auto far = static_cast<NodeId>((u + j) % n);
            if (g.degree(src) >= n - 1) continue;
            NodeId w;
            do {
                w = static_cast<NodeId>(uniform_index(rng, n));
            } while (w == src || g.has(src, w));
            g.remove(src, far);
            g.add(src, w);
        }
    }
    return g.build();
}

Graph gen_ba(std::size_t n, std::size_t m, std::uint64_t seed) {
    if (m < 1 || m >= n) throw std::invalid_argument("gen_ba: need 1 <= m < n");
    Rng rng(seed);
    std::vector<Edge> edges;
    edges.reserve(m * (n - m));
    // Each node appears in `repeated` once per incident edge, so a uniform
    // draw from it is a degree-proportional draw.
    std::vector<NodeId> repeated;
    repeated.reserve(2 * m * (n - m));
    std::vector<NodeId> targets(m);
    for (std::size_t i = 0; i < m; ++i) targets[i] = static_cast<NodeId>(i);
    for (std::size_t source = m; source < n; ++source) {
        const auto src = static_cast<NodeId>(source);
        for (NodeId t : targets) {
            edges.emplace_back(src, t);
            repeated.push_back(t);
            repeated.push_back(src);
        }
        targets.clear();
        while (targets.size() < m) {
            NodeId pick = repeated[uniform_index(rng, repeated.size())];
            if (std::find(targets.begin(), targets.end(), pick) == targets.end()) targets.push_back(pick);
        }
    }
    return Graph::from_edge_list(n, edges);
}

Graph gen_grid(std::size_t rows, std::size_t cols, GridNeighborhood neighborhood, std::uint64_t /*seed*/) {
    if (rows < 4 || cols < 4) throw std::invalid_argument("gen_grid: rows and cols must both be >= 4");
    const std::size_t n = rows * cols;
    auto id = [cols](std::size_t r, std::size_t c) { return static_cast<NodeId>(r * cols + c); };
    std::vector<Edge> edges;
    edges.reserve(neighborhood == GridNeighborhood::Moore ? 4 * n : 2 * n);
    for (std::size_t r = 0; r < rows; ++r) {
        for (std::size_t c = 0; c < cols; ++c) {
            const std::size_t down = (r + 1) % rows;
            const std::size_t right = (c + 1) % cols;
            const std::size_t left = (c + cols - 1) % cols;
            edges.emplace_back(id(r, c), id(r, right));
            edges.emplace_back(id(r, c), id(down, c));
            if (neighborhood == GridNeighborhood::Moore) {
                edges.emplace_back(id(r, c), id(down, right));
                edges.emplace_back(id(r, c), id(down, left));
            }
        }
    }
    return Graph::from_edge_list(n, edges);
}

std::pair<std::size_t, std::size_t> grid_dims(std::size_t n) {
    std::pair<std::size_t, std::size_t> best{0, 0};
    for (std::size_t r = 4; r * r <= n; ++r) {
        if (n % r == 0 && n / r >= 4) best = {r, n / r};
    }
    return best;
}

void GeneratorSpec::validate() const {
    auto fail = [this](const std::string& what) {
        throw std::invalid_argument(std::string(class_name(label)) + ": " + what);
    };
    switch (label) {
        case ClassLabel::ER_low:
        case ClassLabel::ER_high:
            if (!(er_p >= 0.0 && er_p <= 1.0)) fail("er_p must lie in [0, 1]");
            break;
        case ClassLabel::WS_low:
        case ClassLabel::WS_high:
            if (ws_k != (label == ClassLabel::WS_low ? 4u : 8u)) fail("ws_k must be 4 (low) or 8 (high)");
            if (ws_k >= n) fail("ws_k must be below n");
            break;
        case ClassLabel::BA_low:
        case ClassLabel::BA_high:
            if (ba_m != (label == ClassLabel::BA_low ? 2u : 4u)) fail("ba_m must be 2 (low) or 4 (high)");
            if (ba_m >= n) fail("ba_m must be below n");
            break;
        case ClassLabel::GRID_low:
        case ClassLabel::GRID_high: {
            const auto want = label == ClassLabel::GRID_low ? GridNeighborhood::VonNeumann : GridNeighborhood::Moore;
            if (grid_neighborhood != want) fail("neighborhood does not match class");
            if (grid_rows < 4 || grid_cols < 4) fail("grid dims must both be >= 4");
            if (grid_rows * grid_cols != n) fail("grid_rows * grid_cols must equal n");
            break;
        }
    }
}

Graph generate(const GeneratorSpec& spec) {
    spec.validate();
    switch (spec.label) {
        case ClassLabel::ER_low:
        case ClassLabel::ER_high:
            return gen_er(spec.n, spec.er_p, spec.seed);
        case ClassLabel::WS_low:
        case ClassLabel::WS_high:
            return gen_ws(spec.n, spec.ws_k, spec.ws_rewire, spec.seed);
        case ClassLabel::BA_low:
        case ClassLabel::BA_high:
            return gen_ba(spec.n, spec.ba_m, spec.seed);
        case ClassLabel::GRID_low:
        case ClassLabel::GRID_high:
            return gen_grid(spec.grid_rows, spec.grid_cols, spec.grid_neighborhood, spec.seed);
    }
    throw std::logic_error("generate: unhandled class");
}

}  // namespace gclab
