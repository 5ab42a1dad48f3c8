#pragma once

// Brute-force reference implementations. These deliberately use the
// simplest possible algorithms (dense matrices, full enumeration) so they
// share no code paths with the library under test.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <numeric>
#include <random>
#include <vector>

#include "gclab/graph.hpp"
#include "gclab/tensor.hpp"

namespace oracle {

using Dense = std::vector<std::vector<int>>;

inline Dense dense_adjacency(const gclab::Graph& g) {
    const std::size_t n = g.num_nodes();
    Dense a(n, std::vector<int>(n, 0));
    for (auto [u, v] : g.to_edge_list()) a[u][v] = a[v][u] = 1;
    return a;
}

/// Random simple graph: each pair is an edge with probability p.
inline gclab::Graph random_graph(std::size_t n, double p, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::bernoulli_distribution coin(p);
    std::vector<gclab::Edge> edges;
    for (gclab::NodeId u = 0; u < n; ++u) {
        for (gclab::NodeId v = u + 1; v < n; ++v) {
            if (coin(rng)) edges.emplace_back(u, v);
        }
    }
    return gclab::Graph::from_edge_list(n, edges);
}

/// Random relabelling of 0..n-1.
inline std::vector<gclab::NodeId> random_permutation(std::size_t n, std::uint64_t seed) {
    std::vector<gclab::NodeId> p(n);
    std::iota(p.begin(), p.end(), 0);
    std::mt19937_64 rng(seed);
    std::shuffle(p.begin(), p.end(), rng);
    return p;
}

inline std::uint64_t triangles(const gclab::Graph& g) {
    const auto a = dense_adjacency(g);
    const std::size_t n = a.size();
    std::uint64_t t = 0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            for (std::size_t k = j + 1; k < n; ++k) t += a[i][j] && a[j][k] && a[i][k];
    return t;
}

/// Connected triples: (center, unordered pair of distinct neighbours).
inline std::uint64_t triads(const gclab::Graph& g) {
    const auto a = dense_adjacency(g);
    const std::size_t n = a.size();
    std::uint64_t t = 0;
    for (std::size_t c = 0; c < n; ++c)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) t += i != c && j != c && a[c][i] && a[c][j];
    return t;
}

/// All-pairs hop distances; unreachable pairs hold -1.
inline std::vector<std::vector<long>> floyd_warshall(const gclab::Graph& g) {
    const auto a = dense_adjacency(g);
    const std::size_t n = a.size();
    const long inf = std::numeric_limits<long>::max() / 4;
    std::vector<std::vector<long>> d(n, std::vector<long>(n, inf));
    for (std::size_t i = 0; i < n; ++i) {
        d[i][i] = 0;
        for (std::size_t j = 0; j < n; ++j)
            if (a[i][j]) d[i][j] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) d[i][j] = std::min(d[i][j], d[i][k] + d[k][j]);
    for (auto& row : d)
        for (auto& x : row)
            if (x >= inf) x = -1;
    return d;
}

/// Mean distance over ordered pairs of distinct nodes in the largest
/// component (ties between equal-size components go to the one holding the
/// smallest node id). NaN when that component has a single node.
inline double avg_path_length(const gclab::Graph& g) {
    const auto d = floyd_warshall(g);
    const std::size_t n = d.size();
    std::vector<std::size_t> best;
    std::vector<bool> seen(n, false);
    for (std::size_t s = 0; s < n; ++s) {
        if (seen[s]) continue;
        std::vector<std::size_t> comp;
        for (std::size_t v = 0; v < n; ++v) {
            if (d[s][v] >= 0) {
                comp.push_back(v);
                seen[v] = true;
            }
        }
        if (comp.size() > best.size()) best = comp;
    }
    if (best.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double total = 0.0;
    for (auto u : best)
        for (auto v : best)
            if (u != v) total += static_cast<double>(d[u][v]);
    return total / static_cast<double>(best.size() * (best.size() - 1));
}

/// Number of closed walks of exactly `length` steps starting and ending at
/// `start`, by exhaustive depth-first enumeration.
inline std::uint64_t closed_walks(const gclab::Graph& g, gclab::NodeId start, std::size_t length) {
    std::function<std::uint64_t(gclab::NodeId, std::size_t)> walk = [&](gclab::NodeId at, std::size_t left) -> std::uint64_t {
        if (left == 0) return at == start ? 1 : 0;
        std::uint64_t total = 0;
        for (auto next : g.neighbors(at)) total += walk(next, left - 1);
        return total;
    };
    return walk(start, length);
}

using DMat = std::vector<std::vector<double>>;

inline DMat to_dense(const gclab::ad::Matrix& m) {
    DMat out(m.rows, std::vector<double>(m.cols));
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) out[r][c] = m(r, c);
    return out;
}

inline DMat matmul(const DMat& a, const DMat& b) {
    const std::size_t n = a.size(), k = b.size(), m = b.empty() ? 0 : b[0].size();
    DMat out(n, std::vector<double>(m, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < m; ++j)
            for (std::size_t l = 0; l < k; ++l) out[i][j] += a[i][l] * b[l][j];
    return out;
}

inline DMat add_row(DMat a, const std::vector<double>& bias) {
    for (auto& row : a)
        for (std::size_t j = 0; j < row.size(); ++j) row[j] += bias[j];
    return a;
}

inline double max_abs_diff(const gclab::ad::Matrix& m, const DMat& d) {
    double worst = 0.0;
    for (std::size_t r = 0; r < m.rows; ++r)
        for (std::size_t c = 0; c < m.cols; ++c) worst = std::max(worst, std::abs(m(r, c) - d[r][c]));
    return worst;
}

/// Â = D̃^-1/2 (A + I) D̃^-1/2 as a dense matrix.
inline DMat gcn_matrix(const gclab::Graph& g) {
    const auto a = dense_adjacency(g);
    const std::size_t n = a.size();
    std::vector<double> deg(n, 1.0);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) deg[i] += a[i][j];
    DMat out(n, std::vector<double>(n, 0.0));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            const double aij = a[i][j] + (i == j ? 1.0 : 0.0);
            out[i][j] = aij / std::sqrt(deg[i] * deg[j]);
        }
    return out;
}

/// Relative error |a-b| / max(|a|+|b|, floor).
inline double rel_err(double a, double b, double floor = 1e-8) {
    return std::abs(a - b) / std::max(std::abs(a) + std::abs(b), floor);
}

/// Central finite-difference check of d f / d p for every entry of every
/// parameter. `f` must rebuild the computation from the current parameter
/// values; `analytic` holds the gradients from one backward pass.
inline double worst_fd_error(std::vector<gclab::ad::Tensor>& params, const std::vector<gclab::ad::Matrix>& analytic,
                             const std::function<double()>& f, double h = 1e-5, double floor = 1e-8) {
    double worst = 0.0;
    for (std::size_t p = 0; p < params.size(); ++p) {
        auto& value = params[p].mutable_value();
        for (std::size_t i = 0; i < value.data.size(); ++i) {
            const double orig = value.data[i];
            value.data[i] = orig + h;
            const double up = f();
            value.data[i] = orig - h;
            const double down = f();
            value.data[i] = orig;
            const double fd = (up - down) / (2.0 * h);
            const double an = analytic[p].empty() ? 0.0 : analytic[p].data[i];
            worst = std::max(worst, rel_err(fd, an, floor));
        }
    }
    return worst;
}

}  // namespace oracle
