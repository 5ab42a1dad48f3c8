#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "gclab/graph.hpp"

namespace gclab {

enum class GridNeighborhood : std::uint8_t { VonNeumann, Moore };

/// Erdos-Renyi G(n, p): every unordered pair is an edge independently with
/// probability p.
Graph gen_er(std::size_t n, double p, std::uint64_t seed);

/// Watts-Strogatz: ring lattice with k/2 neighbors per side, then every
/// lattice edge (u, u+j) has its far endpoint rewired with probability
/// `rewire_p` to a uniform node that is neither u nor already adjacent to u.
/// The edge count n*k/2 is preserved.
Graph gen_ws(std::size_t n, std::size_t k, double rewire_p, std::uint64_t seed);

/// Barabasi-Albert preferential attachment from m isolated seed nodes. The
/// first arriving node links to all seeds; later nodes pick m distinct
/// targets with probability proportional to degree. Has exactly m*(n-m) edges.
Graph gen_ba(std::size_t n, std::size_t m, std::uint64_t seed);

/// rows x cols torus lattice. Deterministic; `seed` is accepted for interface
/// uniformity only.
Graph gen_grid(std::size_t rows, std::size_t cols, GridNeighborhood neighborhood, std::uint64_t seed = 0);

/// Parameters for one generated graph. Only the fields relevant to
/// `label` are read.
struct GeneratorSpec {
    ClassLabel label = ClassLabel::ER_low;
    std::size_t n = 0;
    std::uint64_t seed = 0;
    double er_p = 0.0;
    std::size_t ws_k = 4;
    double ws_rewire = 0.1;
    std::size_t ba_m = 2;
    GridNeighborhood grid_neighborhood = GridNeighborhood::VonNeumann;
    std::size_t grid_rows = 0;
    std::size_t grid_cols = 0;

    /// Throws std::invalid_argument when the parameters contradict the class.
    void validate() const;
};

Graph generate(const GeneratorSpec& spec);

/// Factor pair (rows <= cols) of n with both factors >= 4 minimizing
/// cols - rows, or {0, 0} when none exists.
std::pair<std::size_t, std::size_t> grid_dims(std::size_t n);

}  // namespace gclab
