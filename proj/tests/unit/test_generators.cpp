#include <doctest.h>

#include "gclab/generators.hpp"
#include "gclab/netstats.hpp"
#include "oracles.hpp"

using namespace gclab;

TEST_SUITE("generators") {

TEST_CASE("ER extremes") {
    CHECK(gen_er(7, 0.0, 3).num_edges() == 0);
    const Graph k5 = gen_er(5, 1.0, 3);
    CHECK(k5.num_edges() == 10);
    CHECK_THROWS_AS((void)gen_er(1, 0.5, 0), std::invalid_argument);
}

TEST_CASE("ER mean degree matches its expectation") {
    // Expected mean degree is p(N-1) = 4(N-1)/N.
    const std::size_t n = 1000;
    double total = 0.0;
    for (std::uint64_t s = 0; s < 200; ++s) total += 2.0 * static_cast<double>(gen_er(n, 4.0 / n, s).num_edges()) / n;
    const double mean = total / 200.0;
    const double expected = 4.0 * (n - 1.0) / n;
    CHECK(std::abs(mean - expected) / expected < 0.02);
    CHECK(mean >= 3.58);
    CHECK(mean <= 4.40);
}

TEST_CASE("ER is deterministic in its seed") {
    CHECK(gen_er(300, 0.02, 42) == gen_er(300, 0.02, 42));
    CHECK_FALSE(gen_er(300, 0.02, 42) == gen_er(300, 0.02, 43));
}

TEST_CASE("WS ring lattice without rewiring") {
    const Graph g = gen_ws(10, 4, 0.0, 1);
    CHECK(g.num_edges() == 20);
    for (NodeId v = 0; v < 10; ++v) CHECK(g.degree(v) == 4);
    // Transitivity against brute-force counts.
    CHECK(oracle::triangles(g) == 10);
    CHECK(oracle::triads(g) == 60);
    CHECK(transitivity(g) == doctest::Approx(0.5).epsilon(1e-15));
}

TEST_CASE("WS keeps the edge count under rewiring") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        const std::size_t n = 100 + 17 * s;
        CHECK(gen_ws(n, 4, 0.105, s).num_edges() == n * 2);
        CHECK(gen_ws(n, 8, 0.5, s).num_edges() == n * 4);
    }
}

TEST_CASE("WS mean transitivity by class") {
    double low = 0.0, high = 0.0;
    const int draws = 200;
    for (int s = 0; s < draws; ++s) {
        const std::size_t n = 250 + static_cast<std::size_t>(s) * 3;
        const double p = 0.1 + 0.01 * (s % 11) / 10.0;
        const double tl = transitivity(gen_ws(n, 4, p, s));
        const double th = transitivity(gen_ws(n, 8, p, s + 1000));
        low += tl;
        high += th;
    }
    // The ranges hold for the class mean; single graphs scatter around it.
    CHECK(low / draws >= 0.31);
    CHECK(low / draws <= 0.38);
    CHECK(high / draws >= 0.42);
    CHECK(high / draws <= 0.49);
}

TEST_CASE("WS parameter errors") {
    CHECK_THROWS_AS((void)gen_ws(10, 3, 0.1, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)gen_ws(10, 10, 0.1, 0), std::invalid_argument);
}

TEST_CASE("BA edge counts") {
    CHECK(gen_ba(258, 2, 5).num_edges() == 512);
    const Graph tiny = gen_ba(3, 1, 9);
    CHECK(tiny.num_edges() == 2);
    for (std::uint64_t s = 0; s < 20; ++s) {
        const std::size_t n = 50 + 31 * s;
        CHECK(gen_ba(n, 2, s).num_edges() == 2 * (n - 2));
        CHECK(gen_ba(n, 4, s).num_edges() == 4 * (n - 4));
    }
    const Graph g = gen_ba(644, 2, 11);
    const double avg = 2.0 * static_cast<double>(g.num_edges()) / 644.0;
    CHECK(avg >= 3.97);
    CHECK(avg <= 3.99);
    CHECK_THROWS_AS((void)gen_ba(5, 5, 0), std::invalid_argument);
    CHECK_THROWS_AS((void)gen_ba(5, 0, 0), std::invalid_argument);
}

TEST_CASE("BA degree distribution is heavy tailed") {
    const Graph g = gen_ba(2000, 2, 3);
    CHECK(g.max_degree() > 30);
}

TEST_CASE("torus grids") {
    const Graph vn = gen_grid(16, 16, GridNeighborhood::VonNeumann);
    CHECK(vn.num_edges() == 512);
    CHECK(transitivity(vn) == 0.0);
    const Graph moore = gen_grid(16, 16, GridNeighborhood::Moore);
    CHECK(moore.num_edges() == 1024);
    CHECK(transitivity(moore) == doctest::Approx(0.43).epsilon(0.01));
    // Brute force on a smaller Moore torus: each node sees 8 neighbours, 12 triangles.
    const Graph small = gen_grid(4, 5, GridNeighborhood::Moore);
    CHECK(3.0 * oracle::triangles(small) / oracle::triads(small) == doctest::Approx(transitivity(small)));
    const Graph g44 = gen_grid(4, 4, GridNeighborhood::VonNeumann);
    for (NodeId v = 0; v < 16; ++v) CHECK(g44.degree(v) == 4);
    for (NodeId v = 0; v < 20; ++v) CHECK(small.degree(v) == 8);
    CHECK_THROWS_AS((void)gen_grid(3, 10, GridNeighborhood::VonNeumann), std::invalid_argument);
}

TEST_CASE("grid dimensions pick the most square factorisation") {
    CHECK(grid_dims(256) == std::pair<std::size_t, std::size_t>{16, 16});
    CHECK(grid_dims(258) == std::pair<std::size_t, std::size_t>{6, 43});
    CHECK(grid_dims(24) == std::pair<std::size_t, std::size_t>{4, 6});
    CHECK(grid_dims(257) == std::pair<std::size_t, std::size_t>{0, 0});  // prime
    CHECK(grid_dims(12) == std::pair<std::size_t, std::size_t>{0, 0});   // 3 x 4 only
}

TEST_CASE("generate dispatches by class and validates") {
    GeneratorSpec s;
    s.label = ClassLabel::GRID_high;
    s.n = 24;
    s.grid_rows = 4;
    s.grid_cols = 6;
    s.grid_neighborhood = GridNeighborhood::Moore;
    CHECK(generate(s).num_edges() == 96);
    s.grid_cols = 5;
    CHECK_THROWS_AS(s.validate(), std::invalid_argument);

    GeneratorSpec ws;
    ws.label = ClassLabel::WS_high;
    ws.n = 100;
    ws.ws_k = 8;
    ws.ws_rewire = 0.1;
    CHECK(generate(ws).num_edges() == 400);
    ws.ws_k = 5;
    CHECK_THROWS_AS(generate(ws), std::invalid_argument);
}

}
