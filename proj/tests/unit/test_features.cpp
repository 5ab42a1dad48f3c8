#include <doctest.h>

#include "gclab/dataset.hpp"
#include "gclab/features.hpp"
#include "gclab/generators.hpp"
#include "oracles.hpp"

using namespace gclab;

namespace {
Graph triangle() {
    const std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}};
    return Graph::from_edge_list(3, e);
}
std::vector<double> row(const FeatureMatrix& f, std::size_t v) {
    return {f.values.begin() + static_cast<std::ptrdiff_t>(v * f.dim),
            f.values.begin() + static_cast<std::ptrdiff_t>((v + 1) * f.dim)};
}
}  // namespace

TEST_SUITE("features") {

TEST_CASE("identity feature examples") {
    const auto k3 = identity_features(triangle(), 3);
    for (std::size_t v = 0; v < 3; ++v) CHECK(row(k3, v) == std::vector<double>{2, 2, 2});

    const std::vector<Edge> p3{{0, 1}, {1, 2}};
    const auto p = identity_features(Graph::from_edge_list(3, p3), 2);
    CHECK(row(p, 1) == std::vector<double>{2, 2});
    CHECK(row(p, 0) == std::vector<double>{1, 1});
    CHECK(row(p, 2) == std::vector<double>{1, 1});

    const std::vector<Edge> k2{{0, 1}};
    const auto e = identity_features(Graph::from_edge_list(2, k2), 4);
    CHECK(row(e, 0) == std::vector<double>{1, 1, 0, 1});
    CHECK(row(e, 1) == std::vector<double>{1, 1, 0, 1});

    const auto torus = identity_features(gen_grid(16, 16, GridNeighborhood::VonNeumann), 3);
    for (std::size_t v = 0; v < 256; ++v) CHECK(torus.at(v, 2) == 0.0);

    CHECK_THROWS_AS((void)identity_features(triangle(), 0), std::invalid_argument);
}

TEST_CASE("identity features equal closed-walk enumeration") {
    for (std::uint64_t seed = 0; seed < 40; ++seed) {
        const Graph g = oracle::random_graph(3 + seed % 6, 0.5, seed);
        const auto f = identity_features(g, 5);
        for (NodeId v = 0; v < g.num_nodes(); ++v) {
            CHECK(f.at(v, 0) == static_cast<double>(g.degree(v)));
            for (std::size_t l = 2; l <= 5; ++l) {
                CHECK(f.at(v, l - 1) == static_cast<double>(oracle::closed_walks(g, v, l)));
            }
        }
    }
}

TEST_CASE("identity column 2 equals degree and odd columns vanish on bipartite graphs") {
    const Graph g = gen_grid(6, 8, GridNeighborhood::VonNeumann);  // even torus: bipartite
    const auto f = identity_features(g, 6);
    for (NodeId v = 0; v < g.num_nodes(); ++v) {
        CHECK(f.at(v, 1) == f.at(v, 0));
        CHECK(f.at(v, 2) == 0.0);
        CHECK(f.at(v, 4) == 0.0);
    }
    const auto r = identity_features(oracle::random_graph(30, 0.2, 7), 4);
    for (std::size_t v = 0; v < 30; ++v) CHECK(r.at(v, 1) == r.at(v, 0));
}

TEST_CASE("simple strategies") {
    const std::vector<Edge> e{{0, 1}, {0, 2}, {0, 3}, {0, 4}};
    const Graph star = Graph::from_edge_list(6, e);  // node 5 isolated
    FeatureContext ctx{10, 1, 0};

    const auto ones = augment(star, FeatureKind::ones(), ctx);
    CHECK(ones.dim == 1);
    for (double x : ones.values) CHECK(x == 1.0);

    const auto deg = augment(star, FeatureKind::degree(), ctx);
    CHECK(deg.values == std::vector<double>{4, 1, 1, 1, 1, 0});

    const auto norm = augment(star, FeatureKind::norm_degree(), ctx);
    CHECK(norm.at(0, 0) == doctest::Approx(0.4).epsilon(1e-15));
    CHECK(norm.at(5, 0) == 0.0);
    for (double x : norm.values) CHECK(x <= 1.0);

    FeatureContext missing{};
    CHECK_THROWS_AS((void)augment(star, FeatureKind::norm_degree(), missing), std::invalid_argument);
    CHECK_THROWS_AS((void)augment(star, FeatureKind::identity(0), ctx), std::invalid_argument);

    const auto id = augment(star, FeatureKind::identity(3), ctx);
    CHECK(id.dim == 3);
    CHECK(FeatureKind::identity(3).dim() == 3);
    CHECK(FeatureKind::degree().dim() == 1);
}

TEST_CASE("noise is fixed per graph and seed") {
    const Graph g = oracle::random_graph(50, 0.1, 1);
    FeatureContext a{std::nullopt, 9, 4};
    const auto n1 = augment(g, FeatureKind::noise(), a);
    const auto n2 = augment(g, FeatureKind::noise(), a);
    CHECK(n1.values == n2.values);
    for (double x : n1.values) {
        CHECK(x >= 0.0);
        CHECK(x < 1.0);
    }
    FeatureContext b{std::nullopt, 9, 5};
    CHECK_FALSE(augment(g, FeatureKind::noise(), b).values == n1.values);
}

TEST_CASE("deterministic strategies are permutation equivariant") {
    const Graph g = oracle::random_graph(25, 0.2, 3);
    const auto perm = oracle::random_permutation(25, 2);
    const Graph h = g.permuted(perm);
    FeatureContext ctx{g.max_degree(), 0, 0};
    for (auto kind : {FeatureKind::ones(), FeatureKind::degree(), FeatureKind::norm_degree(), FeatureKind::identity(4)}) {
        const auto fg = augment(g, kind, ctx);
        const auto fh = augment(h, kind, ctx);
        for (NodeId v = 0; v < 25; ++v) CHECK(row(fg, v) == row(fh, perm[v]));
    }
}

TEST_CASE("feature names") {
    for (auto t : {FeatureType::Ones, FeatureType::Noise, FeatureType::Degree, FeatureType::NormDegree,
                   FeatureType::Identity}) {
        CHECK(feature_from_name(feature_name(t)) == t);
    }
    CHECK(feature_name(FeatureType::NormDegree) == "norm_degree");
    CHECK_THROWS((void)feature_from_name("eigen"));
}

}
