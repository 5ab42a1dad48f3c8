#include <doctest.h>

#include <cmath>

#include "gclab/layers.hpp"
#include "oracles.hpp"

using namespace gclab;
using namespace gclab::ad;
using oracle::DMat;

namespace {

Matrix random_matrix(std::size_t r, std::size_t c, std::uint64_t seed) {
    Rng rng(seed);
    Matrix m(r, c);
    for (double& v : m.data) v = 2.0 * uniform01(rng) - 1.0;
    return m;
}

Linear random_linear(std::size_t in, std::size_t out, std::uint64_t seed) {
    return {Tensor::parameter(random_matrix(in, out, seed)), Tensor::parameter(random_matrix(1, out, seed + 1))};
}

std::vector<double> row_of(const Linear& l) { return oracle::to_dense(l.bias.value())[0]; }

DMat dense_linear(const DMat& x, const Linear& l) {
    return oracle::add_row(oracle::matmul(x, oracle::to_dense(l.weight.value())), row_of(l));
}

DMat relu(DMat x) {
    for (auto& r : x)
        for (auto& v : r) v = std::max(v, 0.0);
    return x;
}

Matrix permute_rows(const Matrix& x, const std::vector<NodeId>& perm) {
    Matrix out(x.rows, x.cols);
    for (std::size_t v = 0; v < x.rows; ++v)
        for (std::size_t c = 0; c < x.cols; ++c) out(perm[v], c) = x(v, c);
    return out;
}

Tensor run_gcn(const Graph& g, const Matrix& x, const GcnParams& p) {
    Tape t;
    return gcn_layer(t, GraphBatch::single(g), Tensor::constant(x), p);
}

Tensor run_gin(const Graph& g, const Matrix& x, const GinParams& p) {
    Tape t;
    return gin_layer(t, GraphBatch::single(g), Tensor::constant(x), p);
}

Tensor run_gat(const Graph& g, const Matrix& x, const Gatv2Params& p) {
    Tape t;
    return gatv2_layer(t, GraphBatch::single(g), Tensor::constant(x), p);
}

Gatv2Params random_gat(std::size_t in, std::size_t out, std::uint64_t seed) {
    Gatv2Params p;
    p.w_left = Tensor::parameter(random_matrix(in, out, seed));
    p.w_right = Tensor::parameter(random_matrix(in, out, seed + 1));
    p.attention = Tensor::parameter(random_matrix(out, 1, seed + 2));
    return p;
}

GinParams random_gin(std::size_t in, std::size_t out, std::uint64_t seed) {
    GinParams p;
    p.first = random_linear(in, out, seed);
    p.second = random_linear(out, out, seed + 10);
    return p;
}

// Dense per-pair GATv2: e_ij = a . leaky(Wl x_i + Wr x_j) over N(i) + {i}.
DMat dense_gat(const Graph& g, const Matrix& x, const Gatv2Params& p) {
    const auto a = oracle::dense_adjacency(g);
    const DMat X = oracle::to_dense(x);
    const DMat L = oracle::matmul(X, oracle::to_dense(p.w_left.value()));
    const DMat R = oracle::matmul(X, oracle::to_dense(p.w_right.value()));
    const auto att = p.attention.value().data;
    const std::size_t n = X.size(), h = L[0].size();
    DMat out(n, std::vector<double>(h, 0.0));
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::size_t> nb;
        std::vector<double> e;
        for (std::size_t j = 0; j < n; ++j) {
            if (i != j && !a[i][j]) continue;
            double s = 0.0;
            for (std::size_t c = 0; c < h; ++c) {
                const double z = L[i][c] + R[j][c];
                s += att[c] * (z > 0 ? z : p.slope * z);
            }
            nb.push_back(j);
            e.push_back(s);
        }
        const double mx = *std::max_element(e.begin(), e.end());
        double total = 0.0;
        for (double& v : e) total += (v = std::exp(v - mx));
        for (std::size_t k = 0; k < nb.size(); ++k)
            for (std::size_t c = 0; c < h; ++c) out[i][c] += e[k] / total * R[nb[k]][c];
    }
    return out;
}

}  // namespace

TEST_SUITE("layers") {

TEST_CASE("gcn on an isolated node is the linear map") {
    const Graph g = Graph::from_edge_list(1, {});
    const GcnParams p{random_linear(3, 2, 1)};
    const Matrix x = random_matrix(1, 3, 2);
    CHECK(oracle::max_abs_diff(run_gcn(g, x, p).value(), dense_linear(oracle::to_dense(x), p.linear)) < 1e-15);
}

TEST_CASE("gcn matches the dense oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Graph g = oracle::random_graph(12, 0.3, seed);
        for (auto [in, out] : {std::pair{3, 5}, std::pair{5, 3}}) {
            const GcnParams p{random_linear(in, out, seed + 7)};
            const Matrix x = random_matrix(12, in, seed + 8);
            const DMat want = dense_linear(oracle::matmul(oracle::gcn_matrix(g), oracle::to_dense(x)), p.linear);
            CHECK(oracle::max_abs_diff(run_gcn(g, x, p).value(), want) < 1e-12);
        }
    }
}

TEST_CASE("gcn gives symmetric nodes equal outputs") {
    const std::vector<Edge> e{{0, 1}, {0, 2}};  // 1 and 2 are interchangeable
    const Graph g = Graph::from_edge_list(3, e);
    const Matrix x(3, 2, std::vector<double>{1, 2, 0.5, 0.5, 0.5, 0.5});
    const Matrix y = run_gcn(g, x, {random_linear(2, 4, 3)}).value();
    for (std::size_t c = 0; c < 4; ++c) CHECK(y(1, c) == y(2, c));
}

TEST_CASE("gin without edges is the MLP") {
    const Graph g = Graph::from_edge_list(4, {});
    const GinParams p = random_gin(2, 3, 4);
    const Matrix x = random_matrix(4, 2, 5);
    const DMat want = dense_linear(relu(dense_linear(oracle::to_dense(x), p.first)), p.second);
    CHECK(oracle::max_abs_diff(run_gin(g, x, p).value(), want) < 1e-15);
}

TEST_CASE("gin on K3 with identical features") {
    const std::vector<Edge> e{{0, 1}, {1, 2}, {0, 2}};
    const Graph g = Graph::from_edge_list(3, e);
    const GinParams p = random_gin(2, 3, 6);
    const Matrix x(3, 2, std::vector<double>{0.4, -1.0, 0.4, -1.0, 0.4, -1.0});
    const DMat three_x{{1.2, -3.0}};
    const DMat want = dense_linear(relu(dense_linear(three_x, p.first)), p.second);
    const Matrix y = run_gin(g, x, p).value();
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) CHECK(std::abs(y(r, c) - want[0][c]) < 1e-14);
}

TEST_CASE("gin matches the dense oracle") {
    const Graph g = oracle::random_graph(10, 0.4, 8);
    const GinParams p = random_gin(3, 4, 9);
    const Matrix x = random_matrix(10, 3, 10);
    DMat agg = oracle::to_dense(x);
    const auto a = oracle::dense_adjacency(g);
    const DMat X = oracle::to_dense(x);
    for (std::size_t i = 0; i < 10; ++i)
        for (std::size_t j = 0; j < 10; ++j)
            if (a[i][j])
                for (std::size_t c = 0; c < 3; ++c) agg[i][c] += X[j][c];
    const DMat want = dense_linear(relu(dense_linear(agg, p.first)), p.second);
    CHECK(oracle::max_abs_diff(run_gin(g, x, p).value(), want) < 1e-12);
}

TEST_CASE("gatv2 matches the dense per-pair oracle") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const Graph g = oracle::random_graph(5, 0.5, seed);
        const Gatv2Params p = random_gat(3, 4, seed + 20);
        const Matrix x = random_matrix(5, 3, seed + 30);
        CHECK(oracle::max_abs_diff(run_gat(g, x, p).value(), dense_gat(g, x, p)) < 1e-12);
    }
}

TEST_CASE("gatv2 attention") {
    const Graph g = oracle::random_graph(15, 0.3, 4);
    const auto edges = AttentionEdges::closed_neighborhoods(g);
    const Gatv2Params p = random_gat(2, 3, 5);
    Tape t;
    SUBCASE("rows sum to one") {
        const Matrix alpha = gatv2_attention(t, edges, Tensor::constant(random_matrix(15, 2, 6)), p).value();
        for (std::size_t i = 0; i < 15; ++i) {
            double total = 0.0;
            for (std::size_t e = edges.offsets[i]; e < edges.offsets[i + 1]; ++e) total += alpha.data[e];
            CHECK(std::abs(total - 1.0) < 1e-12);
        }
    }
    SUBCASE("identical features give uniform attention") {
        const Matrix alpha = gatv2_attention(t, edges, Tensor::constant(Matrix(15, 2, 0.7)), p).value();
        for (std::size_t i = 0; i < 15; ++i) {
            const double deg = static_cast<double>(edges.offsets[i + 1] - edges.offsets[i]);
            for (std::size_t e = edges.offsets[i]; e < edges.offsets[i + 1]; ++e) CHECK(std::abs(alpha.data[e] - 1.0 / deg) < 1e-12);
        }
    }
}

TEST_CASE("gatv2 isolated node attends to itself") {
    const Graph g = Graph::from_edge_list(1, {});
    const Gatv2Params p = random_gat(2, 3, 7);
    const Matrix x = random_matrix(1, 2, 8);
    const DMat want = oracle::matmul(oracle::to_dense(x), oracle::to_dense(p.w_right.value()));
    CHECK(oracle::max_abs_diff(run_gat(g, x, p).value(), want) < 1e-15);
}

TEST_CASE("closed neighborhoods are ascending and include the node") {
    const Graph g = oracle::random_graph(8, 0.4, 9);
    const auto e = AttentionEdges::closed_neighborhoods(g);
    for (NodeId i = 0; i < 8; ++i) {
        std::vector<NodeId> want(g.neighbors(i).begin(), g.neighbors(i).end());
        want.push_back(i);
        std::sort(want.begin(), want.end());
        std::vector<NodeId> got(e.senders.begin() + e.offsets[i], e.senders.begin() + e.offsets[i + 1]);
        CHECK(got == want);
    }
}

TEST_CASE("layers are permutation equivariant") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const Graph g = oracle::random_graph(20, 0.2, seed);
        const auto perm = oracle::random_permutation(20, seed + 1);
        const Graph pg = g.permuted(perm);
        const Matrix x = random_matrix(20, 3, seed + 2);
        const Matrix px = permute_rows(x, perm);
        const GcnParams gcn{random_linear(3, 4, seed)};
        const GinParams gin = random_gin(3, 4, seed);
        const Gatv2Params gat = random_gat(3, 4, seed);
        CHECK(oracle::max_abs_diff(permute_rows(run_gcn(g, x, gcn).value(), perm), oracle::to_dense(run_gcn(pg, px, gcn).value())) < 1e-12);
        CHECK(oracle::max_abs_diff(permute_rows(run_gin(g, x, gin).value(), perm), oracle::to_dense(run_gin(pg, px, gin).value())) < 1e-12);
        CHECK(oracle::max_abs_diff(permute_rows(run_gat(g, x, gat).value(), perm), oracle::to_dense(run_gat(pg, px, gat).value())) < 1e-12);
    }
}

TEST_CASE("sagpool keep counts") {
    CHECK(sagpool_keep_count(4, 0.5) == 2);
    CHECK(sagpool_keep_count(5, 0.5) == 3);
    CHECK(sagpool_keep_count(10, 0.3) == 3);
    CHECK(sagpool_keep_count(3, 0.01) == 1);
    CHECK(sagpool_keep_count(7, 1.0) == 7);
    CHECK(sagpool_keep_count(0, 0.5) == 0);
}

TEST_CASE("sagpool keeps the top-scoring nodes") {
    // Path 0-1-2-3 with a width-1 score layer that is the identity on x, so
    // scores are tanh of the gcn-smoothed feature.
    const std::vector<Edge> e{{0, 1}, {1, 2}, {2, 3}};
    const Graph g = Graph::from_edge_list(4, e);
    SagPoolParams p{{Linear{Tensor::parameter(Matrix(1, 1, 1.0)), Tensor::parameter(Matrix(1, 1, 0.0))}}, 0.5};
    const Matrix x(4, 1, std::vector<double>{0.1, 0.2, 0.9, 0.3});
    Tape t;
    const auto out = sagpool(t, GraphBatch::single(g), Tensor::constant(x), p);
    const DMat s = oracle::matmul(oracle::gcn_matrix(g), oracle::to_dense(x));
    std::vector<std::size_t> order{0, 1, 2, 3};
    std::sort(order.begin(), order.end(), [&](auto a, auto b) { return s[a][0] > s[b][0]; });
    std::vector<NodeId> want{static_cast<NodeId>(order[0]), static_cast<NodeId>(order[1])};
    std::sort(want.begin(), want.end());
    CHECK(out.kept == want);
    CHECK(out.batch.num_nodes() == 2);
    CHECK(out.readout.cols() == 2);
    // Gated features and the [mean || max] readout.
    const double g0 = x(want[0], 0) * std::tanh(s[want[0]][0]);
    const double g1 = x(want[1], 0) * std::tanh(s[want[1]][0]);
    CHECK(out.readout.value()(0, 0) == doctest::Approx((g0 + g1) / 2).epsilon(1e-14));
    CHECK(out.readout.value()(0, 1) == doctest::Approx(std::max(g0, g1)).epsilon(1e-14));
}

TEST_CASE("sagpool ties go to the lower node id") {
    const Graph g = Graph::from_edge_list(4, {});
    SagPoolParams p{{Linear{Tensor::parameter(Matrix(1, 1, 1.0)), Tensor::parameter(Matrix(1, 1, 0.0))}}, 0.5};
    Tape t;
    const auto out = sagpool(t, GraphBatch::single(g), Tensor::constant(Matrix(4, 1, 0.5)), p);
    CHECK(out.kept == std::vector<NodeId>{0, 1});
}

TEST_CASE("sagpool on a batch keeps ceil(r n) per graph and the induced edges") {
    const Graph a = oracle::random_graph(9, 0.5, 1);
    const Graph b = oracle::random_graph(5, 0.5, 2);
    const Graph* gs[] = {&a, &b};
    const GraphBatch batch = GraphBatch::from_graphs(gs);
    Rng rng(3);
    const SagPoolParams p = SagPoolParams::init(3, 0.5, rng);
    Tape t;
    const auto out = sagpool(t, batch, Tensor::constant(random_matrix(14, 3, 4)), p);
    CHECK(out.batch.offsets == std::vector<std::size_t>{0, 5, 8});
    CHECK(out.batch.graph == batch.graph.induced_subgraph(out.kept));
    CHECK(out.features.rows() == 8);
    CHECK(out.readout.rows() == 2);
    CHECK(out.readout.cols() == 6);
    CHECK_THROWS_AS(sagpool(t, batch, Tensor::constant(random_matrix(14, 3, 4)), SagPoolParams{p.score, 0.0}), std::invalid_argument);
    CHECK_THROWS_AS(sagpool(t, batch, Tensor::constant(random_matrix(14, 3, 4)), SagPoolParams{p.score, 1.5}), std::invalid_argument);
}

TEST_CASE("sagpool with ratio 1 keeps everything") {
    const Graph g = oracle::random_graph(7, 0.4, 5);
    Rng rng(1);
    const auto p = SagPoolParams::init(2, 1.0, rng);
    Tape t;
    const auto out = sagpool(t, GraphBatch::single(g), Tensor::constant(random_matrix(7, 2, 6)), p);
    CHECK(out.kept.size() == 7);
    CHECK(out.batch.graph == g);
}

TEST_CASE("readout") {
    const Linear l = random_linear(2, 3, 11);
    const std::vector<std::size_t> one{0, 2};
    Tape t;
    SUBCASE("sum then linear") {
        const Matrix x(2, 2, std::vector<double>{1, 2, 3, 4});
        const DMat want = dense_linear({{4.0, 6.0}}, l);
        CHECK(oracle::max_abs_diff(readout_sum_linear(t, Tensor::constant(x), one, l).value(), want) < 1e-15);
    }
    SUBCASE("zero features give the bias") {
        CHECK(readout_sum_linear(t, Tensor::constant(Matrix(2, 2)), one, l).value() == l.bias.value());
    }
    SUBCASE("batched rows match single-graph calls") {
        const Matrix x = random_matrix(7, 2, 12);
        const std::vector<std::size_t> seg{0, 3, 7};
        const Matrix both = readout_sum_linear(t, Tensor::constant(x), seg, l).value();
        const Matrix first(3, 2, std::vector<double>(x.data.begin(), x.data.begin() + 6));
        const Matrix second(4, 2, std::vector<double>(x.data.begin() + 6, x.data.end()));
        const std::vector<std::size_t> s3{0, 3}, s4{0, 4};
        const Matrix r1 = readout_sum_linear(t, Tensor::constant(first), s3, l).value();
        const Matrix r2 = readout_sum_linear(t, Tensor::constant(second), s4, l).value();
        for (std::size_t c = 0; c < 3; ++c) {
            CHECK(std::abs(both(0, c) - r1(0, c)) < 1e-10);
            CHECK(std::abs(both(1, c) - r2(0, c)) < 1e-10);
        }
    }
}

TEST_CASE("batched layers equal per-graph layers") {
    const Graph a = oracle::random_graph(6, 0.5, 21);
    const Graph b = oracle::random_graph(9, 0.3, 22);
    const Graph* gs[] = {&a, &b};
    const GraphBatch batch = GraphBatch::from_graphs(gs);
    const Matrix x = random_matrix(15, 3, 23);
    const Matrix xa(6, 3, std::vector<double>(x.data.begin(), x.data.begin() + 18));
    const Matrix xb(9, 3, std::vector<double>(x.data.begin() + 18, x.data.end()));
    const GinParams gin = random_gin(3, 2, 24);
    const Gatv2Params gat = random_gat(3, 2, 25);
    const GcnParams gcn{random_linear(3, 2, 26)};
    Tape t;
    auto check = [&](const Matrix& whole, const Matrix& ya, const Matrix& yb) {
        std::vector<double> joined = ya.data;
        joined.insert(joined.end(), yb.data.begin(), yb.data.end());
        for (std::size_t i = 0; i < joined.size(); ++i) CHECK(std::abs(whole.data[i] - joined[i]) < 1e-10);
    };
    check(gin_layer(t, batch, Tensor::constant(x), gin).value(), run_gin(a, xa, gin).value(), run_gin(b, xb, gin).value());
    check(gatv2_layer(t, batch, Tensor::constant(x), gat).value(), run_gat(a, xa, gat).value(), run_gat(b, xb, gat).value());
    check(gcn_layer(t, batch, Tensor::constant(x), gcn).value(), run_gcn(a, xa, gcn).value(), run_gcn(b, xb, gcn).value());
}

TEST_CASE("dimension mismatch") {
    const Graph g = oracle::random_graph(4, 0.5, 1);
    const Matrix x = random_matrix(4, 3, 2);
    CHECK_THROWS_AS(run_gcn(g, x, {random_linear(2, 2, 3)}), ShapeError);
    CHECK_THROWS_AS(run_gin(g, x, random_gin(2, 2, 3)), ShapeError);
    CHECK_THROWS_AS(run_gat(g, x, random_gat(2, 2, 3)), ShapeError);
    CHECK_THROWS_AS(run_gcn(g, random_matrix(5, 2, 1), {random_linear(2, 2, 3)}), ShapeError);
}

}
