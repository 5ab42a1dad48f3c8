#include "gclab/features.hpp"

#include <stdexcept>

#include "gclab/rng.hpp"

namespace gclab {

std::string feature_name(FeatureType t) {
    switch (t) {
        case FeatureType::Ones: return "ones";
        case FeatureType::Noise: return "noise";
        case FeatureType::Degree: return "degree";
        case FeatureType::NormDegree: return "norm_degree";
        case FeatureType::Identity: return "identity";
    }
    throw std::logic_error("feature_name: unhandled feature type");
}

FeatureType feature_from_name(const std::string& name) {
    for (auto t : {FeatureType::Ones, FeatureType::Noise, FeatureType::Degree, FeatureType::NormDegree,
                   FeatureType::Identity}) {
        if (feature_name(t) == name) return t;
    }
    throw std::invalid_argument("unknown feature type '" + name + "'");
}

FeatureMatrix identity_features(const Graph& g, std::size_t k) {
    if (k == 0) throw std::invalid_argument("identity_features: k must be >= 1");
    const std::size_t n = g.num_nodes();
    FeatureMatrix out{n, k, std::vector<double>(n * k, 0.0)};
    for (NodeId v = 0; v < n; ++v) out.values[v * k] = static_cast<double>(g.degree(v));
    if (k == 1) return out;

    // With w_j = A^j e_v:  diag(A^{2j})_v = <w_j, w_j>, diag(A^{2j+1})_v = <w_j, w_{j+1}>.
    // Only ceil(k/2) sparse propagation steps from v are needed, touching the
    // (k/2)-hop ball around v.
    const std::size_t steps = (k + 1) / 2;
    std::vector<double> cur(n, 0.0), nxt(n, 0.0);
    std::vector<NodeId> cur_support, nxt_support;
    std::vector<char> in_next(n, 0);
    for (NodeId v = 0; v < n; ++v) {
        cur_support.assign(1, v);
        cur[v] = 1.0;
        for (std::size_t j = 0; j < steps; ++j) {
            nxt_support.clear();
            for (NodeId u : cur_support) {
                for (NodeId w : g.neighbors(u)) {
                    if (!in_next[w]) {
                        in_next[w] = 1;
                        nxt_support.push_back(w);
                    }
                    nxt[w] += cur[u];
                }
            }
            double even = 0.0, odd = 0.0;
            for (NodeId u : cur_support) even += cur[u] * cur[u];
            for (NodeId u : nxt_support) odd += cur[u] * nxt[u];
            if (const std::size_t len = 2 * j; len >= 2 && len <= k) out.values[v * k + len - 1] = even;
            if (const std::size_t len = 2 * j + 1; len >= 2 && len <= k) out.values[v * k + len - 1] = odd;
            for (NodeId u : cur_support) cur[u] = 0.0;
            for (NodeId u : nxt_support) in_next[u] = 0;
            std::swap(cur, nxt);
            std::swap(cur_support, nxt_support);
        }
        if (const std::size_t len = 2 * steps; len <= k) {
            double even = 0.0;
            for (NodeId u : cur_support) even += cur[u] * cur[u];
            out.values[v * k + len - 1] = even;
        }
        for (NodeId u : cur_support) cur[u] = 0.0;
    }
    return out;
}

FeatureMatrix augment(const Graph& g, const FeatureKind& kind, const FeatureContext& ctx) {
    const std::size_t n = g.num_nodes();
    switch (kind.type) {
        case FeatureType::Ones:
            return {n, 1, std::vector<double>(n, 1.0)};
        case FeatureType::Noise: {
            Rng rng = make_rng({ctx.dataset_seed, static_cast<std::uint64_t>(SeedStream::Noise), ctx.graph_id});
            FeatureMatrix out{n, 1, std::vector<double>(n)};
            for (double& x : out.values) x = uniform01(rng);
            return out;
        }
        case FeatureType::Degree: {
            FeatureMatrix out{n, 1, std::vector<double>(n)};
            for (NodeId v = 0; v < n; ++v) out.values[v] = static_cast<double>(g.degree(v));
            return out;
        }
        case FeatureType::NormDegree: {
            if (!ctx.max_degree_over_dataset || *ctx.max_degree_over_dataset == 0) {
                throw std::invalid_argument("augment: norm_degree needs a positive dataset max degree");
            }
            const double denom = static_cast<double>(*ctx.max_degree_over_dataset);
            FeatureMatrix out{n, 1, std::vector<double>(n)};
            for (NodeId v = 0; v < n; ++v) out.values[v] = static_cast<double>(g.degree(v)) / denom;
            return out;
        }
        case FeatureType::Identity:
            if (kind.identity_k == 0) throw std::invalid_argument("augment: identity depth k must be >= 1");
            return identity_features(g, kind.identity_k);
    }
    throw std::logic_error("augment: unhandled feature type");
}

}  // namespace gclab
