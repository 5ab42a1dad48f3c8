#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gclab/graph.hpp"

namespace gclab {

/// Node features of one graph, row-major (row = node).
struct FeatureMatrix {
    std::size_t num_nodes = 0;
    std::size_t dim = 0;
    std::vector<double> values;

    double at(std::size_t node, std::size_t col) const { return values[node * dim + col]; }
};

enum class FeatureType : std::uint8_t { Ones, Noise, Degree, NormDegree, Identity };

struct FeatureKind {
    FeatureType type = FeatureType::Ones;
    std::size_t identity_k = 4;  // read only for Identity

    std::size_t dim() const { return type == FeatureType::Identity ? identity_k : 1; }

    static FeatureKind ones() { return {FeatureType::Ones}; }
    static FeatureKind noise() { return {FeatureType::Noise}; }
    static FeatureKind degree() { return {FeatureType::Degree}; }
    static FeatureKind norm_degree() { return {FeatureType::NormDegree}; }
    static FeatureKind identity(std::size_t k) { return {FeatureType::Identity, k}; }

    friend bool operator==(const FeatureKind&, const FeatureKind&) = default;
};

/// "ones", "noise", "degree", "norm_degree", "identity".
std::string feature_name(FeatureType t);
FeatureType feature_from_name(const std::string& name);

/// Dataset-level information some strategies need.
struct FeatureContext {
    std::optional<std::size_t> max_degree_over_dataset;
    std::uint64_t dataset_seed = 0;
    std::size_t graph_id = 0;
};

/// Builds the artificial node features of one graph.
///
/// Noise draws are keyed by (dataset_seed, graph_id), so they are fixed for
/// the lifetime of a dataset. NormDegree requires max_degree_over_dataset.
FeatureMatrix augment(const Graph& g, const FeatureKind& kind, const FeatureContext& ctx);

/// Column 0 is the degree; column l-1 (l >= 2) counts closed walks of length
/// l from the node back to itself, i.e. diag(A^l). Counts are exact for
/// values below 2^53.
FeatureMatrix identity_features(const Graph& g, std::size_t k);

}  // namespace gclab
