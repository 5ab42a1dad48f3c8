#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <vector>

#include "gclab/dataset.hpp"
#include "gclab/graph.hpp"

namespace gclab {

/// Raised when a statistic has no meaningful value for the given graph.
class UndefinedStatistic : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct GraphStats {
    std::size_t num_nodes = 0;
    std::size_t num_edges = 0;
    double avg_degree = 0.0;
    double density = 0.0;
    double transitivity = 0.0;
    std::optional<double> avg_path_length;  // empty when undefined
    std::size_t max_degree = 0;
};

std::size_t count_triangles(const Graph& g);

/// Number of connected triples (paths of length two), sum of C(deg, 2).
std::size_t count_triads(const Graph& g);

/// 3 * triangles / triads, or 0 when the graph has no triads.
double transitivity(const Graph& g);

/// Node ids of the largest connected component (lowest id wins ties),
/// ascending.
std::vector<NodeId> largest_component(const Graph& g);

/// Mean BFS distance over ordered pairs of distinct nodes in the largest
/// connected component. Throws UndefinedStatistic when that component is a
/// single node.
double avg_path_length(const Graph& g);

GraphStats stats(const Graph& g);

/// T >= density.
inline bool is_high_transitivity(const GraphStats& s) { return s.transitivity >= s.density; }

/// avg path length below log_base(N); natural log by default.
inline bool is_small_world(const GraphStats& s, double log_base = M_E) {
    return s.avg_path_length && *s.avg_path_length < std::log(static_cast<double>(s.num_nodes)) / std::log(log_base);
}

struct Summary {
    double mean = 0.0;
    double min = 0.0;
    double max = 0.0;
    std::size_t count = 0;
};

/// One row per class of mean (min-max) statistics, in class-code order.
struct ClassSummary {
    ClassLabel label = ClassLabel::ER_low;
    std::size_t graphs = 0;
    Summary nodes, edges, avg_degree, density, transitivity, avg_path_length;
};

std::vector<ClassSummary> summarize_dataset(const LabeledDataset& ds, std::size_t workers = 1);

}  // namespace gclab
