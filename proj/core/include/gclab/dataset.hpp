#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <string_view>
#include <vector>

#include "gclab/graph.hpp"

namespace gclab {

enum class Split : std::uint8_t { Train = 0, Val = 1, Test = 2 };

std::string_view split_name(Split s);
Split split_from_name(std::string_view name);

/// Per-class generator settings shared by all graphs of a dataset.
struct ClassParams {
    double er_degree_low = 4.0;   // ER edge probability = degree / n
    double er_degree_high = 8.0;
    std::size_t ws_k_low = 4;
    std::size_t ws_k_high = 8;
    double ws_rewire_min = 0.10;
    double ws_rewire_max = 0.11;
    std::size_t ba_m_low = 2;
    std::size_t ba_m_high = 4;

    friend bool operator==(const ClassParams&, const ClassParams&) = default;
};

struct DatasetSpec {
    std::size_t per_class_count = 250;
    std::size_t n_min = 250;
    std::size_t n_max = 1024;
    std::uint64_t master_seed = 0;
    std::array<double, 3> split_ratios{0.8, 0.1, 0.1};  // train, val, test
    ClassParams params{};

    /// 250 graphs per class, N in [250, 1024], 80/10/10 split.
    static DatasetSpec small(std::uint64_t seed);
    /// 250 graphs per class, N in [1024, 2048], all graphs in the test split.
    static DatasetSpec medium(std::uint64_t seed);

    void validate() const;

    friend bool operator==(const DatasetSpec&, const DatasetSpec&) = default;
};

struct LabeledGraph {
    std::size_t id = 0;
    ClassLabel label = ClassLabel::ER_low;
    Split split = Split::Train;
    Graph graph;
};

struct DatasetMetadata {
    DatasetSpec spec;
    std::size_t max_degree_over_dataset = 0;
};

/// Graphs ordered by (class code, index within class); id is the position.
struct LabeledDataset {
    DatasetMetadata metadata;
    std::vector<LabeledGraph> graphs;

    std::size_t size() const { return graphs.size(); }
    std::vector<std::size_t> indices(Split s) const;
    std::size_t count(Split s) const;
};

/// Splits `count` items over the three ratios by largest remainder (ties go
/// to the earlier split).
std::array<std::size_t, 3> split_counts(std::size_t count, const std::array<double, 3>& ratios);

/// Generates every graph of the dataset. The result depends only on `spec`,
/// not on `workers`.
LabeledDataset build_dataset(const DatasetSpec& spec, std::size_t workers = 1);

}  // namespace gclab
