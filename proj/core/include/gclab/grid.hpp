#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "gclab/dataset.hpp"
#include "gclab/results.hpp"
#include "gclab/training.hpp"

namespace gclab {

struct GridSpec {
    std::vector<Architecture> architectures{Architecture::GIN, Architecture::GATv2, Architecture::Hierarchical,
                                            Architecture::Global};
    std::vector<FeatureType> features{FeatureType::Ones, FeatureType::Noise, FeatureType::Degree,
                                      FeatureType::NormDegree, FeatureType::Identity};
    std::vector<std::size_t> hidden_values{1, 2, 3, 8, 16, 32};
    std::size_t layers = 4;
    std::size_t identity_k = 4;
    std::size_t replications = 5;
    std::uint64_t base_seed = 0;
    // Settings shared by every cell.
    TrainConfig train;

    void validate() const;
};

/// One training run of the grid.
struct GridCell {
    TrainConfig config;
    std::uint64_t seed = 0;

    ResultRecord::Key key() const;
};

/// Cells in (arch, feature, H, replication) order; replication r uses seed base_seed + r.
std::vector<GridCell> enumerate_cells(const GridSpec& spec);

struct GridOutcome {
    std::size_t executed = 0;
    std::size_t skipped = 0;  // already present in the results file
    std::size_t failed = 0;
};

using GridProgress = std::function<void(const GridCell&, const ResultRecord&)>;

/// Runs every cell whose key is not yet in `results_path`, appending one
/// record per finished run. Cells are spread over `workers` threads.
GridOutcome run_grid(const GridSpec& spec, const LabeledDataset& small, const LabeledDataset* medium,
                     const std::filesystem::path& results_path, std::size_t workers,
                     const GridProgress& progress = {});

}  // namespace gclab
