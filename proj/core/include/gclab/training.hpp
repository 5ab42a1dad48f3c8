#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gclab/dataset.hpp"
#include "gclab/features.hpp"
#include "gclab/model.hpp"

namespace gclab {

enum class Selection : std::uint8_t { BestValidation, LastEpoch };

struct TrainConfig {
    ModelConfig model;
    std::size_t epochs = 100;
    std::size_t batch_size = 100;
    double lr = 0.01;
    double weight_decay = 1e-3;
    std::size_t replications = 5;
    Selection selection = Selection::BestValidation;

    void validate() const;
};

/// A dataset with the node features of one strategy precomputed for every
/// graph. Holds a reference to the dataset, which must outlive it.
struct PreparedDataset {
    const LabeledDataset* dataset = nullptr;
    FeatureKind kind;
    std::vector<FeatureMatrix> features;

    std::size_t size() const { return features.size(); }
};

PreparedDataset prepare(const LabeledDataset& ds, const FeatureKind& kind, std::size_t workers = 1);

/// Batch inputs for a subset of graphs.
struct BatchInputs {
    GraphBatch batch;
    ad::Tensor features;
    std::vector<std::size_t> labels;
};

BatchInputs make_batch(const PreparedDataset& data, std::span<const std::size_t> ids);

/// Mean over rows of -logp[row, label]. Throws std::out_of_range for a label
/// outside the row width.
ad::Tensor nll_loss(ad::Tape& t, const ad::Tensor& logp, std::span<const std::size_t> labels);

/// Fraction of graphs whose arg-max prediction is the true class (eval mode;
/// ties resolve to the lowest class code). Empty `ids` gives 0.
double evaluate(Model& model, const PreparedDataset& data, std::span<const std::size_t> ids,
                std::size_t batch_size = 100);

struct RunResult {
    std::uint64_t seed = 0;
    std::vector<double> train_loss;       // mean batch loss per epoch
    std::vector<double> val_accuracy;     // after each epoch
    double initial_val_accuracy = 0.0;    // before any update
    double initial_loss = 0.0;            // first training batch at initialization
    std::size_t best_epoch = 0;           // 0 = untrained parameters
    double test_accuracy = 0.0;
    std::optional<double> medium_accuracy;
    double wall_seconds = 0.0;
    bool failed = false;
    std::string failure;
};

/// One training run with the given seed. `medium`, when supplied, is
/// evaluated on its test split with the selected model.
RunResult train_run(const TrainConfig& cfg, const PreparedDataset& data, const PreparedDataset* medium,
                    std::uint64_t seed, Model* trained = nullptr);

/// `cfg.replications` runs with seeds base_seed, base_seed + 1, ...
std::vector<RunResult> train(const TrainConfig& cfg, const PreparedDataset& data, const PreparedDataset* medium,
                             std::uint64_t base_seed, std::size_t workers = 1);

struct MeanStd {
    double mean = 0.0;
    double std = 0.0;
    std::size_t count = 0;
};

/// Mean and population standard deviation of the test accuracy over the
/// runs that did not fail.
MeanStd summarize_test_accuracy(std::span<const RunResult> runs);
MeanStd summarize_medium_accuracy(std::span<const RunResult> runs);

}  // namespace gclab
