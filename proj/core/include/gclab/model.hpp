#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "gclab/features.hpp"
#include "gclab/layers.hpp"
#include "gclab/tensor.hpp"

namespace gclab {

enum class Architecture : std::uint8_t { GIN, GATv2, Hierarchical, Global };

/// "gin", "gatv2", "hierarchical", "global".
std::string architecture_name(Architecture a);
Architecture architecture_from_name(const std::string& name);

struct ModelConfig {
    Architecture arch = Architecture::GIN;
    FeatureKind feature = FeatureKind::ones();
    std::size_t hidden = 8;   // H
    std::size_t layers = 4;   // K
    double ratio = 0.5;       // SAGPool keep ratio
    double dropout = 0.5;
    std::uint64_t seed = 0;

    void validate() const;
};

/// Width of the graph embedding handed to the classification head.
std::size_t embedding_width(Architecture arch, std::size_t hidden, std::size_t layers);

/// Closed-form trainable parameter count for input width d:
///
///   GIN:          (dH + H + H^2 + H) + (K-1)(2H^2 + 2H) + 2HK + (dH + H) + K(H^2 + H)
///   GATv2:        (2dH + H) + (K-1)(2H^2 + H) + 2HK + (dH + H) + K(H^2 + H)
///   Hierarchical: (dH + H) + (K-1)(H^2 + H) + K(H + 1)
///   Global:       (dH + H) + (K-1)(H^2 + H) + (KH + 1)
///
/// plus the head (E H + H) + 2(H^2 + H) + (8H + 8) with E the embedding width.
std::size_t expected_parameter_count(Architecture arch, std::size_t input_dim, std::size_t hidden, std::size_t layers);

inline constexpr std::size_t kNumOutputs = 8;

struct NamedTensor {
    std::string name;
    ad::Tensor tensor;
};

/// Parameter values and batch-norm running statistics, detached from any
/// tape. Used for best-epoch snapshots and checkpoints.
struct ModelState {
    std::vector<std::pair<std::string, ad::Matrix>> params;
    std::vector<std::pair<std::string, ad::Matrix>> buffers;
};

/// One of the four graph embedding architectures followed by the shared
/// classification head: 3 hidden layers of width H with ReLU, dropout, then
/// a zero-initialised linear map to 8 log-probabilities.
class Model {
public:
    explicit Model(const ModelConfig& config);
    Model(const Model&) = delete;
    Model& operator=(const Model&) = delete;
    Model(Model&&) = default;
    Model& operator=(Model&&) = default;

    const ModelConfig& config() const { return config_; }
    std::size_t input_dim() const { return config_.feature.dim(); }
    std::size_t embedding_dim() const { return embedding_width(config_.arch, config_.hidden, config_.layers); }

    /// Graph embeddings, one row per graph of the batch.
    ad::Tensor embed(ad::Tape& t, const GraphBatch& batch, const ad::Tensor& features, bool train);

    /// Per-graph log-probabilities over the 8 classes. `dropout_rng` is only
    /// drawn from in train mode.
    ad::Tensor forward(ad::Tape& t, const GraphBatch& batch, const ad::Tensor& features, bool train,
                       Rng& dropout_rng);

    /// Eval-mode forward without recording.
    ad::Matrix predict(const GraphBatch& batch, const ad::Tensor& features);

    /// Smallest pooling score margin of the last forward pass (see
    /// SagPoolOutput::margin); infinity for the unpooled architectures.
    double pool_margin() const { return pool_margin_; }

    const std::vector<NamedTensor>& parameters() const { return params_; }
    std::vector<ad::Tensor> parameter_tensors() const;
    std::size_t parameter_count() const;

    ModelState state() const;
    /// Throws std::invalid_argument when names or shapes do not match.
    void load_state(const ModelState& state);

private:
    struct BatchNorm {
        ad::Tensor gamma;
        ad::Tensor beta;
        ad::BatchNormState stats;
        ad::Tensor apply(ad::Tape& t, const ad::Tensor& x, bool train);
    };

    void add_linear(const std::string& name, const Linear& l);
    void add_batch_norm(const std::string& name, std::size_t width);

    ModelConfig config_;
    double pool_margin_ = std::numeric_limits<double>::infinity();
    std::vector<GinParams> gin_;
    std::vector<Gatv2Params> gat_;
    std::vector<GcnParams> gcn_;
    std::vector<SagPoolParams> pools_;
    std::vector<BatchNorm> norms_;
    std::vector<Linear> readouts_;
    std::vector<Linear> head_;
    std::vector<NamedTensor> params_;
    std::vector<std::string> norm_names_;
};

}  // namespace gclab
