#include "gclab/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace gclab {

using ad::Matrix;
using ad::Tape;
using ad::Tensor;

std::string architecture_name(Architecture a) {
    switch (a) {
        case Architecture::GIN: return "gin";
        case Architecture::GATv2: return "gatv2";
        case Architecture::Hierarchical: return "hierarchical";
        case Architecture::Global: return "global";
    }
    throw std::logic_error("architecture_name: unhandled architecture");
}

Architecture architecture_from_name(const std::string& name) {
    for (auto a : {Architecture::GIN, Architecture::GATv2, Architecture::Hierarchical, Architecture::Global}) {
        if (architecture_name(a) == name) return a;
    }
    throw std::invalid_argument("unknown architecture '" + name + "'");
}

void ModelConfig::validate() const {
    if (hidden == 0) throw std::invalid_argument("model: hidden width H must be positive");
    if (layers == 0) throw std::invalid_argument("model: layer count K must be positive");
    if (feature.type == FeatureType::Identity && feature.identity_k == 0) {
        throw std::invalid_argument("model: identity depth must be >= 1");
    }
    if (!(dropout >= 0.0 && dropout < 1.0)) throw std::invalid_argument("model: dropout must lie in [0, 1)");
    if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("model: pooling ratio must lie in (0, 1]");
}

std::size_t embedding_width(Architecture arch, std::size_t hidden, std::size_t layers) {
    switch (arch) {
        case Architecture::GIN: return hidden;
        case Architecture::GATv2: return (layers + 1) * hidden;
        case Architecture::Hierarchical: return 2 * hidden;
        case Architecture::Global: return 2 * layers * hidden;
    }
    throw std::logic_error("embedding_width: unhandled architecture");
}

std::size_t expected_parameter_count(Architecture arch, std::size_t d, std::size_t h, std::size_t k) {
    std::size_t body = 0;
    switch (arch) {
        case Architecture::GIN:
            body = (d * h + h + h * h + h) + (k - 1) * (2 * h * h + 2 * h) + 2 * h * k + (d * h + h) + k * (h * h + h);
            break;
        case Architecture::GATv2:
            body = (2 * d * h + h) + (k - 1) * (2 * h * h + h) + 2 * h * k + (d * h + h) + k * (h * h + h);
            break;
        case Architecture::Hierarchical:
            body = (d * h + h) + (k - 1) * (h * h + h) + k * (h + 1);
            break;
        case Architecture::Global:
            body = (d * h + h) + (k - 1) * (h * h + h) + (k * h + 1);
            break;
    }
    const std::size_t e = embedding_width(arch, h, k);
    return body + (e * h + h) + 2 * (h * h + h) + (kNumOutputs * h + kNumOutputs);
}

Tensor Model::BatchNorm::apply(Tape& t, const Tensor& x, bool train) {
    return ad::batch_norm(t, x, gamma, beta, stats, train);
}

void Model::add_linear(const std::string& name, const Linear& l) {
    params_.push_back({name + ".weight", l.weight});
    params_.push_back({name + ".bias", l.bias});
}

void Model::add_batch_norm(const std::string& name, std::size_t width) {
    BatchNorm bn{Tensor::parameter(Matrix(1, width, 1.0)), Tensor::parameter(Matrix(1, width, 0.0)),
                 ad::BatchNormState(width)};
    params_.push_back({name + ".gamma", bn.gamma});
    params_.push_back({name + ".beta", bn.beta});
    norms_.push_back(std::move(bn));
    norm_names_.push_back(name);
}

Model::Model(const ModelConfig& config) : config_(config) {
    config_.validate();
    Rng rng = make_rng({config_.seed, static_cast<std::uint64_t>(SeedStream::Init)});
    const std::size_t d = input_dim();
    const std::size_t h = config_.hidden;
    const std::size_t k = config_.layers;
    auto layer_name = [](const char* kind, std::size_t i) { return std::string(kind) + "." + std::to_string(i); };

    switch (config_.arch) {
        case Architecture::GIN:
        case Architecture::GATv2: {
            const bool gin = config_.arch == Architecture::GIN;
            readouts_.push_back(Linear::init(d, h, rng));
            add_linear(layer_name("readout", 0), readouts_.back());
            for (std::size_t i = 0; i < k; ++i) {
                const std::size_t in = i == 0 ? d : h;
                if (gin) {
                    gin_.push_back(GinParams::init(in, h, rng));
                    add_linear(layer_name("gin", i) + ".first", gin_.back().first);
                    add_linear(layer_name("gin", i) + ".second", gin_.back().second);
                } else {
                    gat_.push_back(Gatv2Params::init(in, h, rng));
                    params_.push_back({layer_name("gatv2", i) + ".w_left", gat_.back().w_left});
                    params_.push_back({layer_name("gatv2", i) + ".w_right", gat_.back().w_right});
                    params_.push_back({layer_name("gatv2", i) + ".attention", gat_.back().attention});
                }
                add_batch_norm(layer_name("bn", i), h);
                readouts_.push_back(Linear::init(h, h, rng));
                add_linear(layer_name("readout", i + 1), readouts_.back());
            }
            break;
        }
        case Architecture::Hierarchical:
        case Architecture::Global: {
            for (std::size_t i = 0; i < k; ++i) {
                gcn_.push_back(GcnParams::init(i == 0 ? d : h, h, rng));
                add_linear(layer_name("gcn", i), gcn_.back().linear);
                if (config_.arch == Architecture::Hierarchical) {
                    pools_.push_back(SagPoolParams::init(h, config_.ratio, rng));
                    add_linear(layer_name("pool", i) + ".score", pools_.back().score.linear);
                }
            }
            if (config_.arch == Architecture::Global) {
                pools_.push_back(SagPoolParams::init(k * h, config_.ratio, rng));
                add_linear("pool.score", pools_.back().score.linear);
            }
            break;
        }
    }

    const std::size_t widths[] = {embedding_dim(), h, h, h};
    for (std::size_t i = 0; i < 3; ++i) {
        head_.push_back(Linear::init(widths[i], h, rng));
        add_linear(layer_name("head", i), head_.back());
    }
    // Zero output weights: every class starts at log(1/8) whatever the
    // scale of the sum readouts feeding the head.
    head_.push_back({Tensor::parameter(Matrix(h, kNumOutputs)), Tensor::parameter(Matrix(1, kNumOutputs))});
    add_linear("head.out", head_.back());
}

Tensor Model::embed(Tape& t, const GraphBatch& batch, const Tensor& features, bool train) {
    if (features.cols() != input_dim()) {
        throw ad::ShapeError("model: feature width " + std::to_string(features.cols()) + " != model input width " +
                             std::to_string(input_dim()));
    }
    if (features.rows() != batch.num_nodes()) throw ad::ShapeError("model: feature rows do not match batch nodes");
    const auto& seg = batch.offsets;

    switch (config_.arch) {
        case Architecture::GIN: {
            Tensor h = features;
            Tensor emb = readout_sum_linear(t, h, seg, readouts_[0]);
            for (std::size_t i = 0; i < gin_.size(); ++i) {
                h = ad::relu(t, norms_[i].apply(t, gin_layer(t, batch, h, gin_[i]), train));
                emb = ad::add(t, emb, readout_sum_linear(t, h, seg, readouts_[i + 1]));
            }
            return emb;
        }
        case Architecture::GATv2: {
            Tensor h = features;
            std::vector<Tensor> taps{readout_sum_linear(t, h, seg, readouts_[0])};
            for (std::size_t i = 0; i < gat_.size(); ++i) {
                h = norms_[i].apply(t, gatv2_layer(t, batch, h, gat_[i]), train);
                taps.push_back(readout_sum_linear(t, h, seg, readouts_[i + 1]));
            }
            return ad::concat_cols(t, taps);
        }
        case Architecture::Hierarchical: {
            pool_margin_ = std::numeric_limits<double>::infinity();
            GraphBatch level = batch;
            Tensor h = features;
            Tensor emb;
            for (std::size_t i = 0; i < gcn_.size(); ++i) {
                h = ad::relu(t, gcn_layer(t, level, h, gcn_[i]));
                auto pooled = sagpool(t, level, h, pools_[i]);
                pool_margin_ = std::min(pool_margin_, pooled.margin);
                emb = emb.defined() ? ad::add(t, emb, pooled.readout) : pooled.readout;
                level = std::move(pooled.batch);
                h = pooled.features;
            }
            return emb;
        }
        case Architecture::Global: {
            Tensor h = features;
            std::vector<Tensor> outs;
            for (const auto& layer : gcn_) {
                h = ad::relu(t, gcn_layer(t, batch, h, layer));
                outs.push_back(h);
            }
            auto pooled = sagpool(t, batch, ad::concat_cols(t, outs), pools_[0]);
            pool_margin_ = pooled.margin;
            return pooled.readout;
        }
    }
    throw std::logic_error("Model::embed: unhandled architecture");
}

Tensor Model::forward(Tape& t, const GraphBatch& batch, const Tensor& features, bool train, Rng& dropout_rng) {
    Tensor z = embed(t, batch, features, train);
    for (std::size_t i = 0; i < 3; ++i) z = ad::relu(t, head_[i].forward(t, z));
    z = ad::dropout(t, z, config_.dropout, train, dropout_rng);
    return ad::log_softmax_rows(t, head_[3].forward(t, z));
}

Matrix Model::predict(const GraphBatch& batch, const Tensor& features) {
    Tape t;
    t.set_recording(false);
    Rng unused(0);
    return forward(t, batch, features, false, unused).value();
}

std::vector<Tensor> Model::parameter_tensors() const {
    std::vector<Tensor> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p.tensor);
    return out;
}

std::size_t Model::parameter_count() const {
    std::size_t total = 0;
    for (const auto& p : params_) total += p.tensor.value().size();
    return total;
}

ModelState Model::state() const {
    ModelState s;
    for (const auto& p : params_) s.params.emplace_back(p.name, p.tensor.value());
    for (std::size_t i = 0; i < norms_.size(); ++i) {
        s.buffers.emplace_back(norm_names_[i] + ".running_mean", norms_[i].stats.running_mean);
        s.buffers.emplace_back(norm_names_[i] + ".running_var", norms_[i].stats.running_var);
    }
    return s;
}

void Model::load_state(const ModelState& s) {
    if (s.params.size() != params_.size() || s.buffers.size() != 2 * norms_.size()) {
        throw std::invalid_argument("load_state: state does not match model layout");
    }
    auto check = [](const std::string& want, const Matrix& have, const std::pair<std::string, Matrix>& got) {
        if (got.first != want || !got.second.same_shape(have)) {
            throw std::invalid_argument("load_state: mismatch at '" + want + "' (got '" + got.first + "')");
        }
    };
    for (std::size_t i = 0; i < params_.size(); ++i) check(params_[i].name, params_[i].tensor.value(), s.params[i]);
    for (std::size_t i = 0; i < norms_.size(); ++i) {
        check(norm_names_[i] + ".running_mean", norms_[i].stats.running_mean, s.buffers[2 * i]);
        check(norm_names_[i] + ".running_var", norms_[i].stats.running_var, s.buffers[2 * i + 1]);
    }
    for (std::size_t i = 0; i < params_.size(); ++i) params_[i].tensor.mutable_value() = s.params[i].second;
    for (std::size_t i = 0; i < norms_.size(); ++i) {
        norms_[i].stats.running_mean = s.buffers[2 * i].second;
        norms_[i].stats.running_var = s.buffers[2 * i + 1].second;
    }
}

}  // namespace gclab
