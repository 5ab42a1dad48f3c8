#include "gclab/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "gclab/adam.hpp"
#include "gclab/parallel.hpp"

namespace gclab {

using ad::Matrix;
using ad::Tape;
using ad::Tensor;

void TrainConfig::validate() const {
    model.validate();
    if (batch_size == 0) throw std::invalid_argument("train: batch size must be positive");
    if (replications == 0) throw std::invalid_argument("train: replications must be positive");
    if (!(lr >= 0.0)) throw std::invalid_argument("train: learning rate must be non-negative");
    if (!(weight_decay >= 0.0)) throw std::invalid_argument("train: weight decay must be non-negative");
}

PreparedDataset prepare(const LabeledDataset& ds, const FeatureKind& kind, std::size_t workers) {
    PreparedDataset out{&ds, kind, std::vector<FeatureMatrix>(ds.size())};
    parallel_for(ds.size(), workers, [&](std::size_t i) {
        FeatureContext ctx{ds.metadata.max_degree_over_dataset, ds.metadata.spec.master_seed, ds.graphs[i].id};
        out.features[i] = augment(ds.graphs[i].graph, kind, ctx);
    });
    return out;
}

BatchInputs make_batch(const PreparedDataset& data, std::span<const std::size_t> ids) {
    std::vector<const Graph*> graphs;
    graphs.reserve(ids.size());
    std::size_t rows = 0;
    for (std::size_t id : ids) {
        graphs.push_back(&data.dataset->graphs.at(id).graph);
        rows += data.features.at(id).num_nodes;
    }
    BatchInputs in;
    in.batch = GraphBatch::from_graphs(graphs);
    const std::size_t dim = data.kind.dim();
    Matrix x(rows, dim);
    std::size_t pos = 0;
    for (std::size_t id : ids) {
        const auto& f = data.features[id].values;
        std::copy(f.begin(), f.end(), x.data.begin() + static_cast<std::ptrdiff_t>(pos));
        pos += f.size();
        in.labels.push_back(class_code(data.dataset->graphs[id].label));
    }
    in.features = Tensor::constant(std::move(x));
    return in;
}

Tensor nll_loss(Tape& t, const Tensor& logp, std::span<const std::size_t> labels) {
    const Matrix& L = logp.value();
    if (labels.size() != L.rows) throw ad::ShapeError("nll_loss: one label per row required");
    if (L.rows == 0) throw ad::ShapeError("nll_loss: empty batch");
    double total = 0.0;
    for (std::size_t r = 0; r < L.rows; ++r) {
        if (labels[r] >= L.cols) {
            throw std::out_of_range("nll_loss: label " + std::to_string(labels[r]) + " outside " +
                                    std::to_string(L.cols) + " classes");
        }
        total -= L(r, labels[r]);
    }
    const double inv = 1.0 / static_cast<double>(L.rows);
    std::vector<std::size_t> y(labels.begin(), labels.end());
    return t.make_result(Matrix(1, 1, total * inv), {&logp}, [logp, y = std::move(y), inv](const Matrix& g, const Matrix&) {
        Matrix& gl = logp.grad_accumulator();
        for (std::size_t r = 0; r < y.size(); ++r) gl(r, y[r]) -= g.data[0] * inv;
    }, "nll_loss");
}

namespace {
std::size_t argmax_row(const Matrix& m, std::size_t r) {
    const double* row = m.row(r);
    return static_cast<std::size_t>(std::max_element(row, row + m.cols) - row);
}

template <class Fn>
void for_each_chunk(std::span<const std::size_t> ids, std::size_t batch_size, Fn&& fn) {
    for (std::size_t lo = 0; lo < ids.size(); lo += batch_size) {
        fn(ids.subspan(lo, std::min(batch_size, ids.size() - lo)));
    }
}
}  // namespace

double evaluate(Model& model, const PreparedDataset& data, std::span<const std::size_t> ids, std::size_t batch_size) {
    if (data.kind.dim() != model.input_dim()) {
        throw ad::ShapeError("evaluate: features of width " + std::to_string(data.kind.dim()) +
                             " for a model expecting " + std::to_string(model.input_dim()));
    }
    if (ids.empty()) return 0.0;
    std::size_t correct = 0;
    for_each_chunk(ids, batch_size, [&](std::span<const std::size_t> chunk) {
        auto in = make_batch(data, chunk);
        const Matrix logp = model.predict(in.batch, in.features);
        for (std::size_t r = 0; r < logp.rows; ++r) correct += argmax_row(logp, r) == in.labels[r] ? 1 : 0;
    });
    return static_cast<double>(correct) / static_cast<double>(ids.size());
}

RunResult train_run(const TrainConfig& cfg, const PreparedDataset& data, const PreparedDataset* medium,
                    std::uint64_t seed, Model* trained) {
    cfg.validate();
    if (data.kind != cfg.model.feature) throw std::invalid_argument("train: dataset features do not match the model");
    const auto start = std::chrono::steady_clock::now();
    const LabeledDataset& ds = *data.dataset;
    const auto train_ids = ds.indices(Split::Train);
    const auto val_ids = ds.indices(Split::Val);
    const auto test_ids = ds.indices(Split::Test);
    if (train_ids.empty()) throw std::invalid_argument("train: the training split is empty");
    if (test_ids.empty()) throw std::invalid_argument("train: the test split is empty");

    RunResult res;
    res.seed = seed;
    ModelConfig mc = cfg.model;
    mc.seed = seed;
    Model model(mc);
    ad::Adam opt(model.parameter_tensors(), {cfg.lr, 0.9, 0.999, 1e-8, cfg.weight_decay});
    Tape tape;
    tape.set_check_finite(true);

    res.initial_val_accuracy = evaluate(model, data, val_ids, cfg.batch_size);
    ModelState best = model.state();
    double best_val = -1.0;

    std::vector<std::size_t> order = train_ids;
    for (std::size_t epoch = 1; epoch <= cfg.epochs && !res.failed; ++epoch) {
        Rng shuffle_rng = make_rng({seed, static_cast<std::uint64_t>(SeedStream::Shuffle), epoch});
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        double loss_sum = 0.0;
        std::size_t batches = 0;
        for (std::size_t lo = 0; lo < order.size() && !res.failed; lo += cfg.batch_size) {
            const std::span<const std::size_t> chunk(order.data() + lo, std::min(cfg.batch_size, order.size() - lo));
            Rng dropout_rng = make_rng({seed, static_cast<std::uint64_t>(SeedStream::Dropout), epoch, batches});
            auto in = make_batch(data, chunk);
            try {
                Tensor logp = model.forward(tape, in.batch, in.features, true, dropout_rng);
                Tensor loss = nll_loss(tape, logp, in.labels);
                const double value = loss.item();
                if (epoch == 1 && batches == 0) res.initial_loss = value;
                opt.zero_grad();
                tape.backward(loss);
                opt.step();
                loss_sum += value;
                ++batches;
            } catch (const ad::NumericError& e) {
                res.failed = true;
                res.failure = "epoch " + std::to_string(epoch) + ": " + e.what();
                tape.clear();
            }
        }
        if (res.failed) break;
        res.train_loss.push_back(loss_sum / static_cast<double>(batches));
        const double val = evaluate(model, data, val_ids, cfg.batch_size);
        res.val_accuracy.push_back(val);
        if (cfg.selection == Selection::LastEpoch || val >= best_val) {
            best_val = val;
            best = model.state();
            res.best_epoch = epoch;
        }
    }

    if (!res.failed) {
        model.load_state(best);
        res.test_accuracy = evaluate(model, data, test_ids, cfg.batch_size);
        if (medium) {
            const auto medium_ids = medium->dataset->indices(Split::Test);
            res.medium_accuracy = evaluate(model, *medium, medium_ids, cfg.batch_size);
        }
    }
    res.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (trained) *trained = std::move(model);
    return res;
}

std::vector<RunResult> train(const TrainConfig& cfg, const PreparedDataset& data, const PreparedDataset* medium,
                             std::uint64_t base_seed, std::size_t workers) {
    std::vector<RunResult> runs(cfg.replications);
    parallel_for(cfg.replications, workers, [&](std::size_t r) { runs[r] = train_run(cfg, data, medium, base_seed + r); });
    return runs;
}

namespace {
MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    out.count = xs.size();
    if (xs.empty()) return out;
    out.mean = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - out.mean) * (x - out.mean);
    out.std = std::sqrt(ss / static_cast<double>(xs.size()));
    return out;
}
}  // namespace

MeanStd summarize_test_accuracy(std::span<const RunResult> runs) {
    std::vector<double> xs;
    for (const auto& r : runs) {
        if (!r.failed) xs.push_back(r.test_accuracy);
    }
    return mean_std(xs);
}

MeanStd summarize_medium_accuracy(std::span<const RunResult> runs) {
    std::vector<double> xs;
    for (const auto& r : runs) {
        if (!r.failed && r.medium_accuracy) xs.push_back(*r.medium_accuracy);
    }
    return mean_std(xs);
}

}  // namespace gclab
