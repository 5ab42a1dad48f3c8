#include "gclab/grid.hpp"

#include <map>
#include <mutex>
#include <set>
#include <stdexcept>

#include "gclab/parallel.hpp"

namespace gclab {

void GridSpec::validate() const {
    if (architectures.empty() || features.empty() || hidden_values.empty()) {
        throw std::invalid_argument("grid: architectures, features and H values must be nonempty");
    }
    if (replications == 0) throw std::invalid_argument("grid: replications must be positive");
    for (auto h : hidden_values) {
        if (h == 0) throw std::invalid_argument("grid: H values must be positive");
    }
    for (const auto& cell : enumerate_cells(*this)) cell.config.validate();
}

ResultRecord::Key GridCell::key() const {
    const auto& m = config.model;
    return {m.arch, m.feature.type, m.hidden, m.layers, m.ratio, m.feature.identity_k, seed};
}

std::vector<GridCell> enumerate_cells(const GridSpec& spec) {
    std::vector<GridCell> cells;
    for (auto arch : spec.architectures) {
        for (auto feature : spec.features) {
            for (auto h : spec.hidden_values) {
                for (std::size_t r = 0; r < spec.replications; ++r) {
                    GridCell c;
                    c.config = spec.train;
                    c.config.model.arch = arch;
                    c.config.model.feature = {feature, spec.identity_k};
                    c.config.model.hidden = h;
                    c.config.model.layers = spec.layers;
                    c.config.replications = 1;
                    c.seed = spec.base_seed + r;
                    cells.push_back(c);
                }
            }
        }
    }
    return cells;
}

GridOutcome run_grid(const GridSpec& spec, const LabeledDataset& small, const LabeledDataset* medium,
                     const std::filesystem::path& results_path, std::size_t workers, const GridProgress& progress) {
    spec.validate();
    std::set<ResultRecord::Key> done;
    for (const auto& r : read_results(results_path)) done.insert(r.key());

    GridOutcome outcome;
    std::vector<GridCell> todo;
    for (auto& c : enumerate_cells(spec)) {
        if (done.count(c.key())) ++outcome.skipped;
        else todo.push_back(std::move(c));
    }
    if (todo.empty()) return outcome;

    // Features are computed once per strategy and shared read-only by the runs.
    std::map<FeatureType, PreparedDataset> small_data, medium_data;
    for (const auto& c : todo) {
        const auto kind = c.config.model.feature;
        if (small_data.count(kind.type)) continue;
        small_data.emplace(kind.type, prepare(small, kind, workers));
        if (medium) medium_data.emplace(kind.type, prepare(*medium, kind, workers));
    }

    ResultsWriter writer(results_path);
    std::mutex progress_mutex;
    parallel_for(todo.size(), workers, [&](std::size_t i) {
        const auto& cell = todo[i];
        const auto type = cell.config.model.feature.type;
        const PreparedDataset* med = medium ? &medium_data.at(type) : nullptr;
        const RunResult run = train_run(cell.config, small_data.at(type), med, cell.seed);
        const ResultRecord record = make_record(cell.config, run);
        writer.append(record);
        std::lock_guard lock(progress_mutex);
        ++outcome.executed;
        if (run.failed) ++outcome.failed;
        if (progress) progress(cell, record);
    });
    return outcome;
}

}  // namespace gclab
