#include "gclab/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gclab/generators.hpp"
#include "gclab/parallel.hpp"
#include "gclab/rng.hpp"

namespace gclab {

namespace {
constexpr std::array<std::string_view, 3> kSplitNames = {"train", "val", "test"};

bool is_grid(ClassLabel c) { return c == ClassLabel::GRID_low || c == ClassLabel::GRID_high; }
bool is_low(ClassLabel c) { return class_code(c) % 2 == 0; }

std::size_t draw_size(Rng& rng, const DatasetSpec& spec, ClassLabel label) {
    std::uniform_int_distribution<std::size_t> pick(spec.n_min, spec.n_max);
    if (!is_grid(label)) return pick(rng);
    // Rejection sampling gives a uniform draw over the factorable sizes.
    for (;;) {
        const std::size_t n = pick(rng);
        if (grid_dims(n).first != 0) return n;
    }
}

GeneratorSpec graph_spec(const DatasetSpec& spec, ClassLabel label, std::size_t index) {
    Rng rng = make_rng({spec.master_seed, static_cast<std::uint64_t>(SeedStream::Graph), class_code(label), index});
    const auto& p = spec.params;
    GeneratorSpec g;
    g.label = label;
    g.n = draw_size(rng, spec, label);
    switch (label) {
        case ClassLabel::ER_low:
        case ClassLabel::ER_high:
            g.er_p = std::min(1.0, (is_low(label) ? p.er_degree_low : p.er_degree_high) / static_cast<double>(g.n));
            break;
        case ClassLabel::WS_low:
        case ClassLabel::WS_high:
            g.ws_k = is_low(label) ? p.ws_k_low : p.ws_k_high;
            g.ws_rewire = p.ws_rewire_min + (p.ws_rewire_max - p.ws_rewire_min) * uniform01(rng);
            break;
        case ClassLabel::BA_low:
        case ClassLabel::BA_high:
            g.ba_m = is_low(label) ? p.ba_m_low : p.ba_m_high;
            break;
        case ClassLabel::GRID_low:
        case ClassLabel::GRID_high:
            g.grid_neighborhood = is_low(label) ? GridNeighborhood::VonNeumann : GridNeighborhood::Moore;
            std::tie(g.grid_rows, g.grid_cols) = grid_dims(g.n);
            break;
    }
    g.seed = rng();
    return g;
}
}  // namespace

std::string_view split_name(Split s) { return kSplitNames.at(static_cast<std::size_t>(s)); }

Split split_from_name(std::string_view name) {
    for (std::size_t i = 0; i < kSplitNames.size(); ++i) {
        if (kSplitNames[i] == name) return static_cast<Split>(i);
    }
    throw std::invalid_argument("unknown split '" + std::string(name) + "'");
}

DatasetSpec DatasetSpec::small(std::uint64_t seed) {
    DatasetSpec s;
    s.master_seed = seed;
    return s;
}

DatasetSpec DatasetSpec::medium(std::uint64_t seed) {
    DatasetSpec s;
    s.n_min = 1024;
    s.n_max = 2048;
    s.master_seed = seed;
    s.split_ratios = {0.0, 0.0, 1.0};
    return s;
}

void DatasetSpec::validate() const {
    if (per_class_count == 0) throw std::invalid_argument("dataset: per_class_count must be positive");
    if (n_min > n_max) throw std::invalid_argument("dataset: n_min exceeds n_max");
    const std::size_t largest_param = std::max({params.ws_k_low, params.ws_k_high, params.ba_m_low, params.ba_m_high});
    if (n_min <= largest_param) {
        throw std::invalid_argument("dataset: n_min must exceed every WS k and BA m (" + std::to_string(largest_param) + ")");
    }
    double total = 0.0;
    for (double r : split_ratios) {
        if (!(r >= 0.0)) throw std::invalid_argument("dataset: split ratios must be non-negative");
        total += r;
    }
    if (std::abs(total - 1.0) > 1e-9) throw std::invalid_argument("dataset: split ratios must sum to 1");
    if (params.ws_rewire_min < 0.0 || params.ws_rewire_max > 1.0 || params.ws_rewire_min > params.ws_rewire_max) {
        throw std::invalid_argument("dataset: invalid WS rewiring range");
    }
    bool grid_ok = false;
    for (std::size_t n = n_min; n <= n_max && !grid_ok; ++n) grid_ok = grid_dims(n).first != 0;
    if (!grid_ok) {
        throw std::invalid_argument("dataset: n_range [" + std::to_string(n_min) + ", " + std::to_string(n_max) +
                                    "] admits no grid with both dimensions >= 4");
    }
}

std::vector<std::size_t> LabeledDataset::indices(Split s) const {
    std::vector<std::size_t> out;
    for (const auto& g : graphs) {
        if (g.split == s) out.push_back(g.id);
    }
    return out;
}

std::size_t LabeledDataset::count(Split s) const {
    return static_cast<std::size_t>(std::count_if(graphs.begin(), graphs.end(), [s](const auto& g) { return g.split == s; }));
}

std::array<std::size_t, 3> split_counts(std::size_t count, const std::array<double, 3>& ratios) {
    std::array<std::size_t, 3> out{};
    std::array<double, 3> remainder{};
    std::size_t assigned = 0;
    for (std::size_t s = 0; s < 3; ++s) {
        const double quota = static_cast<double>(count) * ratios[s];
        out[s] = static_cast<std::size_t>(std::floor(quota));
        remainder[s] = quota - static_cast<double>(out[s]);
        assigned += out[s];
    }
    std::array<std::size_t, 3> order{0, 1, 2};
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return remainder[a] > remainder[b]; });
    for (std::size_t i = 0; assigned < count; i = (i + 1) % 3, ++assigned) ++out[order[i]];
    return out;
}

LabeledDataset build_dataset(const DatasetSpec& spec, std::size_t workers) {
    spec.validate();
    LabeledDataset ds;
    ds.metadata.spec = spec;
    const std::size_t total = spec.per_class_count * kNumClasses;
    ds.graphs.resize(total);

    parallel_for(total, workers, [&](std::size_t id) {
        const ClassLabel label = class_from_code(id / spec.per_class_count);
        const std::size_t index = id % spec.per_class_count;
        auto& slot = ds.graphs[id];
        slot.id = id;
        slot.label = label;
        slot.graph = generate(graph_spec(spec, label, index));
    });

    const auto counts = split_counts(spec.per_class_count, spec.split_ratios);
    for (std::size_t c = 0; c < kNumClasses; ++c) {
        std::vector<std::size_t> order(spec.per_class_count);
        std::iota(order.begin(), order.end(), c * spec.per_class_count);
        Rng rng = make_rng({spec.master_seed, static_cast<std::uint64_t>(SeedStream::Split), c});
        std::shuffle(order.begin(), order.end(), rng);
        std::size_t pos = 0;
        for (std::size_t s = 0; s < 3; ++s) {
            for (std::size_t j = 0; j < counts[s]; ++j) ds.graphs[order[pos++]].split = static_cast<Split>(s);
        }
    }

    for (const auto& g : ds.graphs) {
        ds.metadata.max_degree_over_dataset = std::max(ds.metadata.max_degree_over_dataset, g.graph.max_degree());
    }
    return ds;
}

}  // namespace gclab
