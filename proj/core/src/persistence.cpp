#include "gclab/persistence.hpp"

#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace gclab {

using nlohmann::json;

namespace {
constexpr const char* kDatasetMagic = "GDS1";
constexpr int kCheckpointVersion = 1;

json spec_to_json(const DatasetSpec& s) {
    const auto& p = s.params;
    return json{
        {"per_class_count", s.per_class_count},
        {"n_range", {s.n_min, s.n_max}},
        {"master_seed", s.master_seed},
        {"split_ratios", {s.split_ratios[0], s.split_ratios[1], s.split_ratios[2]}},
        {"class_params",
         {{"er_degree", {p.er_degree_low, p.er_degree_high}},
          {"ws_k", {p.ws_k_low, p.ws_k_high}},
          {"ws_rewire_range", {p.ws_rewire_min, p.ws_rewire_max}},
          {"ba_m", {p.ba_m_low, p.ba_m_high}},
          {"grid_neighborhood", {"von_neumann", "moore"}}}},
    };
}

DatasetSpec spec_from_json(const json& j) {
    DatasetSpec s;
    s.per_class_count = j.at("per_class_count").get<std::size_t>();
    s.n_min = j.at("n_range").at(0).get<std::size_t>();
    s.n_max = j.at("n_range").at(1).get<std::size_t>();
    s.master_seed = j.at("master_seed").get<std::uint64_t>();
    for (std::size_t i = 0; i < 3; ++i) s.split_ratios[i] = j.at("split_ratios").at(i).get<double>();
    const auto& p = j.at("class_params");
    s.params.er_degree_low = p.at("er_degree").at(0).get<double>();
    s.params.er_degree_high = p.at("er_degree").at(1).get<double>();
    s.params.ws_k_low = p.at("ws_k").at(0).get<std::size_t>();
    s.params.ws_k_high = p.at("ws_k").at(1).get<std::size_t>();
    s.params.ws_rewire_min = p.at("ws_rewire_range").at(0).get<double>();
    s.params.ws_rewire_max = p.at("ws_rewire_range").at(1).get<double>();
    s.params.ba_m_low = p.at("ba_m").at(0).get<std::size_t>();
    s.params.ba_m_high = p.at("ba_m").at(1).get<std::size_t>();
    return s;
}

json matrix_entry(const std::string& name, const ad::Matrix& m) {
    return json{{"name", name}, {"rows", m.rows}, {"cols", m.cols}, {"data", m.data}};
}

std::pair<std::string, ad::Matrix> matrix_from_entry(const json& j) {
    ad::Matrix m(j.at("rows").get<std::size_t>(), j.at("cols").get<std::size_t>(), j.at("data").get<std::vector<double>>());
    return {j.at("name").get<std::string>(), std::move(m)};
}
}  // namespace

FormatError::FormatError(const std::string& source, std::size_t line, const std::string& what)
    : std::runtime_error(source + ":" + std::to_string(line) + ": " + what), line_(line) {}

void write_dataset(std::ostream& out, const LabeledDataset& ds) {
    json meta{
        {"format_version", 1},
        {"spec", spec_to_json(ds.metadata.spec)},
        {"num_graphs", ds.size()},
        {"max_degree_over_dataset", ds.metadata.max_degree_over_dataset},
        {"split_counts",
         {{"train", ds.count(Split::Train)}, {"val", ds.count(Split::Val)}, {"test", ds.count(Split::Test)}}},
    };
    out << kDatasetMagic << ' ' << meta.dump() << '\n';
    for (const auto& g : ds.graphs) {
        out << "G " << g.id << ' ' << class_name(g.label) << ' ' << split_name(g.split) << ' ' << g.graph.num_nodes()
            << ' ' << g.graph.num_edges() << '\n';
        for (auto [u, v] : g.graph.to_edge_list()) out << u << ' ' << v << '\n';
    }
}

LabeledDataset read_dataset(std::istream& in, const std::string& source) {
    std::string line;
    std::size_t lineno = 0;
    auto fail = [&](const std::string& what) -> FormatError { return FormatError(source, lineno, what); };

    if (!std::getline(in, line)) throw FormatError(source, 0, "empty dataset file");
    ++lineno;
    if (line.rfind(std::string(kDatasetMagic) + ' ', 0) != 0) throw fail("missing GDS1 header");
    LabeledDataset ds;
    std::size_t declared_graphs = 0;
    try {
        const json meta = json::parse(line.substr(5));
        if (meta.at("format_version").get<int>() != 1) throw fail("unsupported format_version");
        ds.metadata.spec = spec_from_json(meta.at("spec"));
        ds.metadata.max_degree_over_dataset = meta.at("max_degree_over_dataset").get<std::size_t>();
        declared_graphs = meta.at("num_graphs").get<std::size_t>();
    } catch (const json::exception& e) {
        throw fail(std::string("bad metadata: ") + e.what());
    }

    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream head(line);
        std::string tag, cls, split;
        std::size_t id = 0, n = 0, m = 0;
        if (!(head >> tag >> id >> cls >> split >> n >> m) || tag != "G") throw fail("expected 'G <id> <class> <split> <n> <m>'");
        if (id != ds.graphs.size()) throw fail("graph ids must be consecutive from 0");
        LabeledGraph g;
        g.id = id;
        try {
            g.label = class_from_name(cls);
            g.split = split_from_name(split);
        } catch (const std::invalid_argument& e) {
            throw fail(e.what());
        }
        std::vector<Edge> edges;
        edges.reserve(m);
        for (std::size_t e = 0; e < m; ++e) {
            if (!std::getline(in, line)) throw fail("unexpected end of file inside graph " + std::to_string(id));
            ++lineno;
            std::istringstream row(line);
            std::size_t u = 0, v = 0;
            if (!(row >> u >> v)) throw fail("expected an edge 'u v'");
            if (u >= v || v >= n) throw fail("edge must satisfy u < v < n");
            if (!edges.empty() && Edge(u, v) <= edges.back()) throw fail("edges must be strictly ascending");
            edges.emplace_back(static_cast<NodeId>(u), static_cast<NodeId>(v));
        }
        g.graph = Graph::from_edge_list(n, edges);
        ds.graphs.push_back(std::move(g));
    }
    if (ds.graphs.size() != declared_graphs) {
        throw FormatError(source, lineno, "metadata declares " + std::to_string(declared_graphs) + " graphs, found " +
                                              std::to_string(ds.graphs.size()));
    }
    std::size_t max_degree = 0;
    for (const auto& g : ds.graphs) max_degree = std::max(max_degree, g.graph.max_degree());
    if (max_degree != ds.metadata.max_degree_over_dataset) {
        throw FormatError(source, lineno, "max_degree_over_dataset does not match the stored graphs");
    }
    return ds;
}

void save_dataset(const std::filesystem::path& path, const LabeledDataset& ds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    write_dataset(out, ds);
    if (!out.flush()) throw std::runtime_error("failed writing '" + path.string() + "'");
}

LabeledDataset load_dataset(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open dataset '" + path.string() + "'");
    return read_dataset(in, path.string());
}

void save_checkpoint(const std::filesystem::path& path, const Model& model) {
    const auto& c = model.config();
    json doc{
        {"format", "gclab-checkpoint"},
        {"version", kCheckpointVersion},
        {"config",
         {{"arch", architecture_name(c.arch)},
          {"feature", feature_name(c.feature.type)},
          {"identity_k", c.feature.identity_k},
          {"H", c.hidden},
          {"K", c.layers},
          {"r", c.ratio},
          {"dropout", c.dropout},
          {"seed", c.seed}}},
    };
    const auto state = model.state();
    doc["params"] = json::array();
    for (const auto& [name, m] : state.params) doc["params"].push_back(matrix_entry(name, m));
    doc["buffers"] = json::array();
    for (const auto& [name, m] : state.buffers) doc["buffers"].push_back(matrix_entry(name, m));
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
    out << doc.dump(1) << '\n';
}

Model load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open checkpoint '" + path.string() + "'");
    json doc;
    try {
        doc = json::parse(in);
        if (doc.at("format").get<std::string>() != "gclab-checkpoint") throw FormatError(path.string(), 0, "not a checkpoint");
        if (doc.at("version").get<int>() != kCheckpointVersion) throw FormatError(path.string(), 0, "unsupported version");
        const auto& c = doc.at("config");
        ModelConfig cfg;
        cfg.arch = architecture_from_name(c.at("arch").get<std::string>());
        cfg.feature = {feature_from_name(c.at("feature").get<std::string>()), c.at("identity_k").get<std::size_t>()};
        cfg.hidden = c.at("H").get<std::size_t>();
        cfg.layers = c.at("K").get<std::size_t>();
        cfg.ratio = c.at("r").get<double>();
        cfg.dropout = c.at("dropout").get<double>();
        cfg.seed = c.at("seed").get<std::uint64_t>();
        Model model(cfg);
        ModelState state;
        for (const auto& e : doc.at("params")) state.params.push_back(matrix_from_entry(e));
        for (const auto& e : doc.at("buffers")) state.buffers.push_back(matrix_from_entry(e));
        model.load_state(state);
        return model;
    } catch (const json::exception& e) {
        throw FormatError(path.string(), 0, std::string("bad checkpoint: ") + e.what());
    }
}

}  // namespace gclab
