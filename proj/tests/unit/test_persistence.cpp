#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "gclab/persistence.hpp"

using namespace gclab;
namespace fs = std::filesystem;

namespace {

const LabeledDataset& small_dataset() {
    static const LabeledDataset ds = [] {
        DatasetSpec s;
        s.per_class_count = 3;
        s.n_min = 30;
        s.n_max = 60;
        s.master_seed = 17;
        return build_dataset(s);
    }();
    return ds;
}

std::string serialize(const LabeledDataset& ds) {
    std::ostringstream out;
    write_dataset(out, ds);
    return out.str();
}

LabeledDataset parse(const std::string& text) {
    std::istringstream in(text);
    return read_dataset(in, "test");
}

std::size_t error_line(const std::string& text) {
    try {
        parse(text);
    } catch (const FormatError& e) {
        return e.line();
    }
    return 0;
}

struct TempDir {
    fs::path path;
    TempDir() : path(fs::temp_directory_path() / ("gclab_persist_" + std::to_string(std::rand()))) { fs::create_directories(path); }
    ~TempDir() { fs::remove_all(path); }
};

}  // namespace

TEST_SUITE("persistence") {

TEST_CASE("dataset text round trips byte for byte") {
    const std::string first = serialize(small_dataset());
    const LabeledDataset back = parse(first);
    CHECK(serialize(back) == first);
    REQUIRE(back.size() == small_dataset().size());
    for (std::size_t i = 0; i < back.size(); ++i) {
        CHECK(back.graphs[i].graph == small_dataset().graphs[i].graph);
        CHECK(back.graphs[i].label == small_dataset().graphs[i].label);
        CHECK(back.graphs[i].split == small_dataset().graphs[i].split);
    }
    CHECK(back.metadata.max_degree_over_dataset == small_dataset().metadata.max_degree_over_dataset);
    CHECK(back.metadata.spec.master_seed == 17);
}

TEST_CASE("dataset files round trip") {
    TempDir dir;
    const auto file = dir.path / "ds.gds";
    save_dataset(file, small_dataset());
    const auto back = load_dataset(file);
    const auto again = dir.path / "again.gds";
    save_dataset(again, back);
    std::ifstream a(file, std::ios::binary), b(again, std::ios::binary);
    const std::string sa((std::istreambuf_iterator<char>(a)), {}), sb((std::istreambuf_iterator<char>(b)), {});
    CHECK(sa == sb);
    CHECK_THROWS_AS(load_dataset(dir.path / "missing.gds"), std::runtime_error);
}

TEST_CASE("malformed datasets name the failing line") {
    const std::string good = serialize(small_dataset());
    const auto first_nl = good.find('\n');
    const std::string header = good.substr(0, first_nl + 1);

    CHECK_THROWS_AS(parse(""), FormatError);
    CHECK(error_line("GDS2 {}\n") == 1);
    CHECK(error_line("GDS1 {not json\n") == 1);

    // Break the first edge line (line 3): reversed endpoints.
    {
        std::istringstream in(good);
        std::string l1, l2, l3, rest;
        std::getline(in, l1);
        std::getline(in, l2);
        std::getline(in, l3);
        rest.assign(std::istreambuf_iterator<char>(in), {});
        std::istringstream e(l3);
        int u, v;
        e >> u >> v;
        const std::string swapped = l1 + "\n" + l2 + "\n" + std::to_string(v) + " " + std::to_string(u) + "\n" + rest;
        CHECK(error_line(swapped) == 3);
        const std::string garbage = l1 + "\n" + l2 + "\nx y\n" + rest;
        CHECK(error_line(garbage) == 3);
        const std::string bad_class = l1 + "\nG 0 NOPE train 5 0\n";
        CHECK(error_line(bad_class) == 2);
    }

    // Truncation inside a graph.
    const auto cut = good.rfind('\n', good.size() - 2);
    CHECK_THROWS_AS(parse(good.substr(0, cut + 1)), FormatError);

    // Graph count disagrees with the metadata.
    CHECK_THROWS_AS(parse(header), FormatError);
}

TEST_CASE("checkpoints restore the model exactly") {
    TempDir dir;
    ModelConfig cfg;
    cfg.arch = Architecture::GATv2;
    cfg.feature = FeatureKind::identity(3);
    cfg.hidden = 5;
    cfg.layers = 2;
    cfg.seed = 11;
    const Model model(cfg);
    const auto file = dir.path / "model.json";
    save_checkpoint(file, model);
    const Model back = load_checkpoint(file);
    CHECK(back.config().arch == cfg.arch);
    CHECK(back.config().feature == cfg.feature);
    CHECK(back.config().hidden == 5);
    CHECK(back.state().params == model.state().params);
    CHECK(back.state().buffers == model.state().buffers);

    std::ofstream(dir.path / "bad.json") << "{\"format\": \"something-else\"}";
    CHECK_THROWS_AS(load_checkpoint(dir.path / "bad.json"), FormatError);
    std::ofstream(dir.path / "trunc.json") << "{\"format\": ";
    CHECK_THROWS_AS(load_checkpoint(dir.path / "trunc.json"), FormatError);
}

}
