// gclab: generate datasets, inspect them, train models, run grids and
// summarise results.

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gclab/config.hpp"
#include "gclab/dataset.hpp"
#include "gclab/grid.hpp"
#include "gclab/netstats.hpp"
#include "gclab/parallel.hpp"
#include "gclab/persistence.hpp"
#include "gclab/results.hpp"
#include "gclab/training.hpp"

namespace fs = std::filesystem;
using namespace gclab;

namespace {

// Thrown for bad flag combinations that CLI11 cannot express.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

const std::vector<std::string> kArchNames{"gin", "gatv2", "hierarchical", "global"};
const std::vector<std::string> kFeatureNames{"ones", "noise", "degree", "norm_degree", "identity"};

std::string fmt(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::string range_cell(const Summary& s, int digits) {
    if (s.count == 0) return "-";
    return fmt(s.mean, digits) + " (" + fmt(s.min, digits) + "-" + fmt(s.max, digits) + ")";
}

// ---- generate ---------------------------------------------------------------

struct GenerateOpts {
    std::string preset = "small";
    std::uint64_t seed = 0;
    std::size_t per_class = 0;
    std::vector<std::size_t> n_range;
    std::vector<double> split;
    std::string out;
    std::size_t workers = 0;
};

void print_summary_table(std::ostream& out, const std::vector<ClassSummary>& rows) {
    out << std::left << std::setw(11) << "class" << std::setw(7) << "graphs" << std::setw(24) << "N" << std::setw(26)
        << "|E|" << std::setw(22) << "<k>" << std::setw(22) << "T" << "l\n";
    for (const auto& r : rows) {
        out << std::left << std::setw(11) << class_name(r.label) << std::setw(7) << r.graphs << std::setw(24)
            << range_cell(r.nodes, 0) << std::setw(26) << range_cell(r.edges, 0) << std::setw(22)
            << range_cell(r.avg_degree, 2) << std::setw(22) << range_cell(r.transitivity, 2)
            << range_cell(r.avg_path_length, 2) << '\n';
    }
}

int run_generate(const GenerateOpts& o) {
    DatasetSpec spec;
    if (o.preset == "small") spec = DatasetSpec::small(o.seed);
    else spec = DatasetSpec::medium(o.seed);
    if (o.per_class) spec.per_class_count = o.per_class;
    if (!o.n_range.empty()) {
        spec.n_min = o.n_range[0];
        spec.n_max = o.n_range[1];
    }
    if (!o.split.empty()) spec.split_ratios = {o.split[0], o.split[1], o.split[2]};

    const auto start = std::chrono::steady_clock::now();
    const LabeledDataset ds = build_dataset(spec, o.workers);
    const std::string out = o.out.empty() ? o.preset + ".gds" : o.out;
    save_dataset(out, ds);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::cout << "wrote " << out << ": " << ds.size() << " graphs (train " << ds.count(Split::Train) << ", val "
              << ds.count(Split::Val) << ", test " << ds.count(Split::Test) << "), N in [" << spec.n_min << ", "
              << spec.n_max << "], max degree " << ds.metadata.max_degree_over_dataset << ", " << fmt(secs, 1)
              << " s\n";
    print_summary_table(std::cout, summarize_dataset(ds, o.workers));
    return 0;
}

// ---- stats ------------------------------------------------------------------

struct StatsOpts {
    std::string data;
    std::string csv;
    std::size_t workers = 0;
};

int run_stats(const StatsOpts& o) {
    const LabeledDataset ds = load_dataset(o.data);
    if (ds.size() == 0) throw std::runtime_error("dataset '" + o.data + "' contains no graphs");
    const auto rows = summarize_dataset(ds, o.workers);
    print_summary_table(std::cout, rows);
    if (!o.csv.empty()) {
        std::ofstream csv(o.csv);
        if (!csv) throw std::runtime_error("cannot write '" + o.csv + "'");
        csv << "class,graphs";
        for (const char* s : {"nodes", "edges", "avg_degree", "density", "transitivity", "avg_path_length"})
            csv << ',' << s << "_mean," << s << "_min," << s << "_max";
        csv << '\n' << std::setprecision(10);
        for (const auto& r : rows) {
            csv << class_name(r.label) << ',' << r.graphs;
            for (const Summary* s : {&r.nodes, &r.edges, &r.avg_degree, &r.density, &r.transitivity, &r.avg_path_length}) {
                if (s->count) csv << ',' << s->mean << ',' << s->min << ',' << s->max;
                else csv << ",,,";
            }
            csv << '\n';
        }
        std::cout << "wrote " << o.csv << '\n';
    }
    return 0;
}

// ---- shared training flags --------------------------------------------------

struct TrainFlags {
    std::size_t epochs = 100;
    std::size_t batch_size = 100;
    double lr = 0.01;
    double weight_decay = 1e-3;
    double dropout = 0.5;
    double ratio = 0.5;
    std::size_t layers = 4;
    std::size_t identity_k = 4;
    std::string selection = "best";

    void add(CLI::App* app) {
        app->add_option("--epochs", epochs, "training epochs")->capture_default_str();
        app->add_option("--batch-size", batch_size, "minibatch size")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--lr", lr, "Adam learning rate")->capture_default_str()->check(CLI::NonNegativeNumber);
        app->add_option("--weight-decay", weight_decay, "L2 weight decay")->capture_default_str()->check(CLI::NonNegativeNumber);
        app->add_option("--dropout", dropout, "head dropout rate")->capture_default_str()->check(CLI::Range(0.0, 0.999999));
        app->add_option("--r", ratio, "SAGPool keep ratio")->capture_default_str()->check(CLI::Range(1e-9, 1.0));
        app->add_option("--K", layers, "number of GNN layers")->capture_default_str()->check(CLI::PositiveNumber);
        app->add_option("--identity-k", identity_k, "closed-walk depth of identity features")
            ->capture_default_str()
            ->check(CLI::PositiveNumber);
        app->add_option("--selection", selection, "model selection: best (validation) or last (epoch)")
            ->capture_default_str()
            ->check(CLI::IsMember({"best", "last"}));
    }

    TrainConfig config() const {
        TrainConfig c;
        c.epochs = epochs;
        c.batch_size = batch_size;
        c.lr = lr;
        c.weight_decay = weight_decay;
        c.model.dropout = dropout;
        c.model.ratio = ratio;
        c.model.layers = layers;
        c.selection = selection == "last" ? Selection::LastEpoch : Selection::BestValidation;
        return c;
    }
};

// ---- train ------------------------------------------------------------------

struct TrainOpts {
    std::string data;
    std::string medium;
    std::string arch = "gin";
    std::string feature;
    std::size_t hidden = 8;
    std::size_t seeds = 5;
    std::uint64_t seed = 0;
    std::string results = "results.csv";
    std::string checkpoint;
    std::size_t workers = 0;
    bool verbose = false;
    TrainFlags flags;
};

int run_train(const TrainOpts& o) {
    TrainConfig cfg = o.flags.config();
    cfg.model.arch = architecture_from_name(o.arch);
    cfg.model.feature = {feature_from_name(o.feature), o.flags.identity_k};
    cfg.model.hidden = o.hidden;
    cfg.replications = o.seeds;
    cfg.validate();

    const LabeledDataset small = load_dataset(o.data);
    const auto data = prepare(small, cfg.model.feature, o.workers);
    std::optional<LabeledDataset> medium_ds;
    std::optional<PreparedDataset> medium;
    if (!o.medium.empty()) {
        medium_ds = load_dataset(o.medium);
        medium = prepare(*medium_ds, cfg.model.feature, o.workers);
    }

    ResultsWriter writer(o.results);
    std::vector<RunResult> runs(o.seeds);
    std::optional<Model> kept;
    parallel_for(o.seeds, o.workers, [&](std::size_t r) {
        Model model(cfg.model);
        runs[r] = train_run(cfg, data, medium ? &*medium : nullptr, o.seed + r, &model);
        writer.append(make_record(cfg, runs[r]));
        if (r == 0 && !o.checkpoint.empty()) kept.emplace(std::move(model));
    });

    for (const auto& run : runs) {
        std::cout << "seed " << run.seed << ": ";
        if (run.failed) {
            std::cout << "failed (" << run.failure << ")\n";
            continue;
        }
        std::cout << "test " << fmt(run.test_accuracy, 4);
        if (run.medium_accuracy) std::cout << "  medium " << fmt(*run.medium_accuracy, 4);
        std::cout << "  best epoch " << run.best_epoch << "  " << fmt(run.wall_seconds, 1) << " s\n";
        if (o.verbose) {
            for (std::size_t e = 0; e < run.train_loss.size(); ++e)
                std::cout << "  epoch " << e + 1 << " loss " << fmt(run.train_loss[e], 4) << " val "
                          << fmt(run.val_accuracy[e], 4) << '\n';
        }
    }
    const MeanStd t = summarize_test_accuracy(runs);
    std::cout << "mean test accuracy " << fmt(t.mean, 4) << " +- " << fmt(t.std, 4) << " over " << t.count << " runs";
    if (medium) {
        const MeanStd m = summarize_medium_accuracy(runs);
        std::cout << "; medium " << fmt(m.mean, 4) << " +- " << fmt(m.std, 4);
    }
    std::cout << "\nappended " << runs.size() << (runs.size() == 1 ? " record" : " records") << " to " << o.results << '\n';
    if (kept) {
        save_checkpoint(o.checkpoint, *kept);
        std::cout << "saved seed " << o.seed << " model to " << o.checkpoint << '\n';
    }
    return 0;
}

// ---- grid -------------------------------------------------------------------

struct GridOpts {
    std::string data;
    std::string medium;
    std::vector<std::string> archs;
    std::vector<std::string> features;
    std::vector<std::size_t> hidden;
    std::size_t reps = 5;
    std::uint64_t seed = 0;
    std::string results = "results.csv";
    std::string report_dir;
    std::size_t workers = 0;
    TrainFlags flags;
};

int write_report_files(const std::string& results, const std::string& out_dir);

int run_grid_cmd(const GridOpts& o) {
    GridSpec spec;
    if (!o.archs.empty()) {
        spec.architectures.clear();
        for (const auto& a : o.archs) spec.architectures.push_back(architecture_from_name(a));
    }
    if (!o.features.empty()) {
        spec.features.clear();
        for (const auto& f : o.features) spec.features.push_back(feature_from_name(f));
    }
    if (!o.hidden.empty()) spec.hidden_values = o.hidden;
    spec.layers = o.flags.layers;
    spec.identity_k = o.flags.identity_k;
    spec.replications = o.reps;
    spec.base_seed = o.seed;
    spec.train = o.flags.config();
    spec.validate();

    const LabeledDataset small = load_dataset(o.data);
    std::optional<LabeledDataset> medium;
    if (!o.medium.empty()) medium = load_dataset(o.medium);

    const std::size_t total = enumerate_cells(spec).size();
    std::size_t done = 0;
    std::mutex print_mutex;
    const auto outcome = run_grid(spec, small, medium ? &*medium : nullptr, o.results, o.workers,
                                  [&](const GridCell& cell, const ResultRecord& rec) {
                                      std::lock_guard lock(print_mutex);
                                      ++done;
                                      std::cout << "[" << done << "] " << architecture_name(rec.arch) << ' '
                                                << feature_name(rec.feature) << " H=" << rec.hidden
                                                << " seed=" << cell.seed << ": "
                                                << (rec.failed ? std::string("failed")
                                                               : fmt(*rec.acc_small_test, 4))
                                                << '\n'
                                                << std::flush;
                                  });
    std::cout << "grid: " << total << " runs, " << outcome.executed << " executed, " << outcome.skipped
              << " already in " << o.results << ", " << outcome.failed << " failed\n";
    if (!o.report_dir.empty()) return write_report_files(o.results, o.report_dir);
    std::cout << format_summary_table(build_table(read_results(o.results)));
    return 0;
}

// ---- report -----------------------------------------------------------------

int write_report_files(const std::string& results, const std::string& out_dir) {
    const auto records = read_results(results);
    if (records.empty()) throw std::runtime_error("results file '" + results + "' has no records");
    const ResultsTable table = build_table(records);
    const ReportOutput out = write_report(table, out_dir);
    if (!out.missing_cells.empty()) {
        std::cerr << "gclab: warning: " << out.missing_cells.size() << " missing cells:";
        for (const auto& k : out.missing_cells) std::cerr << ' ' << k;
        std::cerr << '\n';
    }
    std::cout << "wrote " << out.series_files.size() << " series, cells.csv and summary.txt to " << out_dir << "\n\n"
              << format_summary_table(table);
    return 0;
}

// ---- config merging ---------------------------------------------------------

// Expands `--config FILE` into arguments placed before the user's own flags.
// Entries whose key also appears on the command line are dropped so the
// command line always wins, including for list-valued options.
std::vector<std::string> merge_config(std::vector<std::string> args) {
    std::string config_path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a file name");
            config_path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            config_path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (config_path.empty()) return rest;

    std::set<std::string> given;
    for (const auto& a : rest) {
        if (a.rfind("--", 0) == 0) given.insert(a.substr(2, a.find('=') - 2));  // npos - 2 still means "to the end"
    }
    ConfigEntries kept;
    for (auto& e : read_config_file(config_path)) {
        if (!given.count(e.first)) kept.push_back(std::move(e));
    }
    // Later duplicates in the file win: keep only the last occurrence.
    ConfigEntries last;
    for (auto it = kept.rbegin(); it != kept.rend(); ++it) {
        if (std::none_of(last.begin(), last.end(), [&](const auto& p) { return p.first == it->first; })) last.push_back(*it);
    }
    std::reverse(last.begin(), last.end());

    std::vector<std::string> out;
    // The subcommand name (first non-flag word) stays in front.
    std::size_t sub = 0;
    while (sub < rest.size() && rest[sub].rfind("-", 0) == 0) ++sub;
    if (sub == rest.size()) throw UsageError("--config needs a subcommand");
    out.insert(out.end(), rest.begin(), rest.begin() + static_cast<std::ptrdiff_t>(sub) + 1);
    const auto file_args = config_to_args(last);
    out.insert(out.end(), file_args.begin(), file_args.end());
    out.insert(out.end(), rest.begin() + static_cast<std::ptrdiff_t>(sub) + 1, rest.end());
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gclab: synthetic graph classification experiments", "gclab"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "gclab 0.1.0");
    app.add_option("--config")->description("key = value file whose entries act as default flags for the subcommand");

    const std::size_t env_workers = default_workers();

    GenerateOpts gen;
    gen.workers = env_workers;
    auto* g = app.add_subcommand("generate", "generate a labelled dataset");
    g->add_option("--preset", gen.preset, "small (N in [250, 1024], 80/10/10) or medium (N in [1024, 2048], all test)")
        ->capture_default_str()
        ->check(CLI::IsMember({"small", "medium"}));
    g->add_option("--seed", gen.seed, "master seed")->capture_default_str();
    g->add_option("--per-class", gen.per_class, "graphs per class (preset: 250)")->check(CLI::PositiveNumber);
    g->add_option("--n-range", gen.n_range, "node count range MIN MAX")->expected(2);
    g->add_option("--split", gen.split, "train/val/test ratios")->expected(3);
    g->add_option("--out", gen.out, "output file (default <preset>.gds)");
    g->add_option("--workers", gen.workers, "worker threads (default GCLAB_WORKERS or all cores)")->check(CLI::PositiveNumber);

    StatsOpts st;
    st.workers = env_workers;
    auto* s = app.add_subcommand("stats", "per-class network statistics of a dataset");
    s->add_option("data,--data", st.data, "dataset file")->required();
    s->add_option("--csv", st.csv, "also write the table as CSV");
    s->add_option("--workers", st.workers, "worker threads")->check(CLI::PositiveNumber);

    TrainOpts tr;
    tr.workers = env_workers;
    auto* t = app.add_subcommand("train", "train one configuration over several seeds");
    t->add_option("--data", tr.data, "training dataset (train/val/test splits)")->required();
    t->add_option("--medium", tr.medium, "extra dataset whose test split measures generalisation");
    t->add_option("--arch", tr.arch, "gin, gatv2, hierarchical or global")
        ->transform(CLI::IsMember(kArchNames, CLI::ignore_case).description(""))->type_name("ARCH");
    t->add_option("--feature", tr.feature, "ones, noise, degree, norm_degree or identity")
        ->transform(CLI::IsMember(kFeatureNames, CLI::ignore_case).description(""))->type_name("FEATURE")
        ->required();
    t->add_option("--H", tr.hidden, "hidden width")->capture_default_str()->check(CLI::PositiveNumber);
    t->add_option("--seeds", tr.seeds, "number of replications")->capture_default_str()->check(CLI::PositiveNumber);
    t->add_option("--seed", tr.seed, "first seed; replication r uses seed + r")->capture_default_str();
    t->add_option("--results", tr.results, "results CSV to append to")->capture_default_str();
    t->add_option("--checkpoint", tr.checkpoint, "save the first replication's model here");
    t->add_option("--workers", tr.workers, "worker threads")->check(CLI::PositiveNumber);
    t->add_flag("--verbose", tr.verbose, "print per-epoch loss and validation accuracy");
    tr.flags.add(t);

    GridOpts gr;
    gr.workers = env_workers;
    auto* gd = app.add_subcommand("grid", "run (architecture x feature x H) with replications; resumable");
    gd->add_option("--data", gr.data, "training dataset")->required();
    gd->add_option("--medium", gr.medium, "generalisation dataset");
    gd->add_option("--arch", gr.archs, "architectures (default: all)")
        ->transform(CLI::IsMember(kArchNames, CLI::ignore_case).description(""))->type_name("ARCH");
    gd->add_option("--feature", gr.features, "features (default: all)")
        ->transform(CLI::IsMember(kFeatureNames, CLI::ignore_case).description(""))->type_name("FEATURE");
    gd->add_option("--H", gr.hidden, "hidden widths (default: 1 2 3 8 16 32)")->check(CLI::PositiveNumber);
    gd->add_option("--reps", gr.reps, "replications per cell")->capture_default_str()->check(CLI::PositiveNumber);
    gd->add_option("--seed", gr.seed, "base seed")->capture_default_str();
    gd->add_option("--results", gr.results, "results CSV (existing runs are skipped)")->capture_default_str();
    gd->add_option("--report", gr.report_dir, "write report files here when done");
    gd->add_option("--workers", gr.workers, "worker threads")->check(CLI::PositiveNumber);
    gr.flags.add(gd);

    std::string report_results = "results.csv", report_out = "report";
    auto* rp = app.add_subcommand("report", "plot series and the min-H summary table from a results file");
    rp->add_option("results,--results", report_results, "results CSV")->capture_default_str();
    rp->add_option("--out", report_out, "output directory")->capture_default_str();

    try {
        std::vector<std::string> args(argv + 1, argv + argc);
        args = merge_config(std::move(args));
        std::reverse(args.begin(), args.end());  // CLI11 consumes from the back
        app.parse(args);
    } catch (const CLI::ParseError& e) {
        return app.exit(e);
    } catch (const std::exception& e) {
        std::cerr << "gclab: usage error: " << e.what() << '\n';
        return 2;
    }

    try {
        if (*g) return run_generate(gen);
        if (*s) return run_stats(st);
        if (*t) return run_train(tr);
        if (*gd) return run_grid_cmd(gr);
        if (*rp) return write_report_files(report_results, report_out);
    } catch (const UsageError& e) {
        std::cerr << "gclab: usage error: " << e.what() << '\n';
        return 2;
    } catch (const FormatError& e) {
        std::cerr << "gclab: error: malformed input: " << e.what() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "gclab: error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
