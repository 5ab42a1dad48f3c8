#include "gclab/results.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace gclab {

namespace {

std::string fmt_double(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

std::string fmt_fixed(double v, int digits) {
    std::ostringstream s;
    s << std::fixed << std::setprecision(digits) << v;
    return s.str();
}

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

template <class T>
T parse_number(const std::string& s, const char* field) {
    T v{};
    if constexpr (std::is_floating_point_v<T>) {
        try {
            std::size_t used = 0;
            v = static_cast<T>(std::stod(s, &used));
            if (used != s.size()) throw std::invalid_argument(s);
        } catch (const std::exception&) {
            throw std::invalid_argument(std::string("results: bad value '") + s + "' for " + field);
        }
    } else {
        auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        if (ec != std::errc() || ptr != s.data() + s.size()) {
            throw std::invalid_argument(std::string("results: bad value '") + s + "' for " + field);
        }
    }
    return v;
}

std::string opt_h(const std::optional<std::size_t>& h) { return h ? std::to_string(*h) : "-"; }

}  // namespace

ResultRecord make_record(const TrainConfig& cfg, const RunResult& run) {
    ResultRecord r;
    r.arch = cfg.model.arch;
    r.feature = cfg.model.feature.type;
    r.hidden = cfg.model.hidden;
    r.layers = cfg.model.layers;
    r.ratio = cfg.model.ratio;
    r.identity_k = cfg.model.feature.identity_k;
    r.seed = run.seed;
    r.epoch_best = run.best_epoch;
    r.failed = run.failed;
    if (!run.failed) {
        r.acc_small_test = run.test_accuracy;
        r.acc_medium = run.medium_accuracy;
    }
    r.wall_s = run.wall_seconds;
    r.epochs = cfg.epochs;
    r.batch_size = cfg.batch_size;
    r.lr = cfg.lr;
    r.weight_decay = cfg.weight_decay;
    r.dropout = cfg.model.dropout;
    return r;
}

const std::string& results_header() {
    static const std::string header =
        "arch,feature,H,K,r,identity_k,seed,epoch_best,acc_small_test,acc_medium,wall_s,status,epochs,batch_size,lr,"
        "weight_decay,dropout";
    return header;
}

std::string format_record(const ResultRecord& r) {
    std::ostringstream s;
    s << architecture_name(r.arch) << ',' << feature_name(r.feature) << ',' << r.hidden << ',' << r.layers << ','
      << fmt_double(r.ratio) << ',' << r.identity_k << ',' << r.seed << ',' << r.epoch_best << ','
      << (r.acc_small_test ? fmt_double(*r.acc_small_test) : "") << ','
      << (r.acc_medium ? fmt_double(*r.acc_medium) : "") << ',' << fmt_fixed(r.wall_s, 3) << ','
      << (r.failed ? "failed" : "ok") << ',' << r.epochs << ',' << r.batch_size << ',' << fmt_double(r.lr) << ','
      << fmt_double(r.weight_decay) << ',' << fmt_double(r.dropout);
    return s.str();
}

ResultRecord parse_record(const std::string& line) {
    const auto f = split_csv(line);
    if (f.size() != 17) throw std::invalid_argument("results: expected 17 fields, got " + std::to_string(f.size()));
    ResultRecord r;
    r.arch = architecture_from_name(f[0]);
    r.feature = feature_from_name(f[1]);
    r.hidden = parse_number<std::size_t>(f[2], "H");
    r.layers = parse_number<std::size_t>(f[3], "K");
    r.ratio = parse_number<double>(f[4], "r");
    r.identity_k = parse_number<std::size_t>(f[5], "identity_k");
    r.seed = parse_number<std::uint64_t>(f[6], "seed");
    r.epoch_best = parse_number<std::size_t>(f[7], "epoch_best");
    if (!f[8].empty()) r.acc_small_test = parse_number<double>(f[8], "acc_small_test");
    if (!f[9].empty()) r.acc_medium = parse_number<double>(f[9], "acc_medium");
    r.wall_s = parse_number<double>(f[10], "wall_s");
    if (f[11] != "ok" && f[11] != "failed") throw std::invalid_argument("results: bad status '" + f[11] + "'");
    r.failed = f[11] == "failed";
    r.epochs = parse_number<std::size_t>(f[12], "epochs");
    r.batch_size = parse_number<std::size_t>(f[13], "batch_size");
    r.lr = parse_number<double>(f[14], "lr");
    r.weight_decay = parse_number<double>(f[15], "weight_decay");
    r.dropout = parse_number<double>(f[16], "dropout");
    return r;
}

std::vector<ResultRecord> read_results(const std::filesystem::path& path) {
    std::vector<ResultRecord> out;
    std::ifstream in(path);
    if (!in) return out;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        if (lineno == 1) {
            if (line != results_header()) throw std::invalid_argument(path.string() + ": unexpected results header");
            continue;
        }
        try {
            out.push_back(parse_record(line));
        } catch (const std::exception& e) {
            throw std::invalid_argument(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return out;
}

ResultsWriter::ResultsWriter(const std::filesystem::path& path) {
    std::error_code ec;
    const bool fresh = !std::filesystem::exists(path, ec) || std::filesystem::file_size(path, ec) == 0;
    out_.open(path, std::ios::app);
    if (!out_) throw std::runtime_error("cannot open results file '" + path.string() + "'");
    if (fresh) out_ << results_header() << '\n' << std::flush;
}

void ResultsWriter::append(const ResultRecord& r) {
    std::lock_guard lock(mutex_);
    out_ << format_record(r) << '\n' << std::flush;
    if (!out_) throw std::runtime_error("failed appending to results file");
}

namespace {
AccuracyStats stats_of(const std::vector<double>& xs) {
    AccuracyStats s;
    s.count = xs.size();
    if (xs.empty()) return s;
    for (double x : xs) s.mean += x;
    s.mean /= static_cast<double>(xs.size());
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(xs.size()));
    return s;
}

// Accuracy comparisons tolerate float noise so that a mean of exactly 1.0
// computed as a sum of fractions still counts as 100%.
bool reaches(const AccuracyStats& s, double level) { return s.count > 0 && s.mean >= level - 1e-12; }
}  // namespace

ResultsTable build_table(const std::vector<ResultRecord>& records) {
    using CellKey = std::tuple<Architecture, FeatureType, std::size_t>;
    std::map<CellKey, std::pair<std::vector<double>, std::vector<double>>> acc;
    std::map<CellKey, std::size_t> failed;
    for (const auto& r : records) {
        const CellKey key{r.arch, r.feature, r.hidden};
        auto& slot = acc[key];
        if (r.failed) {
            ++failed[key];
            continue;
        }
        if (r.acc_small_test) slot.first.push_back(*r.acc_small_test);
        if (r.acc_medium) slot.second.push_back(*r.acc_medium);
    }
    ResultsTable t;
    for (const auto& [key, values] : acc) {
        CellStats c;
        std::tie(c.arch, c.feature, c.hidden) = key;
        c.small = stats_of(values.first);
        c.medium = stats_of(values.second);
        c.failed = failed.count(key) ? failed.at(key) : 0;
        t.cells.push_back(c);
    }
    t.summaries = derive_summaries(t.cells);
    return t;
}

std::vector<ModelSummary> derive_summaries(const std::vector<CellStats>& cells) {
    std::map<std::pair<Architecture, FeatureType>, std::vector<const CellStats*>> groups;
    for (const auto& c : cells) groups[{c.arch, c.feature}].push_back(&c);
    std::vector<ModelSummary> out;
    for (auto& [key, group] : groups) {
        std::sort(group.begin(), group.end(), [](auto* a, auto* b) { return a->hidden < b->hidden; });
        ModelSummary s;
        s.arch = key.first;
        s.feature = key.second;
        for (std::size_t l = 0; l < kAccuracyLevels.size(); ++l) {
            for (const CellStats* c : group) {
                if (!s.min_h_small[l] && reaches(c->small, kAccuracyLevels[l])) s.min_h_small[l] = c->hidden;
                if (!s.min_h_medium[l] && reaches(c->medium, kAccuracyLevels[l])) s.min_h_medium[l] = c->hidden;
            }
        }
        std::size_t small_hits = 0, both_hits = 0;
        for (const CellStats* c : group) {
            if (!reaches(c->small, 0.90)) continue;
            ++small_hits;
            if (reaches(c->medium, 0.90)) ++both_hits;
        }
        if (small_hits > 0) s.generalisation = static_cast<double>(both_hits) / static_cast<double>(small_hits);
        out.push_back(s);
    }
    return out;
}

std::string format_cells_csv(const ResultsTable& t) {
    std::ostringstream s;
    s << "arch,feature,H,runs,failed,small_mean,small_std,medium_mean,medium_std\n";
    for (const auto& c : t.cells) {
        s << architecture_name(c.arch) << ',' << feature_name(c.feature) << ',' << c.hidden << ',' << c.small.count
          << ',' << c.failed << ',';
        if (c.small.count) s << fmt_fixed(c.small.mean, 4) << ',' << fmt_fixed(c.small.std, 4);
        else s << ',';
        s << ',';
        if (c.medium.count) s << fmt_fixed(c.medium.mean, 4) << ',' << fmt_fixed(c.medium.std, 4);
        else s << ',';
        s << '\n';
    }
    return s.str();
}

std::string format_summary_table(const ResultsTable& t) {
    std::vector<Architecture> archs;
    std::vector<FeatureType> feats;
    for (const auto& s : t.summaries) {
        if (std::find(archs.begin(), archs.end(), s.arch) == archs.end()) archs.push_back(s.arch);
        if (std::find(feats.begin(), feats.end(), s.feature) == feats.end()) feats.push_back(s.feature);
    }
    std::sort(feats.begin(), feats.end());
    auto cell = [&](Architecture a, FeatureType f) -> std::string {
        for (const auto& s : t.summaries) {
            if (s.arch != a || s.feature != f) continue;
            std::string out;
            for (std::size_t l = 0; l < kAccuracyLevels.size(); ++l) {
                out += opt_h(s.min_h_small[l]) + "," + opt_h(s.min_h_medium[l]) + " | ";
            }
            out += s.generalisation ? fmt_fixed(100.0 * *s.generalisation, 0) + "%" : "-";
            return out;
        }
        return "";
    };

    std::vector<std::vector<std::string>> grid;
    grid.push_back({"arch \\ feature"});
    for (auto f : feats) grid.back().push_back(feature_name(f));
    for (auto a : archs) {
        grid.push_back({architecture_name(a)});
        for (auto f : feats) grid.back().push_back(cell(a, f));
    }
    std::vector<std::size_t> width(grid.front().size(), 0);
    for (const auto& row : grid) {
        for (std::size_t c = 0; c < row.size(); ++c) width[c] = std::max(width[c], row[c].size());
    }
    std::ostringstream s;
    s << "min H reaching 100% | 95% | 90% accuracy as small,medium; last column: 90% generalisation\n";
    for (const auto& row : grid) {
        for (std::size_t c = 0; c < row.size(); ++c) {
            s << std::left << std::setw(static_cast<int>(width[c])) << row[c] << (c + 1 < row.size() ? "  " : "");
        }
        s << '\n';
    }
    return s.str();
}

ReportOutput write_report(const ResultsTable& t, const std::filesystem::path& out_dir) {
    std::filesystem::create_directories(out_dir);
    ReportOutput out;
    std::set<Architecture> archs;
    std::set<FeatureType> feats;
    std::set<std::size_t> hs;
    std::map<std::tuple<Architecture, FeatureType, std::size_t>, const CellStats*> index;
    for (const auto& c : t.cells) {
        archs.insert(c.arch);
        feats.insert(c.feature);
        hs.insert(c.hidden);
        index[{c.arch, c.feature, c.hidden}] = &c;
    }
    for (auto a : archs) {
        for (auto f : feats) {
            for (std::size_t h : hs) {
                if (!index.count({a, f, h})) {
                    out.missing_cells.push_back(architecture_name(a) + "/" + feature_name(f) + "/" + std::to_string(h));
                }
            }
            for (const char* which : {"small", "medium"}) {
                const auto path = out_dir / ("series_" + architecture_name(a) + "_" + feature_name(f) + "_" + which + ".csv");
                std::ofstream s(path);
                if (!s) throw std::runtime_error("cannot write '" + path.string() + "'");
                s << "H,mean,std,runs\n";
                for (std::size_t h : hs) {
                    s << h << ',';
                    auto it = index.find({a, f, h});
                    const AccuracyStats* st = nullptr;
                    if (it != index.end()) st = std::string(which) == "small" ? &it->second->small : &it->second->medium;
                    if (st && st->count) s << fmt_fixed(st->mean, 6) << ',' << fmt_fixed(st->std, 6) << ',' << st->count;
                    else s << ",,0";
                    s << '\n';
                }
                out.series_files.push_back(path);
            }
        }
    }
    std::ofstream(out_dir / "cells.csv") << format_cells_csv(t);
    std::ofstream(out_dir / "summary.txt") << format_summary_table(t);
    return out;
}

}  // namespace gclab
