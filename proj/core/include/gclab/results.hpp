#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <tuple>
#include <vector>

#include "gclab/features.hpp"
#include "gclab/model.hpp"
#include "gclab/training.hpp"

namespace gclab {

/// One row of the append-only results CSV.
struct ResultRecord {
    Architecture arch = Architecture::GIN;
    FeatureType feature = FeatureType::Ones;
    std::size_t hidden = 0;
    std::size_t layers = 0;
    double ratio = 0.5;
    std::size_t identity_k = 0;
    std::uint64_t seed = 0;
    std::size_t epoch_best = 0;
    std::optional<double> acc_small_test;  // empty for failed runs
    std::optional<double> acc_medium;
    double wall_s = 0.0;
    bool failed = false;
    // Echo of the training settings the run used.
    std::size_t epochs = 0;
    std::size_t batch_size = 0;
    double lr = 0.0;
    double weight_decay = 0.0;
    double dropout = 0.0;

    using Key = std::tuple<Architecture, FeatureType, std::size_t, std::size_t, double, std::size_t, std::uint64_t>;
    /// Identity of a run for resuming: (arch, feature, H, K, r, identity_k, seed).
    Key key() const { return {arch, feature, hidden, layers, ratio, identity_k, seed}; }
};

ResultRecord make_record(const TrainConfig& cfg, const RunResult& run);

/// arch,feature,H,K,r,identity_k,seed,epoch_best,acc_small_test,acc_medium,wall_s,status,epochs,batch_size,lr,weight_decay,dropout
const std::string& results_header();
std::string format_record(const ResultRecord& r);
ResultRecord parse_record(const std::string& line);

/// Reads every record of a results file; a missing file yields no records.
std::vector<ResultRecord> read_results(const std::filesystem::path& path);

/// Serialized appender: the header is written when the file is new or empty
/// and every append is flushed before the lock is released.
class ResultsWriter {
public:
    explicit ResultsWriter(const std::filesystem::path& path);
    void append(const ResultRecord& r);

private:
    std::mutex mutex_;
    std::ofstream out_;
};

struct AccuracyStats {
    double mean = 0.0;
    double std = 0.0;
    std::size_t count = 0;
};

struct CellStats {
    Architecture arch = Architecture::GIN;
    FeatureType feature = FeatureType::Ones;
    std::size_t hidden = 0;
    AccuracyStats small;
    AccuracyStats medium;
    std::size_t failed = 0;
};

inline constexpr std::array<double, 3> kAccuracyLevels{1.0, 0.95, 0.90};

/// Per (arch, feature): minimum H reaching each accuracy level on the small
/// test split and on the medium set, and the fraction of H values reaching
/// 0.9 on the small set that also reach 0.9 on the medium set.
struct ModelSummary {
    Architecture arch = Architecture::GIN;
    FeatureType feature = FeatureType::Ones;
    std::array<std::optional<std::size_t>, 3> min_h_small;
    std::array<std::optional<std::size_t>, 3> min_h_medium;
    std::optional<double> generalisation;
};

struct ResultsTable {
    std::vector<CellStats> cells;          // sorted by (arch, feature, H)
    std::vector<ModelSummary> summaries;   // sorted by (arch, feature)
};

ResultsTable build_table(const std::vector<ResultRecord>& records);

/// Recomputes the derived columns from the cell means.
std::vector<ModelSummary> derive_summaries(const std::vector<CellStats>& cells);

/// Cell means as CSV: arch,feature,H,runs,failed,small_mean,small_std,medium_mean,medium_std
std::string format_cells_csv(const ResultsTable& t);
/// Aligned text: architectures as rows, features as columns, each cell
/// "h100 s/m | h95 s/m | h90 s/m | gen".
std::string format_summary_table(const ResultsTable& t);

struct ReportOutput {
    std::vector<std::filesystem::path> series_files;
    std::vector<std::string> missing_cells;  // "arch/feature/H" keys absent from the results
};

/// Writes one CSV series per (arch, feature, dataset) with columns
/// H,mean,std,runs (blank values where a cell is missing), plus cells.csv
/// and summary.txt.
ReportOutput write_report(const ResultsTable& t, const std::filesystem::path& out_dir);

}  // namespace gclab
