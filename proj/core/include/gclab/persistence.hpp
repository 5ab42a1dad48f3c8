#pragma once

#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "gclab/dataset.hpp"
#include "gclab/model.hpp"

namespace gclab {

/// Malformed or inconsistent input file.
class FormatError : public std::runtime_error {
public:
    FormatError(const std::string& source, std::size_t line, const std::string& what);
    std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

/// Dataset text container, version 1:
///
///     GDS1 <json metadata on one line>
///     G <id> <class-name> <split> <n> <m>
///     u v            (m lines, u < v, ascending)
///     ...
///
/// The metadata object carries the generating spec, the per-split counts and
/// max_degree_over_dataset. Writing is deterministic, so a write/read/write
/// cycle reproduces the file byte for byte.
void write_dataset(std::ostream& out, const LabeledDataset& ds);
LabeledDataset read_dataset(std::istream& in, const std::string& source = "<stream>");

void save_dataset(const std::filesystem::path& path, const LabeledDataset& ds);
LabeledDataset load_dataset(const std::filesystem::path& path);

/// Model checkpoint: a JSON document {"format": "gclab-checkpoint",
/// "version": 1, "config": {...}, "params": [...], "buffers": [...]} where
/// every array entry is {"name", "rows", "cols", "data"}.
void save_checkpoint(const std::filesystem::path& path, const Model& model);
Model load_checkpoint(const std::filesystem::path& path);

}  // namespace gclab
