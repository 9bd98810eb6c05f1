#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "metamine/data_model.hpp"
#include "metamine/preference.hpp"

namespace metamine::io {

/// Malformed or unreadable input file; the message names the file.
class FormatError : public Error {
 public:
  using Error::Error;
};

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
};

/// Reads a comma-separated (or tab-separated, for .tsv files or tab headers)
/// file with a mandatory header row. Double-quoted fields are supported.
CsvTable read_csv(const std::filesystem::path& path);

void write_csv(const std::filesystem::path& path, const CsvTable& table);

/// Shortest round-trip decimal representation.
std::string format_double(double value);

/// First column entity id, remaining columns named numeric features.
DescriptorTable read_descriptors(const std::filesystem::path& path, EntityKind kind);
void write_descriptors(const std::filesystem::path& path, const DescriptorTable& table);

/// Long format: dataset_id, workflow_id, performance. Every pair must be present once.
PerformanceMatrix read_performance(const std::filesystem::path& path);
void write_performance(const std::filesystem::path& path, const PerformanceMatrix& p);

/// Long format: dataset_id, workflow_id, score.
PreferenceMatrix read_preference(const std::filesystem::path& path);
void write_preference(const std::filesystem::path& path, const PreferenceMatrix& r);

/// One file per dataset: header = workflow ids, rows = instances, values 0/1.
OutcomeSlice read_outcomes(const std::filesystem::path& path, const std::string& dataset_id,
                           std::vector<std::string>& workflow_ids);
void write_outcomes(const std::filesystem::path& path, const OutcomeSlice& slice,
                    const std::vector<std::string>& workflow_ids);

/// Reads `<dir>/<dataset_id>.csv` for every dataset id, in order.
OutcomeCube read_outcome_cube(const std::filesystem::path& dir,
                              const std::vector<std::string>& dataset_ids);

/// Long format: dataset_id, workflow_k, workflow_l, outcome (k_wins | l_wins | tie).
/// Unlisted pairs are ties.
SignificanceTensor read_significance(const std::filesystem::path& path,
                                     const std::vector<std::string>& workflow_ids);
void write_significance(const std::filesystem::path& path, const SignificanceTensor& tensor);

/// Reorders a performance or preference matrix to the given id orders.
/// Throws FormatError listing any ids that cannot be matched.
PerformanceMatrix align(const PerformanceMatrix& p, const std::vector<std::string>& dataset_ids,
                        const std::vector<std::string>& workflow_ids);
PreferenceMatrix align(const PreferenceMatrix& r, const std::vector<std::string>& dataset_ids,
                       const std::vector<std::string>& workflow_ids);

}  // namespace metamine::io
