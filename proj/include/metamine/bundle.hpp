#pragma once

#include <filesystem>
#include <optional>
#include <string>

#include <json.hpp>

#include "metamine/evaluation.hpp"
#include "metamine/preference.hpp"
#include "metamine/synth.hpp"

namespace metamine {

/// Raised when ingested tables fail validation; carries the full report.
class ValidationFailed : public Error {
 public:
  explicit ValidationFailed(ValidationReport report)
      : Error(report.to_string()), report_(std::move(report)) {}
  const ValidationReport& report() const { return report_; }

 private:
  ValidationReport report_;
};

enum class PreferenceSource { Performance, Outcomes, Significance, Scores };

const char* to_string(PreferenceSource source);
PreferenceSource preference_source_from_string(const std::string& name);

struct IngestOptions {
  std::filesystem::path x_path;
  std::filesystem::path a_path;
  std::filesystem::path performance_path;
  PreferenceSource source = PreferenceSource::Performance;
  std::filesystem::path source_path;  // outcome dir, significance file or score file
  double tie_threshold = 0.01;        // Performance source
  McNemarOptions mcnemar;             // Outcomes source
};

/// Validated meta-mining inputs with all matrices aligned to the descriptor id order.
struct Bundle {
  MetaMiningData data;
  PreferenceSource source = PreferenceSource::Performance;
  nlohmann::json manifest;
};

Bundle ingest(const IngestOptions& options);

/// Writes x.csv, a.csv (validated raw descriptors), x_std.csv, a_std.csv
/// (standardized copies), performance.csv, preference.csv and manifest.json.
void write_bundle(const std::filesystem::path& dir, const Bundle& bundle);

Bundle load_bundle(const std::filesystem::path& dir);

/// Files produced by write_synth, in the formats ingest reads.
struct SynthFiles {
  std::filesystem::path x;
  std::filesystem::path a;
  std::filesystem::path performance;
  std::filesystem::path scores;                   // noise-free latent scores
  std::optional<std::filesystem::path> outcomes;  // OutcomeLevel only
};

SynthFiles write_synth(const std::filesystem::path& dir, const synth::SynthProblem& problem,
                       const synth::SynthConfig& config);

/// In-memory equivalent of ingesting the files write_synth produces
/// (performance or outcome source).
MetaMiningData to_data(const synth::SynthProblem& problem);

nlohmann::json to_json(const synth::SynthConfig& config);
synth::SynthConfig synth_config_from_json(const nlohmann::json& j, synth::SynthConfig base = {});

}  // namespace metamine
