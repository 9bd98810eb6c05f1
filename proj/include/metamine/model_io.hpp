#pragma once

#include <filesystem>
#include <string>

#include <json.hpp>

#include "metamine/data_model.hpp"
#include "metamine/metric_learning.hpp"

namespace metamine {

inline constexpr int kModelFormatVersion = 1;

struct TraceSummary {
  int iterations = 0;
  double initial_objective = 0.0;
  double final_objective = 0.0;
  Termination termination = Termination::MaxIters;
};

TraceSummary summarize(const TrainTrace& trace);

nlohmann::json to_json(const HyperParams& hyper);
HyperParams hyper_from_json(const nlohmann::json& j, HyperParams base = {});

nlohmann::json to_json(const StandardizationRecord& record);
StandardizationRecord standardization_from_json(const nlohmann::json& j);

nlohmann::json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const nlohmann::json& j);

/// Versioned JSON container: objective, t, U, V, hyper-parameters,
/// standardization records and a trace summary. Doubles are written in
/// shortest round-trip form so a reload reproduces predictions bit-exactly.
nlohmann::json model_to_json(const ModelParams& params, const TraceSummary& summary);

struct LoadedModel {
  ModelParams params;
  TraceSummary summary;
};

LoadedModel model_from_json(const nlohmann::json& j);

void save_model(const std::filesystem::path& path, const ModelParams& params,
                const TraceSummary& summary);
LoadedModel load_model(const std::filesystem::path& path);

}  // namespace metamine
