#include "metamine/model_io.hpp"

#include <fstream>

namespace metamine {

using nlohmann::json;

TraceSummary summarize(const TrainTrace& trace) {
  TraceSummary s;
  s.iterations = trace.iterations();
  if (!trace.objective.empty()) {
    s.initial_objective = trace.objective.front();
    s.final_objective = trace.objective.back();
  }
  s.termination = trace.termination;
  return s;
}

json to_json(const HyperParams& h) {
  json j{{"mu1", h.mu1},
         {"mu2", h.mu2},
         {"alpha", h.alpha},
         {"beta", h.beta},
         {"gamma", h.gamma},
         {"n_neighbors", h.n_neighbors},
         {"max_iters", h.max_iters},
         {"rel_tol", h.rel_tol},
         {"seed", h.seed},
         {"init", to_string(h.init)}};
  j["t"] = h.t ? json(*h.t) : json(nullptr);
  return j;
}

HyperParams hyper_from_json(const json& j, HyperParams h) {
  if (j.contains("mu1")) h.mu1 = j.at("mu1").get<double>();
  if (j.contains("mu2")) h.mu2 = j.at("mu2").get<double>();
  if (j.contains("alpha")) h.alpha = j.at("alpha").get<double>();
  if (j.contains("beta")) h.beta = j.at("beta").get<double>();
  if (j.contains("gamma")) h.gamma = j.at("gamma").get<double>();
  if (j.contains("n_neighbors")) h.n_neighbors = j.at("n_neighbors").get<int>();
  if (j.contains("max_iters")) h.max_iters = j.at("max_iters").get<int>();
  if (j.contains("rel_tol")) h.rel_tol = j.at("rel_tol").get<double>();
  if (j.contains("seed")) h.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("init")) h.init = init_from_string(j.at("init").get<std::string>());
  if (j.contains("t")) {
    if (j.at("t").is_null()) {
      h.t.reset();
    } else {
      h.t = j.at("t").get<int>();
    }
  }
  if (h.mu1 < 0 || h.mu2 < 0 || h.alpha < 0 || h.beta < 0 || h.gamma < 0) {
    throw Error("hyper-parameters must be nonnegative");
  }
  if (h.n_neighbors < 1) throw Error("n_neighbors must be positive");
  if (h.max_iters < 0) throw Error("max_iters must be nonnegative");
  if (!(h.rel_tol > 0)) throw Error("rel_tol must be positive");
  if (h.t && *h.t < 1) throw Error("t must be positive");
  return h;
}

json matrix_to_json(const Matrix& m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return json{{"rows", m.rows()}, {"cols", m.cols()}, {"data", std::move(rows)}};
}

Matrix matrix_from_json(const json& j) {
  const auto rows = j.at("rows").get<Eigen::Index>();
  const auto cols = j.at("cols").get<Eigen::Index>();
  const auto& data = j.at("data");
  if (static_cast<Eigen::Index>(data.size()) != rows) throw Error("matrix: row count mismatch");
  Matrix m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    const auto& row = data.at(static_cast<std::size_t>(i));
    if (static_cast<Eigen::Index>(row.size()) != cols) throw Error("matrix: column count mismatch");
    for (Eigen::Index c = 0; c < cols; ++c) m(i, c) = row.at(static_cast<std::size_t>(c)).get<double>();
  }
  return m;
}

json to_json(const StandardizationRecord& r) {
  json mean = json::array();
  json scale = json::array();
  for (Eigen::Index j = 0; j < r.mean.size(); ++j) {
    mean.push_back(r.mean(j));
    scale.push_back(r.scale(j));
  }
  return json{{"feature_names", r.feature_names},
              {"mean", std::move(mean)},
              {"scale", std::move(scale)},
              {"zero_variance", r.zero_variance}};
}

StandardizationRecord standardization_from_json(const json& j) {
  StandardizationRecord r;
  r.feature_names = j.at("feature_names").get<std::vector<std::string>>();
  const auto mean = j.at("mean").get<std::vector<double>>();
  const auto scale = j.at("scale").get<std::vector<double>>();
  r.zero_variance = j.at("zero_variance").get<std::vector<bool>>();
  if (mean.size() != r.feature_names.size() || scale.size() != mean.size() ||
      r.zero_variance.size() != mean.size()) {
    throw Error("standardization record has inconsistent lengths");
  }
  r.mean = Eigen::Map<const Vector>(mean.data(), static_cast<Eigen::Index>(mean.size()));
  r.scale = Eigen::Map<const Vector>(scale.data(), static_cast<Eigen::Index>(scale.size()));
  return r;
}

json model_to_json(const ModelParams& p, const TraceSummary& s) {
  return json{{"format", "metamine-model"},
              {"version", kModelFormatVersion},
              {"objective", to_string(p.objective)},
              {"t", p.t},
              {"hyper", to_json(p.hyper)},
              {"u", matrix_to_json(p.u)},
              {"v", matrix_to_json(p.v)},
              {"x_standardization", to_json(p.x_standardization)},
              {"a_standardization", to_json(p.a_standardization)},
              {"trace",
               {{"iterations", s.iterations},
                {"initial_objective", s.initial_objective},
                {"final_objective", s.final_objective},
                {"termination", to_string(s.termination)}}}};
}

LoadedModel model_from_json(const json& j) {
  if (j.value("format", std::string{}) != "metamine-model") throw Error("not a model file");
  const int version = j.at("version").get<int>();
  if (version != kModelFormatVersion) {
    throw Error("unsupported model version " + std::to_string(version));
  }
  LoadedModel out;
  ModelParams& p = out.params;
  p.objective = objective_from_string(j.at("objective").get<std::string>());
  p.t = j.at("t").get<int>();
  p.hyper = hyper_from_json(j.at("hyper"));
  p.u = matrix_from_json(j.at("u"));
  p.v = matrix_from_json(j.at("v"));
  p.x_standardization = standardization_from_json(j.at("x_standardization"));
  p.a_standardization = standardization_from_json(j.at("a_standardization"));
  if (p.u.cols() != p.t || p.v.cols() != p.t) throw Error("model: factor widths disagree with t");
  if (p.u.rows() != p.x_standardization.mean.size() ||
      p.v.rows() != p.a_standardization.mean.size()) {
    throw Error("model: factor heights disagree with standardization records");
  }
  const auto& t = j.at("trace");
  out.summary.iterations = t.at("iterations").get<int>();
  out.summary.initial_objective = t.at("initial_objective").get<double>();
  out.summary.final_objective = t.at("final_objective").get<double>();
  out.summary.termination = termination_from_string(t.at("termination").get<std::string>());
  return out;
}

void save_model(const std::filesystem::path& path, const ModelParams& params,
                const TraceSummary& summary) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write model file " + path.string());
  out << model_to_json(params, summary).dump(2) << "\n";
}

LoadedModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot read model file " + path.string());
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw Error("model file " + path.string() + ": " + e.what());
  }
  return model_from_json(j);
}

}  // namespace metamine
