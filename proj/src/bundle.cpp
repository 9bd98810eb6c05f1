#include "metamine/bundle.hpp"

#include <fstream>

#include "metamine/csv_io.hpp"
#include "metamine/model_io.hpp"

namespace metamine {

namespace fs = std::filesystem;
using nlohmann::json;

const char* to_string(PreferenceSource source) {
  switch (source) {
    case PreferenceSource::Performance: return "performance";
    case PreferenceSource::Outcomes: return "outcomes";
    case PreferenceSource::Significance: return "significance";
    case PreferenceSource::Scores: return "scores";
  }
  return "?";
}

PreferenceSource preference_source_from_string(const std::string& name) {
  if (name == "performance") return PreferenceSource::Performance;
  if (name == "outcomes") return PreferenceSource::Outcomes;
  if (name == "significance") return PreferenceSource::Significance;
  if (name == "scores") return PreferenceSource::Scores;
  throw Error("unknown preference source '" + name + "'");
}

namespace {

void write_json(const fs::path& path, const json& j) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw io::FormatError(path.string() + ": cannot write file");
  out << j.dump(2) << "\n";
}

json read_json(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw io::FormatError(path.string() + ": cannot open file");
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw io::FormatError(path.string() + ": " + e.what());
  }
}

// Orphan ids between the descriptor tables and another matrix's id lists.
void check_orphans(const std::vector<std::string>& x_ids, const std::vector<std::string>& a_ids,
                   const std::vector<std::string>& ds_ids, const std::vector<std::string>& wf_ids,
                   const std::string& source, ValidationReport& report) {
  auto missing = [&](const std::vector<std::string>& have, const std::vector<std::string>& want,
                     const std::string& where, const std::string& what) {
    for (std::size_t i = 0; i < want.size(); ++i) {
      if (std::find(have.begin(), have.end(), want[i]) == have.end()) {
        report.add({where, what, i, std::nullopt, want[i]});
      }
    }
  };
  missing(x_ids, ds_ids, source, "dataset id missing from X");
  missing(ds_ids, x_ids, "X", "dataset id missing from " + source);
  missing(a_ids, wf_ids, source, "workflow id missing from A");
  missing(wf_ids, a_ids, "A", "workflow id missing from " + source);
}

OutcomeCube reorder_workflows(const OutcomeCube& cube, const std::vector<std::string>& order) {
  OutcomeCube out;
  out.workflow_ids = order;
  for (const auto& slice : cube.datasets) {
    OutcomeSlice s{slice.dataset_id, {}};
    s.correct.resize(slice.correct.rows(), static_cast<Eigen::Index>(order.size()));
    for (std::size_t j = 0; j < order.size(); ++j) {
      const auto src = std::find(cube.workflow_ids.begin(), cube.workflow_ids.end(), order[j]);
      s.correct.col(static_cast<Eigen::Index>(j)) =
          slice.correct.col(static_cast<Eigen::Index>(src - cube.workflow_ids.begin()));
    }
    out.datasets.push_back(std::move(s));
  }
  return out;
}

}  // namespace

Bundle ingest(const IngestOptions& options) {
  Bundle bundle;
  bundle.source = options.source;
  MetaMiningData& data = bundle.data;
  data.x = io::read_descriptors(options.x_path, EntityKind::Dataset);
  data.a = io::read_descriptors(options.a_path, EntityKind::Workflow);
  PerformanceMatrix p = io::read_performance(options.performance_path);

  ValidationReport report = validate_tables(data.x, data.a, p);
  if (!report.ok()) throw ValidationFailed(std::move(report));
  data.performance = io::align(p, data.x.entity_ids, data.a.entity_ids);

  PreferenceMatrix r;
  switch (options.source) {
    case PreferenceSource::Performance:
      data.pairwise = pairwise_from_performance(data.performance, options.tie_threshold);
      r = build_preference_matrix(*data.pairwise);
      break;
    case PreferenceSource::Outcomes: {
      OutcomeCube cube = io::read_outcome_cube(options.source_path, data.x.entity_ids);
      check_orphans(data.x.entity_ids, data.a.entity_ids, data.x.entity_ids, cube.workflow_ids,
                    "outcomes", report);
      if (!report.ok()) throw ValidationFailed(std::move(report));
      if (cube.workflow_ids != data.a.entity_ids) cube = reorder_workflows(cube, data.a.entity_ids);
      data.pairwise = pairwise_from_outcomes(cube, options.mcnemar);
      r = build_preference_matrix(*data.pairwise);
      break;
    }
    case PreferenceSource::Significance: {
      SignificanceTensor tensor = io::read_significance(options.source_path, data.a.entity_ids);
      std::vector<std::string> ds_ids;
      for (const auto& t : tensor.datasets) ds_ids.push_back(t.dataset_id);
      check_orphans(data.x.entity_ids, data.a.entity_ids, ds_ids, data.a.entity_ids,
                    "significance", report);
      if (!report.ok()) throw ValidationFailed(std::move(report));
      data.pairwise = select_datasets(tensor, data.x.entity_ids);
      r = build_preference_matrix(*data.pairwise);
      break;
    }
    case PreferenceSource::Scores: {
      r = io::read_preference(options.source_path);
      check_orphans(data.x.entity_ids, data.a.entity_ids, r.dataset_ids, r.workflow_ids, "scores",
                    report);
      if (!report.ok()) throw ValidationFailed(std::move(report));
      break;
    }
  }
  data.preference = io::align(r, data.x.entity_ids, data.a.entity_ids);

  if (options.source == PreferenceSource::Scores) {
    for (Eigen::Index i = 0; i < data.preference.scores.rows(); ++i) {
      for (Eigen::Index j = 0; j < data.preference.scores.cols(); ++j) {
        if (!std::isfinite(data.preference.scores(i, j))) {
          report.add({"R", "non-finite value", static_cast<std::size_t>(i),
                      static_cast<std::size_t>(j), ""});
        }
      }
    }
  } else {
    report.merge(validate_preference(data.preference));
  }
  if (!report.ok()) throw ValidationFailed(std::move(report));

  const auto x_record = fit_standardization(data.x);
  const auto a_record = fit_standardization(data.a);
  std::vector<std::string> flagged;
  for (std::size_t j = 0; j < x_record.zero_variance.size(); ++j) {
    if (x_record.zero_variance[j]) flagged.push_back("X:" + x_record.feature_names[j]);
  }
  for (std::size_t j = 0; j < a_record.zero_variance.size(); ++j) {
    if (a_record.zero_variance[j]) flagged.push_back("A:" + a_record.feature_names[j]);
  }

  bundle.manifest = json{{"format", "metamine-bundle"},
                         {"version", 1},
                         {"n_datasets", data.x.rows()},
                         {"n_workflows", data.a.rows()},
                         {"dataset_features", data.x.cols()},
                         {"workflow_features", data.a.cols()},
                         {"preference_source", to_string(options.source)},
                         {"tie_threshold", options.tie_threshold},
                         {"mcnemar_alpha", options.mcnemar.alpha_level},
                         {"mcnemar_exact_small_sample",
                          options.mcnemar.variant == McNemarVariant::ExactSmallSample},
                         {"zero_variance_features", flagged},
                         {"pairwise_outcomes", data.pairwise.has_value()},
                         {"x_standardization", to_json(x_record)},
                         {"a_standardization", to_json(a_record)}};
  return bundle;
}

void write_bundle(const fs::path& dir, const Bundle& bundle) {
  fs::create_directories(dir);
  const MetaMiningData& data = bundle.data;
  io::write_descriptors(dir / "x.csv", data.x);
  io::write_descriptors(dir / "a.csv", data.a);
  io::write_descriptors(dir / "x_std.csv", standardize(data.x).first);
  io::write_descriptors(dir / "a_std.csv", standardize(data.a).first);
  io::write_performance(dir / "performance.csv", data.performance);
  io::write_preference(dir / "preference.csv", data.preference);
  if (data.pairwise) io::write_significance(dir / "pairwise.csv", *data.pairwise);
  write_json(dir / "manifest.json", bundle.manifest);
}

Bundle load_bundle(const fs::path& dir) {
  Bundle bundle;
  bundle.manifest = read_json(dir / "manifest.json");
  if (bundle.manifest.value("format", std::string{}) != "metamine-bundle") {
    throw io::FormatError((dir / "manifest.json").string() + ": not a bundle manifest");
  }
  bundle.source = preference_source_from_string(bundle.manifest.at("preference_source").get<std::string>());
  MetaMiningData& data = bundle.data;
  data.x = io::read_descriptors(dir / "x.csv", EntityKind::Dataset);
  data.a = io::read_descriptors(dir / "a.csv", EntityKind::Workflow);
  data.performance =
      io::align(io::read_performance(dir / "performance.csv"), data.x.entity_ids, data.a.entity_ids);
  data.preference =
      io::align(io::read_preference(dir / "preference.csv"), data.x.entity_ids, data.a.entity_ids);
  if (bundle.manifest.value("pairwise_outcomes", false)) {
    SignificanceTensor tensor = io::read_significance(dir / "pairwise.csv", data.a.entity_ids);
    try {
      data.pairwise = select_datasets(tensor, data.x.entity_ids);
    } catch (const Error& e) {
      throw io::FormatError((dir / "pairwise.csv").string() + ": " + e.what());
    }
    if (build_preference_matrix(*data.pairwise).scores != data.preference.scores) {
      throw io::FormatError((dir / "pairwise.csv").string() + ": does not reproduce preference.csv");
    }
  }
  ValidationReport report = validate_tables(data.x, data.a, data.performance);
  if (bundle.source != PreferenceSource::Scores) report.merge(validate_preference(data.preference));
  if (!report.ok()) throw ValidationFailed(std::move(report));
  return bundle;
}

MetaMiningData to_data(const synth::SynthProblem& problem) {
  return MetaMiningData{problem.x, problem.a, problem.performance, problem.preference,
                        problem.pairwise};
}

json to_json(const synth::SynthConfig& c) {
  return json{{"n", c.n},
              {"m", c.m},
              {"d", c.d},
              {"l", c.l},
              {"latent_t", c.latent_t},
              {"noise_sigma", c.noise_sigma},
              {"seed", c.seed},
              {"mode", synth::to_string(c.mode)},
              {"instances", c.instances},
              {"tie_threshold", c.tie_threshold},
              {"alpha_level", c.alpha_level}};
}

synth::SynthConfig synth_config_from_json(const json& j, synth::SynthConfig c) {
  if (j.contains("n")) c.n = j.at("n").get<int>();
  if (j.contains("m")) c.m = j.at("m").get<int>();
  if (j.contains("d")) c.d = j.at("d").get<int>();
  if (j.contains("l")) c.l = j.at("l").get<int>();
  if (j.contains("latent_t")) c.latent_t = j.at("latent_t").get<int>();
  if (j.contains("noise_sigma")) c.noise_sigma = j.at("noise_sigma").get<double>();
  if (j.contains("seed")) c.seed = j.at("seed").get<std::uint64_t>();
  if (j.contains("mode")) c.mode = synth::mode_from_string(j.at("mode").get<std::string>());
  if (j.contains("instances")) c.instances = j.at("instances").get<int>();
  if (j.contains("tie_threshold")) c.tie_threshold = j.at("tie_threshold").get<double>();
  if (j.contains("alpha_level")) c.alpha_level = j.at("alpha_level").get<double>();
  return c;
}

SynthFiles write_synth(const fs::path& dir, const synth::SynthProblem& problem,
                       const synth::SynthConfig& config) {
  fs::create_directories(dir);
  SynthFiles files{dir / "x.csv", dir / "a.csv", dir / "performance.csv", dir / "scores.csv", {}};
  io::write_descriptors(files.x, problem.x);
  io::write_descriptors(files.a, problem.a);
  io::write_performance(files.performance, problem.performance);
  io::write_preference(files.scores, PreferenceMatrix{problem.x.entity_ids, problem.a.entity_ids,
                                                      problem.latent_scores});
  if (problem.outcomes) {
    files.outcomes = dir / "outcomes";
    fs::create_directories(*files.outcomes);
    for (const auto& slice : problem.outcomes->datasets) {
      io::write_outcomes(*files.outcomes / (slice.dataset_id + ".csv"), slice,
                         problem.outcomes->workflow_ids);
    }
  }
  write_json(dir / "synth_config.json", to_json(config));
  return files;
}

}  // namespace metamine
