#include <doctest.h>

#include <fstream>

#include "metamine/bundle.hpp"
#include "metamine/csv_io.hpp"
#include "metamine/model_io.hpp"
#include "support.hpp"

using namespace metamine;
namespace fs = std::filesystem;

namespace {

void write_file(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

synth::SynthConfig tiny(synth::Mode mode) {
  synth::SynthConfig c;
  c.n = 6;
  c.m = 4;
  c.d = 3;
  c.l = 3;
  c.latent_t = 2;
  c.mode = mode;
  c.noise_sigma = 0.5;
  c.instances = 60;
  c.seed = 2;
  return c;
}

IngestOptions options_for(const SynthFiles& f) {
  IngestOptions o;
  o.x_path = f.x;
  o.a_path = f.a;
  o.performance_path = f.performance;
  return o;
}

}  // namespace

TEST_CASE("csv reader handles quotes, BOM, CRLF and tabs") {
  const auto dir = testing::scratch_dir("csv");
  write_file(dir / "q.csv", "\xEF\xBB\xBFid,\"size, log\",\"say \"\"hi\"\"\"\r\nd1,1.5,2\r\n\r\nd2,-3,4e2\r\n");
  const io::CsvTable t = io::read_csv(dir / "q.csv");
  CHECK(t.header == std::vector<std::string>{"id", "size, log", "say \"hi\""});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[1][2] == "4e2");

  write_file(dir / "t.tsv", "id\tf1\nd1\t7\n");
  const DescriptorTable d = io::read_descriptors(dir / "t.tsv", EntityKind::Dataset);
  CHECK(d.features(0, 0) == 7.0);

  io::write_csv(dir / "back.csv", t);
  CHECK(io::read_csv(dir / "back.csv").header == t.header);
}

TEST_CASE("descriptor errors name the file") {
  const auto dir = testing::scratch_dir("desc_err");
  write_file(dir / "noheader.csv", "d1,1,2\nd2,3,4\n");
  try {
    io::read_descriptors(dir / "noheader.csv", EntityKind::Dataset);
    FAIL("expected an error");
  } catch (const io::FormatError& e) {
    CHECK(std::string(e.what()).find("noheader.csv") != std::string::npos);
    CHECK(std::string(e.what()).find("missing header") != std::string::npos);
  }
  write_file(dir / "bad.csv", "id,f\nd1,abc\n");
  CHECK_THROWS_AS(io::read_descriptors(dir / "bad.csv", EntityKind::Dataset), io::FormatError);
  write_file(dir / "ragged.csv", "id,f,g\nd1,1\n");
  CHECK_THROWS_AS(io::read_descriptors(dir / "ragged.csv", EntityKind::Dataset), io::FormatError);
  write_file(dir / "empty.csv", "");
  CHECK_THROWS_AS(io::read_descriptors(dir / "empty.csv", EntityKind::Dataset), io::FormatError);
  CHECK_THROWS_AS(io::read_descriptors(dir / "absent.csv", EntityKind::Dataset), io::FormatError);
}

TEST_CASE("long-format performance: duplicates and gaps are rejected") {
  const auto dir = testing::scratch_dir("perf");
  write_file(dir / "ok.csv", "dataset_id,workflow_id,performance\nd1,w1,0.5\nd1,w2,0.7\nd2,w2,0.1\nd2,w1,0.2\n");
  const PerformanceMatrix p = io::read_performance(dir / "ok.csv");
  CHECK(p.values(1, 0) == 0.2);
  write_file(dir / "dup.csv", "dataset_id,workflow_id,performance\nd1,w1,0.5\nd1,w1,0.7\n");
  CHECK_THROWS_AS(io::read_performance(dir / "dup.csv"), io::FormatError);
  write_file(dir / "gap.csv", "dataset_id,workflow_id,performance\nd1,w1,0.5\nd2,w2,0.7\n");
  CHECK_THROWS_AS(io::read_performance(dir / "gap.csv"), io::FormatError);
  write_file(dir / "hdr.csv", "dataset,workflow,perf\nd1,w1,0.5\n");
  CHECK_THROWS_AS(io::read_performance(dir / "hdr.csv"), io::FormatError);
}

TEST_CASE("align lists every orphan id") {
  PerformanceMatrix p{{"d1", "d2"}, {"w1"}, Matrix::Constant(2, 1, 0.5)};
  try {
    io::align(p, {"d1", "d3"}, {"w1"});
    FAIL("expected an error");
  } catch (const io::FormatError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("d3") != std::string::npos);
    CHECK(msg.find("d2") != std::string::npos);
  }
  const PerformanceMatrix swapped = io::align(p, {"d2", "d1"}, {"w1"});
  CHECK(swapped.dataset_ids.front() == "d2");
}

TEST_CASE("significance file round trip") {
  const auto dir = testing::scratch_dir("sig");
  const auto problem = synth::generate(tiny(synth::Mode::NoisyBilinear));
  io::write_significance(dir / "s.csv", problem.pairwise);
  const SignificanceTensor back = io::read_significance(dir / "s.csv", problem.a.entity_ids);
  CHECK(build_preference_matrix(back).scores == problem.preference.scores);
  write_file(dir / "bad.csv", "dataset_id,workflow_k,workflow_l,outcome\nds000,wf000,wf001,maybe\n");
  CHECK_THROWS_AS(io::read_significance(dir / "bad.csv", problem.a.entity_ids), io::FormatError);
}

TEST_CASE("format_double round trips") {
  for (double v : {0.1, 1.0 / 3.0, -2.5e-300, 123456789.125, 6.02214076e23}) {
    CHECK(std::stod(io::format_double(v)) == v);
  }
}

TEST_CASE("model files reload bit-exactly") {
  const auto dir = testing::scratch_dir("model");
  std::mt19937_64 rng(4);
  const DescriptorTable x = testing::table(testing::random_matrix(9, 3, rng), EntityKind::Dataset, "d");
  const DescriptorTable a = testing::table(testing::random_matrix(5, 2, rng), EntityKind::Workflow, "w");
  HyperParams h;
  h.max_iters = 50;
  h.t = 2;
  h.seed = 99;
  const FittedModel m = fit_model(ObjectiveKind::F4, h, x, a, testing::random_matrix(9, 5, rng));
  save_model(dir / "m.json", m.params, summarize(m.trace));
  const LoadedModel back = load_model(dir / "m.json");
  CHECK(back.params.u == m.params.u);
  CHECK(back.params.v == m.params.v);
  CHECK(back.params.hyper == m.params.hyper);
  CHECK(back.params.objective == ObjectiveKind::F4);
  CHECK(back.params.x_standardization.mean == m.params.x_standardization.mean);
  CHECK(back.params.x_standardization.feature_names == x.feature_names);
  CHECK(back.summary.iterations == m.trace.iterations());
  save_model(dir / "m2.json", back.params, back.summary);
  CHECK(read_file(dir / "m.json") == read_file(dir / "m2.json"));
}

TEST_CASE("malformed model files are rejected") {
  const auto dir = testing::scratch_dir("model_bad");
  write_file(dir / "a.json", "{\"format\": \"something-else\"}");
  CHECK_THROWS(load_model(dir / "a.json"));
  write_file(dir / "b.json", "{ not json");
  CHECK_THROWS(load_model(dir / "b.json"));
}

TEST_CASE("hyper-parameter JSON is range checked") {
  nlohmann::json j = {{"mu1", -1.0}};
  CHECK_THROWS_AS(hyper_from_json(j), Error);
  j = {{"max_iters", -3}};
  CHECK_THROWS_AS(hyper_from_json(j), Error);
  j = {{"mu1", 2.0}, {"t", 3}, {"init", "svd"}};
  const HyperParams h = hyper_from_json(j);
  CHECK(h.mu1 == 2.0);
  CHECK(h.t == 3);
  CHECK(h.init == InitKind::SvdWarmStart);
  CHECK(hyper_from_json(to_json(h)) == h);
}

TEST_CASE("ingest from each preference source") {
  const auto dir = testing::scratch_dir("ingest");
  const auto cfg = tiny(synth::Mode::OutcomeLevel);
  const auto problem = synth::generate(cfg);
  const SynthFiles files = write_synth(dir / "raw", problem, cfg);

  IngestOptions perf = options_for(files);
  const Bundle b_perf = ingest(perf);
  CHECK(b_perf.data.preference.scores ==
        preference_from_performance(problem.performance, 0.01).scores);
  CHECK(b_perf.data.pairwise.has_value());

  IngestOptions outc = options_for(files);
  outc.source = PreferenceSource::Outcomes;
  outc.source_path = *files.outcomes;
  const Bundle b_out = ingest(outc);
  CHECK(b_out.data.preference.scores == problem.preference.scores);

  io::write_significance(dir / "sig.csv", problem.pairwise);
  IngestOptions sig = options_for(files);
  sig.source = PreferenceSource::Significance;
  sig.source_path = dir / "sig.csv";
  CHECK(ingest(sig).data.preference.scores == problem.preference.scores);

  IngestOptions sc = options_for(files);
  sc.source = PreferenceSource::Scores;
  sc.source_path = files.scores;
  const Bundle b_sc = ingest(sc);
  CHECK_FALSE(b_sc.data.pairwise.has_value());

  write_bundle(dir / "bundle", b_out);
  const Bundle loaded = load_bundle(dir / "bundle");
  CHECK(loaded.data.preference.scores == b_out.data.preference.scores);
  CHECK(loaded.data.pairwise.has_value());
  CHECK(loaded.data.x.features == b_out.data.x.features);
  CHECK(loaded.manifest == b_out.manifest);
  CHECK(fs::exists(dir / "bundle" / "x_std.csv"));
}

TEST_CASE("ingest reports validation failures in full") {
  const auto dir = testing::scratch_dir("ingest_bad");
  const auto cfg = tiny(synth::Mode::NoisyBilinear);
  const SynthFiles files = write_synth(dir, synth::generate(cfg), cfg);
  std::string text = read_file(files.performance);
  const auto pos = text.find("\nds001,wf002,");
  REQUIRE(pos != std::string::npos);
  const auto end = text.find('\n', pos + 1);
  text.replace(pos, end - pos, "\nds001,wf002,1.5");
  write_file(dir / "bad_perf.csv", text);
  IngestOptions o = options_for(files);
  o.performance_path = dir / "bad_perf.csv";
  try {
    ingest(o);
    FAIL("expected a validation failure");
  } catch (const ValidationFailed& e) {
    CHECK(e.report().violations.size() == 1);
    CHECK(std::string(e.what()).find("out of [0,1] at (1,2)") != std::string::npos);
  }
}

TEST_CASE("ingest flags zero-variance features in the manifest") {
  const auto dir = testing::scratch_dir("ingest_zv");
  const auto cfg = tiny(synth::Mode::NoisyBilinear);
  auto problem = synth::generate(cfg);
  problem.x.features.col(1).setConstant(4.0);
  const SynthFiles files = write_synth(dir, problem, cfg);
  const Bundle b = ingest(options_for(files));
  const auto flagged = b.manifest.at("zero_variance_features");
  REQUIRE(flagged.size() == 1);
  CHECK(flagged[0] == "X:xf001");
}
