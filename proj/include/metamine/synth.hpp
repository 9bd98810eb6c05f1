#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "metamine/data_model.hpp"
#include "metamine/preference.hpp"

namespace metamine::synth {

enum class Mode { ExactBilinear, NoisyBilinear, OutcomeLevel };

const char* to_string(Mode mode);
Mode mode_from_string(const std::string& name);

struct SynthConfig {
  int n = 30;
  int m = 12;
  int d = 10;
  int l = 8;
  int latent_t = 3;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
  Mode mode = Mode::ExactBilinear;
  int instances = 200;          // per dataset, OutcomeLevel only
  double tie_threshold = 0.01;  // comparison-based R
  double alpha_level = 0.05;    // McNemar, OutcomeLevel only
};

/// Throws metamine::Error on an invalid configuration.
void check(const SynthConfig& config);

struct SynthProblem {
  DescriptorTable x;
  DescriptorTable a;
  PerformanceMatrix performance;
  PreferenceMatrix preference;
  SignificanceTensor pairwise;  // comparisons R is scored from
  Matrix u_star;  // d x latent_t
  Matrix v_star;  // l x latent_t
  Matrix latent_scores;  // X U* V*^T A^T before noise and squashing
  std::optional<OutcomeCube> outcomes;
};

/// Draws a meta-mining problem with known bilinear structure. Descriptor
/// columns are emitted z-scored so the latent scores are exactly
/// representable after standardization. Performances are a per-dataset
/// affine squash of the (noisy) scores into [0.5, 0.95].
SynthProblem generate(const SynthConfig& config);

}  // namespace metamine::synth
