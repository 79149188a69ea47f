#pragma once

// Batch experiment driver: configuration schema, chart and model builders,
// and the verification suites behind the `ftct` command.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "ftct/config.hpp"
#include "ftct/ftct.hpp"

namespace ftct::cli {

struct ExperimentConfig {
  std::string suite;
  std::uint64_t seed = 1;
  int sample_count = 20;
  std::string output_path = "out";

  // model surface
  std::string model_kind = "closed_form";  // closed_form | curvature | curvature_table
  std::string model_name = "tanh_gauss";
  std::string model_table;
  double model_t_max = 3.0;
  double model_k = 0.0;
  double model_bump = 0.0;

  // chart
  std::string manifold_family = "model";  // model | revolution | euclidean | riemannian | randers | randers_linear
  double manifold_radius = 0.0;           // 0: family default
  double manifold_t_max = 1.65;
  double manifold_bump = 0.3;
  Mat2 manifold_A = identity2();
  double manifold_k = 0.0;
  Vec2 manifold_b{0.0, 0.0};
  Mat2 manifold_B{};

  std::map<std::string, double> tolerances;

  // suite knobs
  int profile_points = 1001;
  std::optional<double> profile_expect_g0;
  double angles_h0 = 1e-2;
  double angles_length = 0.2;
  double angles_r_min = 0.3;
  double angles_r_max = 1.2;
  std::vector<double> key_lemma_deltas{0.02, 0.05, 0.1};
  std::vector<double> key_lemma_omegas_deg{30.0, 60.0, 90.0};
  double key_lemma_l = 1.0;
  double key_lemma_eps = 0.1;
  int key_lemma_grid = 41;
  std::optional<double> key_lemma_theta_floor_deg;
  double double_r_min = 0.2;
  double double_r_max = 1.5;
  std::string tct_mode = "exact";
  double tct_delta = 0.05;
  double tct_neighborhood_radius = 0.02;
  int tct_base_points = 32;
  int tct_directions = 16;
  double tct_r_max = 0.0;
  bool tct_require_comparison = false;

  double tol(const std::string& key) const;
};

// Parses and validates; throws ConfigError with the offending line.
ExperimentConfig parse_config(const KeyValueConfig& kv);
const std::vector<std::string>& config_keys();

ModelSurface build_model(const ExperimentConfig& c);
FinslerChart build_chart(const ExperimentConfig& c, const ModelSurface& model);

struct SuiteOutcome {
  int pass = 0;
  int fail = 0;
  int not_applicable = 0;
  int inconclusive = 0;
  std::vector<std::string> summary;  // human-readable lines
  std::vector<std::string> files;    // written outputs
  int exit_code() const { return fail > 0 || inconclusive > 0 ? 1 : 0; }
};

// Runs the configured suite and writes <out_dir>/<suite>.csv, a plot-data
// file and summary.txt. Output does not depend on `jobs`.
SuiteOutcome run_suite(const ExperimentConfig& c, const std::string& out_dir, int jobs = 1);

}  // namespace ftct::cli
