#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "mixclass/config.hpp"
#include "mixclass/instance.hpp"
#include "mixclass/oracle.hpp"
#include "mixclass/types.hpp"

namespace mixclass {

struct ExperimentConfig {
  std::string kind;  // support-sim | recovery-sweep | movielens
  int n = 100;
  int k = 3;
  int ell = 2;
  double epsilon = 0.2;
  double delta = 0.0;
  std::vector<std::uint64_t> seeds;
  BudgetConfig budget;
  std::string out = "results.csv";
  std::string plot_out;  // defaults to out + ".plot"

  // support-sim: fractions of the full RUFF design alphabet to sweep.
  std::vector<double> ruff_budget_fractions = {0.0, 0.05, 0.1, 0.2, 0.5, 1.0};
  // recovery-sweep: Gaussian label counts per component.
  std::vector<int> label_counts = {400, 1600, 6400};

  // movielens
  std::string ratings_path;
  std::string movies_path;
  int user1 = 0, user2 = 0;
  int m1 = 10, m2 = 20;
  int min_common = 500;
};

// Flat key=value file; '#' starts a comment. Unknown keys are errors.
ExperimentConfig read_experiment_config(const std::string& path);

struct TrialResult {
  std::uint64_t seed = 0;
  double hamming = 0.0;  // relative, after optimal column matching
  std::vector<double> l2_errors;
  std::map<std::string, std::uint64_t> calls_per_phase;
  double wall_seconds = 0.0;
};

// Fraction of disagreeing bits between two n x ell binary matrices after the
// best column matching; 0 iff equal up to column permutation.
double relative_hamming(const IntMat& truth, const IntMat& recovered);

struct SweepPoint {
  double x = 0.0;
  double y = 0.0;
  double spread = 0.0;  // stderr or IQR depending on the experiment
};

// Figure-2 style sweep: for each RUFF row budget, mean relative Hamming
// distance of the ell=2 support recovery over the seeds.
std::vector<SweepPoint> run_support_trials(const ExperimentConfig& cfg,
                                           std::vector<TrialResult>* trials = nullptr);

// Median max-l2 error of the two-stage pipeline vs Gaussian label count.
std::vector<SweepPoint> run_recovery_sweep(const ExperimentConfig& cfg);

// Random support-separable instance: each component gets a private coordinate
// plus shared ones, unit-norm values with magnitudes bounded away from zero.
MixtureInstance random_separable_instance(int n, int k, int ell, std::uint64_t seed);

// Writes `header` then one `x,y,spread` row per point, plus a whitespace
// plot-data file next to it.
void emit_results(const std::vector<SweepPoint>& points, const std::string& header,
                  const std::string& csv_path, const std::string& plot_path);

}  // namespace mixclass
