#include "mixclass/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "mixclass/errors.hpp"
#include "mixclass/rng.hpp"
#include "mixclass/two_mix.hpp"
#include "mixclass/recovery.hpp"

namespace mixclass {
namespace {

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, sep)) out.push_back(tok);
  return out;
}

std::string trim(const std::string& s) {
  auto a = s.find_first_not_of(" \t\r\n");
  auto b = s.find_last_not_of(" \t\r\n");
  return a == std::string::npos ? "" : s.substr(a, b - a + 1);
}

double mean_of(const std::vector<double>& xs) {
  return std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
}

double stderr_of(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double m = mean_of(xs);
  double var = 0.0;
  for (double x : xs) var += (x - m) * (x - m);
  var /= static_cast<double>(xs.size() - 1);
  return std::sqrt(var / static_cast<double>(xs.size()));
}

double quantile_sorted(const std::vector<double>& xs, double q) {
  if (xs.empty()) return 0.0;
  double pos = q * static_cast<double>(xs.size() - 1);
  std::size_t lo = static_cast<std::size_t>(pos);
  std::size_t hi = std::min(lo + 1, xs.size() - 1);
  double frac = pos - static_cast<double>(lo);
  return xs[lo] * (1.0 - frac) + xs[hi] * frac;
}

}  // namespace

ExperimentConfig read_experiment_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path);
  ExperimentConfig cfg;
  cfg.seeds.clear();
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(path + " line " + std::to_string(line_no) + ": expected key=value");
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    try {
      if (key == "kind") cfg.kind = value;
      else if (key == "n") cfg.n = std::stoi(value);
      else if (key == "k") cfg.k = std::stoi(value);
      else if (key == "ell") cfg.ell = std::stoi(value);
      else if (key == "epsilon") cfg.epsilon = std::stod(value);
      else if (key == "delta") cfg.delta = std::stod(value);
      else if (key == "out") cfg.out = value;
      else if (key == "plot_out") cfg.plot_out = value;
      else if (key == "seeds") {
        for (const auto& tok : split(value, ','))
          if (!trim(tok).empty()) cfg.seeds.push_back(std::stoull(trim(tok)));
      } else if (key == "ruff_budget_fractions") {
        cfg.ruff_budget_fractions.clear();
        for (const auto& tok : split(value, ','))
          if (!trim(tok).empty()) cfg.ruff_budget_fractions.push_back(std::stod(trim(tok)));
      } else if (key == "label_counts") {
        cfg.label_counts.clear();
        for (const auto& tok : split(value, ','))
          if (!trim(tok).empty()) cfg.label_counts.push_back(std::stoi(trim(tok)));
      } else if (key == "c_d") cfg.budget.family.c_d = std::stod(value);
      else if (key == "c_m") cfg.budget.family.c_m = std::stod(value);
      else if (key == "c_c") cfg.budget.family.c_c = std::stod(value);
      else if (key == "c_g") cfg.budget.c_g = std::stod(value);
      else if (key == "c_s") cfg.budget.c_s = std::stod(value);
      else if (key == "batch_slack") cfg.budget.batch_slack = std::stod(value);
      else if (key == "failure_budget") cfg.budget.failure_budget = std::stod(value);
      else if (key == "gaussian_labels") cfg.budget.gaussian_labels_override = std::stoi(value);
      else if (key == "subgaussian_rounds")
        cfg.budget.subgaussian_rounds_override = std::stoi(value);
      else if (key == "lazy_union_counts") cfg.budget.lazy_union_counts = value == "1" || value == "true";
      else if (key == "ratings") cfg.ratings_path = value;
      else if (key == "movies") cfg.movies_path = value;
      else if (key == "user1") cfg.user1 = std::stoi(value);
      else if (key == "user2") cfg.user2 = std::stoi(value);
      else if (key == "m1") cfg.m1 = std::stoi(value);
      else if (key == "m2") cfg.m2 = std::stoi(value);
      else if (key == "min_common") cfg.min_common = std::stoi(value);
      else throw ConfigError(path + " line " + std::to_string(line_no) + ": unknown key " + key);
    } catch (const ConfigError&) {
      throw;
    } catch (...) {
      throw ConfigError(path + " line " + std::to_string(line_no) + ": bad value for " + key);
    }
  }
  if (cfg.seeds.empty()) throw ConfigError(path + ": config needs a non-empty seeds list");
  if (cfg.kind.empty()) throw ConfigError(path + ": config needs kind=");
  return cfg;
}

double relative_hamming(const IntMat& truth, const IntMat& recovered) {
  if (truth.rows() != recovered.rows() || truth.cols() != recovered.cols())
    throw ConfigError("relative_hamming: shape mismatch");
  const int ell = static_cast<int>(truth.cols());
  if (ell > 8) throw ConfigError("relative_hamming: ell > 8 unsupported");
  std::vector<int> sigma(ell);
  std::iota(sigma.begin(), sigma.end(), 0);
  long long best = -1;
  do {
    long long diff = 0;
    for (int t = 0; t < ell; ++t)
      diff += (truth.col(t) - recovered.col(sigma[t])).cwiseAbs().sum();
    if (best < 0 || diff < best) best = diff;
  } while (std::next_permutation(sigma.begin(), sigma.end()));
  return static_cast<double>(best) /
         static_cast<double>(truth.rows() * truth.cols());
}

MixtureInstance random_separable_instance(int n, int k, int ell, std::uint64_t seed) {
  if (n < ell * 1 || k < 1 || ell < 1) throw ConfigError("random_separable_instance: bad shape");
  if (n < ell) throw ConfigError("random_separable_instance: n < ell");
  Rng rng(derive_seed(seed, 0x696e7374ULL));
  // Distinct private coordinates guarantee separability; remaining support is
  // arbitrary across components.
  std::vector<int> privates = rng.sample_without_replacement(n, ell);
  std::vector<SparseVector> comps;
  for (int t = 0; t < ell; ++t) {
    std::vector<int> coords{privates[t]};
    int guard = 0;
    while (static_cast<int>(coords.size()) < k && guard < 100 * k) {
      ++guard;
      int c = static_cast<int>(rng.uniform_int(static_cast<std::uint32_t>(n)));
      bool is_private = false;
      for (int p : privates) is_private |= (c == p);
      if (is_private || std::find(coords.begin(), coords.end(), c) != coords.end()) continue;
      coords.push_back(c);
    }
    std::vector<std::pair<int, double>> entries;
    for (int c : coords) {
      double mag = 0.5 + 0.5 * rng.uniform();
      entries.emplace_back(c, rng.sign_bit() * mag);
    }
    comps.push_back(SparseVector(n, std::move(entries)).normalized());
  }
  return MixtureInstance(n, std::move(comps));
}

std::vector<SweepPoint> run_support_trials(const ExperimentConfig& cfg,
                                           std::vector<TrialResult>* trials) {
  if (cfg.ell != 2) throw ConfigError("support-sim: only ell = 2 is simulated");
  BudgetConfig budget = cfg.budget;
  budget.lazy_union_counts = true;  // the sweep repeats the union stage per point

  std::vector<SweepPoint> sweep;
  for (double frac : cfg.ruff_budget_fractions) {
    std::vector<double> hammings;
    int rows = 0;
    for (std::uint64_t seed : cfg.seeds) {
      auto t0 = std::chrono::steady_clock::now();
      MixtureInstance inst = random_separable_instance(cfg.n, cfg.k, 2, seed);
      MixtureOracle oracle(inst, derive_seed(seed, 0x6f72ULL));
      EstimatedCountSource counts(oracle);

      SetFamily full =
          construct_ruff(cfg.n, 2 * cfg.k, 0.5, derive_seed(seed, 0x727546ULL), budget.family);
      rows = static_cast<int>(std::lround(frac * full.m));
      SetFamily battery = truncate_alphabet(full, rows);

      // Starved batteries can make the pair-isolation stage impossible; such
      // a trial scores as a failed recovery (the empty guess).
      IntMat rec = IntMat::Zero(cfg.n, 2);
      try {
        auto [supp1, supp2] = l2_support(counts, battery, cfg.k, seed, budget);
        for (int i : supp1) rec(i, 0) = 1;
        for (int i : supp2) rec(i, 1) = 1;
      } catch (const EstimationFailure&) {
      }
      double h = relative_hamming(inst.support_matrix(), rec);
      hammings.push_back(h);
      if (trials) {
        TrialResult tr;
        tr.seed = seed;
        tr.hamming = h;
        tr.calls_per_phase.insert(oracle.ledger().phases().begin(),
                                  oracle.ledger().phases().end());
        tr.wall_seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        trials->push_back(tr);
      }
    }
    sweep.push_back({static_cast<double>(rows), mean_of(hammings), stderr_of(hammings)});
  }
  return sweep;
}

std::vector<SweepPoint> run_recovery_sweep(const ExperimentConfig& cfg) {
  std::vector<SweepPoint> sweep;
  for (int m : cfg.label_counts) {
    std::vector<double> errors;
    for (std::uint64_t seed : cfg.seeds) {
      MixtureInstance inst = random_separable_instance(cfg.n, cfg.k, cfg.ell, seed);
      MixtureOracle oracle(inst, derive_seed(seed, 0x6f72ULL));
      EstimatedCountSource counts(oracle);
      TwoStageOptions opts;
      opts.budget = cfg.budget;
      opts.budget.gaussian_labels_override = m;
      RecoveryResult r = two_stage_recover(counts, inst, cfg.k, cfg.epsilon, seed, opts);
      errors.push_back(r.max_error);
    }
    std::sort(errors.begin(), errors.end());
    double median = quantile_sorted(errors, 0.5);
    double iqr = quantile_sorted(errors, 0.75) - quantile_sorted(errors, 0.25);
    sweep.push_back({static_cast<double>(m), median, iqr});
  }
  return sweep;
}

void emit_results(const std::vector<SweepPoint>& points, const std::string& header,
                  const std::string& csv_path, const std::string& plot_path) {
  if (points.empty()) throw ConfigError("emit_results: nothing to write");
  std::ofstream csv(csv_path);
  if (!csv) throw ConfigError("cannot write to " + csv_path);
  csv.precision(10);
  csv << header << '\n';
  for (const auto& p : points) csv << p.x << ',' << p.y << ',' << p.spread << '\n';

  std::ofstream plot(plot_path);
  if (!plot) throw ConfigError("cannot write to " + plot_path);
  plot.precision(10);
  plot << "# x y spread\n";
  for (const auto& p : points) plot << p.x << ' ' << p.y << ' ' << p.spread << '\n';
}

}  // namespace mixclass
