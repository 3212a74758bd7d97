#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>

#include "mixclass/errors.hpp"
#include "mixclass/harness.hpp"
#include "mixclass/instance.hpp"
#include "mixclass/movielens.hpp"
#include "mixclass/oracle.hpp"
#include "mixclass/recovery.hpp"
#include "mixclass/rng.hpp"
#include "mixclass/set_family.hpp"
#include "mixclass/support.hpp"
#include "mixclass/two_mix.hpp"

namespace {

using namespace mixclass;

std::string data_path(const std::string& p) {
  if (p.empty() || p.front() == '/') return p;
  const char* dir = std::getenv("MIXCLASS_DATA_DIR");
  return dir ? std::string(dir) + "/" + p : p;
}

std::vector<Vec> read_query_file(const std::string& path, int dim) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open query file: " + path);
  std::vector<Vec> queries;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::vector<double> vals;
    double x;
    while (ls >> x) vals.push_back(x);
    if (static_cast<int>(vals.size()) != dim)
      throw ConfigError(path + " line " + std::to_string(line_no) + ": expected " +
                        std::to_string(dim) + " values");
    queries.push_back(Eigen::Map<Vec>(vals.data(), dim));
  }
  return queries;
}

void write_recovery_csv(const RecoveryResult& r, const std::vector<int>& reps,
                        const std::vector<int>& signs, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot write to " + path);
  out.precision(10);
  out << "component,rep_coord,rep_sign,l2_error,queries_used\n";
  for (std::size_t t = 0; t < r.estimates.size(); ++t) {
    int rep = t < reps.size() ? reps[t] : -1;
    int sgn = t < signs.size() ? signs[t] : 0;
    double err = t < r.errors.size() ? r.errors[t] : -1.0;
    out << t << ',' << rep << ',' << sgn << ',' << err << ',' << r.queries_used.total() << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"mixclass: query-efficient recovery of mixtures of sparse linear classifiers"};
  app.require_subcommand(1);

  // setfam
  auto* setfam = app.add_subcommand("setfam", "construct/verify query set families");
  setfam->require_subcommand(1);
  auto* sf_con = setfam->add_subcommand("construct", "randomized RUFF/CFF construction");
  std::string sf_kind = "ruff", sf_out = "family.txt", sf_in;
  int sf_n = 10, sf_t = 2, sf_r = 2;
  double sf_alpha = 0.5;
  std::uint64_t sf_seed = 1;
  sf_con->add_option("--kind", sf_kind)->check(CLI::IsMember({"ruff", "cff"}))->required();
  sf_con->add_option("--n", sf_n)->required();
  sf_con->add_option("--t", sf_t)->required();
  sf_con->add_option("--r", sf_r);
  sf_con->add_option("--alpha", sf_alpha);
  sf_con->add_option("--seed", sf_seed)->required();
  sf_con->add_option("--out", sf_out)->required();
  auto* sf_ver = setfam->add_subcommand("verify", "exhaustive property check");
  sf_ver->add_option("--in", sf_in)->required();
  sf_ver->add_option("--t", sf_t)->required();
  sf_ver->add_option("--r", sf_r);
  sf_ver->add_option("--alpha", sf_alpha);

  // oracle
  auto* oracle_cmd = app.add_subcommand("oracle", "batched count estimation");
  auto* simulate = oracle_cmd->add_subcommand("simulate", "estimate counts for a query file");
  std::string or_instance, or_queries, or_out = "-";
  int or_batch = 64;
  std::uint64_t or_seed = 1;
  simulate->add_option("--instance", or_instance)->required();
  simulate->add_option("--query-file", or_queries)->required();
  simulate->add_option("--batch", or_batch);
  simulate->add_option("--seed", or_seed);
  simulate->add_option("--out", or_out);

  // support
  auto* support_cmd = app.add_subcommand("support", "support-matrix recovery");
  auto* sup_rec = support_cmd->add_subcommand("recover", "recover the support matrix");
  std::string su_instance, su_out = "support.csv";
  int su_k = 3, su_ell = 2;
  std::uint64_t su_seed = 1;
  bool su_exact = false;
  sup_rec->add_option("--instance", su_instance)->required();
  sup_rec->add_option("--k", su_k)->required();
  sup_rec->add_option("--ell", su_ell)->required();
  sup_rec->add_option("--seed", su_seed);
  sup_rec->add_option("--out", su_out);
  sup_rec->add_flag("--exact-oracle", su_exact, "use brute-force counts (testing mode)");

  // recover
  auto* recover_cmd = app.add_subcommand("recover", "epsilon-recovery of all components");
  std::string re_mode, re_instance, re_out = "result.csv", re_estimates;
  int re_k = 3, re_ell = 2;
  double re_eps = 0.2;
  std::uint64_t re_seed = 1;
  bool re_exact = false;
  recover_cmd->add_option("mode", re_mode)->check(CLI::IsMember({"two-stage", "one-stage"}))
      ->required();
  recover_cmd->add_option("--instance", re_instance)->required();
  recover_cmd->add_option("--k", re_k)->required();
  recover_cmd->add_option("--ell", re_ell)->required();
  recover_cmd->add_option("--epsilon", re_eps)->required();
  recover_cmd->add_option("--seed", re_seed);
  recover_cmd->add_option("--out", re_out);
  recover_cmd->add_option("--estimates-out", re_estimates);
  recover_cmd->add_flag("--exact-oracle", re_exact);

  // two-mix
  auto* twomix_cmd = app.add_subcommand("two-mix", "ell=2 recovery without separability");
  auto* tm_rec = twomix_cmd->add_subcommand("recover", "two-component pipeline");
  std::string tm_instance, tm_out = "result.csv";
  int tm_k = 3;
  double tm_eps = 0.3, tm_delta = 0.0;
  std::uint64_t tm_seed = 1;
  bool tm_dense = false, tm_exact = false;
  int tm_rounds = 0;
  tm_rec->add_option("--instance", tm_instance)->required();
  tm_rec->add_option("--k", tm_k)->required();
  tm_rec->add_option("--delta", tm_delta);
  tm_rec->add_option("--epsilon", tm_eps)->required();
  tm_rec->add_option("--seed", tm_seed);
  tm_rec->add_option("--out", tm_out);
  tm_rec->add_option("--rounds", tm_rounds, "override the +/-1 round count");
  tm_rec->add_flag("--dense", tm_dense, "Corollary-1 mode: support = all coordinates");
  tm_rec->add_flag("--exact-oracle", tm_exact);

  // experiment
  auto* exp_cmd = app.add_subcommand("experiment", "seeded experiment driver");
  std::string exp_config;
  exp_cmd->add_option("--config", exp_config)->required();

  try {
    app.parse(argc, argv);

    if (sf_con->parsed()) {
      SetFamily f = sf_kind == "ruff" ? construct_ruff(sf_n, sf_t, sf_alpha, sf_seed)
                                      : construct_cff(sf_n, sf_r, sf_t, sf_seed);
      write_set_family(f, sf_out);
      std::cout << "wrote " << sf_kind << " family n=" << f.n << " m=" << f.m << " to " << sf_out
                << '\n';
      return 0;
    }
    if (sf_ver->parsed()) {
      SetFamily f = read_set_family(sf_in);
      bool ok =
          f.kind == FamilyKind::Ruff ? verify_ruff(f, sf_t, sf_alpha) : verify_cff(f, sf_r, sf_t);
      std::cout << (ok ? "valid" : "invalid") << '\n';
      return ok ? 0 : 1;
    }

    if (simulate->parsed()) {
      MixtureInstance inst = read_instance(data_path(or_instance));
      MixtureOracle oracle(inst, or_seed);
      auto queries = read_query_file(data_path(or_queries), inst.dim());
      std::ostream* os = &std::cout;
      std::ofstream file;
      if (or_out != "-") {
        file.open(or_out);
        if (!file) throw ConfigError("cannot write to " + or_out);
        os = &file;
      }
      *os << "query_id,pos,neg,z,nz,calls\n";
      for (std::size_t q = 0; q < queries.size(); ++q) {
        CountEstimate c = oracle.estimate_counts(queries[q], or_batch);
        *os << q << ',' << c.pos << ',' << c.neg << ',' << c.z << ',' << c.nz << ','
            << oracle.ledger().total() << '\n';
      }
      return 0;
    }

    if (support_cmd->parsed()) {
      MixtureInstance inst = read_instance(data_path(su_instance));
      MixtureOracle oracle(inst, su_seed);
      EstimatedCountSource estimated(oracle);
      ExactCountSource exact(inst);
      CountSource& counts = su_exact ? static_cast<CountSource&>(exact)
                                     : static_cast<CountSource&>(estimated);
      SupportRecovery sup = recover_support_full(counts, inst.dim(), su_k, su_ell, su_seed);
      int t_sign = default_batchsize(su_ell, 0.002, su_ell);
      std::vector<int> signs = recover_rep_signs(counts, sup.x, sup.ruff, t_sign);

      std::ofstream out(su_out);
      if (!out) throw ConfigError("cannot write to " + su_out);
      out << "rep";
      for (int r : sup.x.reps) out << ',' << r;
      out << "\nsign";
      for (int s : signs) out << ',' << s;
      out << "\ncoordinate";
      for (int t = 0; t < su_ell; ++t) out << ",col_" << (t + 1);
      out << '\n';
      for (int i = 0; i < inst.dim(); ++i) {
        out << i;
        for (int t = 0; t < su_ell; ++t) out << ',' << sup.x.x(i, t);
        out << '\n';
      }
      std::cout << "support matrix written to " << su_out << " (oracle calls: "
                << counts.ledger().total() << ")\n";
      return 0;
    }

    if (recover_cmd->parsed()) {
      MixtureInstance inst = read_instance(data_path(re_instance));
      MixtureOracle oracle(inst, re_seed);
      EstimatedCountSource estimated(oracle);
      ExactCountSource exact(inst);
      CountSource& counts = re_exact ? static_cast<CountSource&>(exact)
                                     : static_cast<CountSource&>(estimated);
      if (inst.ell() != re_ell) throw ConfigError("--ell does not match the instance");
      RecoveryResult result;
      if (re_mode == "two-stage") {
        result = two_stage_recover(counts, inst, re_k, re_eps, re_seed);
      } else {
        result = one_stage_recover(counts, inst, re_k, re_eps, re_seed).result;
      }
      IntMat x = IntMat::Zero(inst.dim(), re_ell);
      for (int t = 0; t < re_ell; ++t)
        for (int i : result.estimates[t].indices()) x(i, t) = 1;
      std::vector<int> reps = representative_coordinates(x);
      std::vector<int> signs(re_ell, 0);
      for (int t = 0; t < re_ell; ++t)
        if (reps[t] >= 0) {
          for (int p = 0; p < result.estimates[t].nnz(); ++p)
            if (result.estimates[t].indices()[p] == reps[t])
              signs[t] = result.estimates[t].values()[p] >= 0 ? 1 : -1;
        }
      write_recovery_csv(result, reps, signs, re_out);
      std::string est_path = re_estimates.empty() ? re_out + ".estimates" : re_estimates;
      write_components(inst.dim(), result.estimates, inst.delta(), est_path);
      std::cout << "max l2 error " << result.max_error << ", oracle calls "
                << result.queries_used.total() << '\n';
      return 0;
    }

    if (twomix_cmd->parsed()) {
      MixtureInstance inst = read_instance(data_path(tm_instance));
      MixtureOracle oracle(inst, tm_seed);
      EstimatedCountSource estimated(oracle);
      ExactCountSource exact(inst);
      CountSource& counts = tm_exact ? static_cast<CountSource&>(exact)
                                     : static_cast<CountSource&>(estimated);
      BudgetConfig cfg;
      cfg.subgaussian_rounds_override = tm_rounds;
      RecoveryResult result =
          l2_recover(counts, inst, tm_k, tm_eps, tm_delta, tm_seed, tm_dense, cfg);
      write_recovery_csv(result, {-1, -1}, {0, 0}, tm_out);
      write_components(inst.dim(), result.estimates, inst.delta(), tm_out + ".estimates");
      std::cout << "max l2 error " << result.max_error << ", oracle calls "
                << result.queries_used.total() << '\n';
      return 0;
    }

    if (exp_cmd->parsed()) {
      ExperimentConfig cfg = read_experiment_config(exp_config);
      std::string plot = cfg.plot_out.empty() ? cfg.out + ".plot" : cfg.plot_out;
      if (cfg.kind == "support-sim") {
        auto sweep = run_support_trials(cfg);
        emit_results(sweep, "rows,mean_hamming,stderr", cfg.out, plot);
      } else if (cfg.kind == "recovery-sweep") {
        auto sweep = run_recovery_sweep(cfg);
        emit_results(sweep, "m,median_l2,iqr", cfg.out, plot);
      } else if (cfg.kind == "movielens") {
        PreferenceInstance pref =
            ingest_movielens(data_path(cfg.ratings_path), data_path(cfg.movies_path), cfg.user1,
                             cfg.user2, cfg.min_common);
        MovielensMetrics m = movielens_experiment(pref, cfg.m1, cfg.m2, cfg.seeds);
        std::ofstream out(cfg.out);
        if (!out) throw ConfigError("cannot write to " + cfg.out);
        out.precision(6);
        out << "user_pair,m1,m2,A_u1,P_u1,R_u1,A_u2,P_u2,R_u2\n";
        out << cfg.user1 << '-' << cfg.user2 << ',' << cfg.m1 << ',' << cfg.m2 << ','
            << m.accuracy1 << ',' << m.precision1 << ',' << m.recall1 << ',' << m.accuracy2
            << ',' << m.precision2 << ',' << m.recall2 << '\n';
      } else {
        throw ConfigError("unknown experiment kind: " + cfg.kind);
      }
      std::cout << "results written to " << cfg.out << '\n';
      return 0;
    }

    throw CLI::CallForHelp();
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const AssumptionViolated& e) {
    std::cerr << "assumption violated: " << e.what() << '\n';
    return 3;
  } catch (const EstimationFailure& e) {
    std::cerr << "estimation failure: " << e.what() << '\n';
    return 4;
  }
}
