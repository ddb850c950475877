// bench: run CP / HCP / aCP experiment suites, dump instances, verify traces.
//
//   bench run <config-file> [--out DIR] [--seed N] [--algorithms LIST] [--max-iters N]
//   bench gen <problem> <variant> --seed N --out FILE [--p N] [--q N] [--s N] [--mu X] [--corr-v X]
//   bench verify <trace-file> [--instance FILE] [--reference-iters N]
//
// Exit codes: 0 success, 1 config error, 2 numeric failure, 3 invariant
// violation found by verify.

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

#include "pha/bench.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitNumeric = 2;
constexpr int kExitViolation = 3;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw pha::ConfigError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Preconditioned Halpern / accelerated Chambolle-Pock benchmark driver"};
  app.require_subcommand(1);

  auto* run = app.add_subcommand("run", "Run an experiment config and write one trace CSV per algorithm");
  std::string config_path;
  std::optional<std::string> out_dir;
  std::optional<long> seed;
  std::optional<std::string> algorithms;
  std::optional<long> max_iters;
  run->add_option("config", config_path, "Experiment config file")->required();
  run->add_option("--out", out_dir, "Output directory (overrides output_path)");
  run->add_option("--seed", seed, "Instance seed");
  run->add_option("--algorithms", algorithms, "Comma list: cp,hcp,restarted_hcp,acp,restarted_acp");
  run->add_option("--max-iters", max_iters, "Iteration budget");

  auto* gen = app.add_subcommand("gen", "Generate an instance and write it in text form");
  std::string gen_problem;
  std::string gen_variant;
  long gen_seed = 0;
  std::string gen_out;
  std::optional<long> gen_p, gen_q, gen_s;
  std::optional<double> gen_mu, gen_corr;
  gen->add_option("problem", gen_problem, "matrix_game | lasso")->required();
  gen->add_option("variant", gen_variant, "Problem variant")->required();
  gen->add_option("--seed", gen_seed, "Instance seed")->required();
  gen->add_option("--out", gen_out, "Output file")->required();
  gen->add_option("--p", gen_p, "Rows of K");
  gen->add_option("--q", gen_q, "Columns of K");
  gen->add_option("--s", gen_s, "LASSO sparsity");
  gen->add_option("--mu", gen_mu, "LASSO weight");
  gen->add_option("--corr-v", gen_corr, "Column correlation (correlated LASSO)");

  auto* verify = app.add_subcommand("verify", "Re-check invariants recorded in a trace");
  std::string trace_path;
  std::optional<std::string> instance_path;
  long reference_iters = 100000;
  verify->add_option("trace", trace_path, "Trace CSV")->required();
  verify->add_option("--instance", instance_path, "Instance file written by 'bench gen'");
  verify->add_option("--reference-iters", reference_iters, "CP reference run length for the rate bound");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*run) {
      auto cfg = pha::bench::parse_config(slurp(config_path));
      if (out_dir) cfg.output_path = *out_dir;
      if (seed) {
        if (*seed < 0) throw pha::ConfigError("--seed must be >= 0");
        cfg.seed = static_cast<std::uint64_t>(*seed);
      }
      if (algorithms) cfg.algorithms = pha::bench::detail::split_list(*algorithms);
      if (max_iters) cfg.max_iters = *max_iters;
      cfg.validate();
      std::cerr << pha::bench::serialize_config(cfg);
      pha::bench::run_experiment(cfg, &std::cerr);
      return kExitOk;
    }

    if (*gen) {
      // Reuse the config parser so defaults and validation match 'run'.
      std::ostringstream text;
      text << "problem = " << gen_problem << "\nvariant = " << gen_variant << "\nseed = " << gen_seed << '\n';
      if (gen_p) text << "p = " << *gen_p << '\n';
      if (gen_q) text << "q = " << *gen_q << '\n';
      if (gen_s) text << "s = " << *gen_s << '\n';
      if (gen_mu) text << "mu = " << pha::detail::fmt17(*gen_mu) << '\n';
      if (gen_corr) text << "corr_v = " << pha::detail::fmt17(*gen_corr) << '\n';
      const auto cfg = pha::bench::parse_config(text.str());
      std::ofstream os(gen_out);
      if (!os) throw pha::ConfigError("cannot write '" + gen_out + "'");
      pha::write_instance(os, pha::bench::make_instance(cfg));
      return os ? kExitOk : kExitConfig;
    }

    if (*verify) {
      std::ifstream in(trace_path);
      if (!in) throw pha::ConfigError("cannot open '" + trace_path + "'");
      const auto trace = pha::bench::read_trace_csv(in);
      std::optional<pha::Instance> instance;
      if (instance_path) {
        std::ifstream is(*instance_path);
        if (!is) throw pha::ConfigError("cannot open '" + *instance_path + "'");
        instance = pha::read_instance(is);
      }
      const auto report =
          pha::bench::verify_trace(trace, instance ? &*instance : nullptr, {reference_iters});
      for (const auto& c : report.checks) std::cout << "checked: " << c << '\n';
      for (const auto& v : report.violations) std::cout << "VIOLATION: " << v << '\n';
      std::cout << (report.ok() ? "OK" : "FAILED") << '\n';
      return report.ok() ? kExitOk : kExitViolation;
    }
  } catch (const pha::ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const pha::ContractError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const pha::DimensionError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const pha::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitOk;
}
