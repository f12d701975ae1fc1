// Command line driver: strong-error tables, rate fits, moment sweeps, the
// vanilla-vs-monotone divergence demo, and the drift verifiers.
//
// Exit codes: 0 success, 1 verifier found violations, 2 config problems,
// 3 scheme undefined at the requested resolution, 4 anything unexpected.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "polyeuler/config.hpp"
#include "polyeuler/errors.hpp"
#include "polyeuler/experiment.hpp"
#include "polyeuler/model.hpp"
#include "polyeuler/solver.hpp"
#include "polyeuler/taming.hpp"

namespace {

using namespace polyeuler;

struct Args {
  std::string problem;
  std::string config;
  std::string scheme = "monotone";
  double alpha = 0.5;
  std::vector<std::int64_t> n;
  std::int64_t n_ref = 0;
  std::int64_t trials = 1000;
  double p = 2.0;
  std::vector<double> p_list = {2.0};
  std::uint64_t seed = 0;
  int workers = 1;
  std::string out;
  std::string plot_data;
  std::vector<std::int64_t> window;
  double x0 = 100.0;
  std::int64_t pairs = 100000;
  std::int64_t points = 100000;
};

SdeProblem load_problem(const Args& args) {
  if (args.problem.empty() == args.config.empty()) {
    throw ConfigError("pass exactly one of --problem or --config");
  }
  if (!args.problem.empty()) {
    try {
      return builtin_by_name(args.problem);
    } catch (const std::invalid_argument& err) {
      throw ConfigError(err.what());
    }
  }
  LoadedProblem loaded = load_problem_config(args.config);
  for (const auto& warning : loaded.warnings) {
    std::cerr << "WARNING " << warning << "\n";
  }
  return loaded.problem;
}

/// Writes text to `path`, or to stdout when no path was given.
void deliver(const std::string& path, const std::string& text,
             const std::string& summary) {
  if (path.empty()) {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write output file: " + path);
  out << text;
  if (!out) throw std::runtime_error("write failed: " + path);
  std::cout << summary << "\n";
}

void add_common(CLI::App* cmd, Args& args, bool with_scheme = true) {
  cmd->add_option("--problem", args.problem,
                  "builtin problem: cubic-mult, cubic-const, linear-pull");
  cmd->add_option("--config", args.config, "problem config file")
      ->check(CLI::ExistingFile);
  if (with_scheme) {
    cmd->add_option("--scheme", args.scheme, "integration scheme")
        ->check(CLI::IsMember({"vanilla", "tamed", "monotone"}));
  }
  cmd->add_option("--alpha", args.alpha, "taming exponent in (0, 1/2]");
  cmd->add_option("--seed", args.seed, "master seed");
  cmd->add_option("--workers", args.workers, "worker threads (results identical)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--out", args.out, "output CSV path (stdout when omitted)");
}

int run_table(const Args& args, bool with_fit) {
  const SdeProblem problem = load_problem(args);
  const SchemeKind kind = SchemeKind::from_label(args.scheme, args.alpha);
  ExperimentOptions options;
  options.workers = args.workers;
  const ErrorTable table = strong_error(problem, kind, args.n, args.n_ref,
                                        args.trials, args.p, args.seed, options);
  RateFit fit;
  if (with_fit) fit = fit_rate(table, args.window);

  std::ostringstream csv;
  table.write_csv(csv, with_fit ? &fit : nullptr);
  std::ostringstream summary;
  summary << "wrote " << args.out << " (" << table.rows.size()
          << " rows, problem=" << problem.name << " scheme=" << kind.label() << ")";
  deliver(args.out, csv.str(), summary.str());

  for (const auto& row : table.rows) {
    if (!row.error.empty()) {
      std::cerr << "NOTE row n=" << row.n << " failed: " << row.error << "\n";
    }
  }
  if (with_fit) {
    std::cout << "rate: slope=" << fit.slope << " intercept=" << fit.intercept
              << " residual_rms=" << fit.residual_rms << " window=";
    for (std::size_t i = 0; i < fit.window.size(); ++i) {
      std::cout << (i ? "|" : "") << fit.window[i];
    }
    std::cout << "\n";
    if (!args.plot_data.empty()) {
      std::ostringstream plot;
      table.write_loglog_csv(plot);
      deliver(args.plot_data, plot.str(), "wrote " + args.plot_data);
    }
  }
  return 0;
}

int run_moments(const Args& args) {
  const SdeProblem problem = load_problem(args);
  const SchemeKind kind = SchemeKind::from_label(args.scheme, args.alpha);
  ExperimentOptions options;
  options.workers = args.workers;
  const MomentReport report = moment_sweep(problem, kind, args.n, args.trials,
                                           args.p_list, args.seed, options);
  std::ostringstream csv;
  report.write_csv(csv);
  std::ostringstream summary;
  summary << "wrote " << args.out << " (" << report.rows.size()
          << " rows, problem=" << problem.name << " scheme=" << kind.label() << ")";
  deliver(args.out, csv.str(), summary.str());
  for (const auto& row : report.rows) {
    if (row.blowups > 0) {
      std::cerr << "NOTE estimate at n=" << row.n << " p=" << row.p
                << " excludes " << row.blowups << " blown-up trials\n";
    }
  }
  return 0;
}

int run_diverge(const Args& args) {
  const SdeProblem problem = load_problem(args);
  if (args.n.size() != 1) throw ConfigError("diverge takes exactly one --n value");
  ExperimentOptions options;
  options.workers = args.workers;
  const DivergenceReport report = divergence_demo(
      problem, args.n[0], Eigen::VectorXd::Constant(problem.state_dim, args.x0),
      args.trials, args.alpha, args.seed, options);
  std::ostringstream csv;
  report.write_csv(csv);
  std::ostringstream summary;
  summary << "wrote " << args.out;
  deliver(args.out, csv.str(), summary.str());
  for (const auto& row : report.rows) {
    std::cout << row.scheme << ": blowup_fraction=" << row.blowup_fraction
              << " median_endpoint_norm=" << row.median_endpoint_norm << "\n";
  }
  return 0;
}

int run_verify(const Args& args) {
  const SdeProblem problem = load_problem(args);
  if (args.n.size() != 1) throw ConfigError("verify takes exactly one --n value");
  const std::int64_t n = args.n[0];
  const TamedDrift drift = TamedDrift::build(problem, n, args.alpha);
  if (!drift.notice().empty()) std::cerr << "NOTE " << drift.notice() << "\n";
  std::cout << "radius: n=" << n << " alpha=" << args.alpha << " s="
            << drift.radius() << "\n";

  const VerifierReport mono =
      verify_monotonicity(drift, args.pairs, 0.0, args.seed);
  const VerifierReport growth = verify_growth(drift, args.points, 0.0, args.seed);

  VerifierReport combined = mono;
  combined.regions.insert(combined.regions.end(), growth.regions.begin(),
                          growth.regions.end());
  std::ostringstream csv;
  combined.write_csv(csv);
  deliver(args.out, csv.str(), "wrote " + args.out);

  const bool pass = mono.pass() && growth.pass();
  std::cout << (pass ? "PASS" : "FAIL")
            << " monotonicity max_violation=" << mono.max_violation()
            << " growth max_excess=" << growth.max_violation() << "\n";
  return pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"strongly monotone polygonal Euler scheme driver"};
  app.require_subcommand(1);
  Args args;

  CLI::App* table = app.add_subcommand("table", "coupled strong-error table");
  add_common(table, args);
  table->add_option("--n", args.n, "resolutions, comma separated")
      ->required()
      ->delimiter(',');
  table->add_option("--n-ref", args.n_ref, "reference resolution")->required();
  table->add_option("--trials", args.trials, "Monte Carlo trials");
  table->add_option("--p", args.p, "error moment order");

  CLI::App* rate = app.add_subcommand("rate", "strong-error table plus rate fit");
  add_common(rate, args);
  rate->add_option("--n", args.n, "resolutions, comma separated")
      ->required()
      ->delimiter(',');
  rate->add_option("--n-ref", args.n_ref, "reference resolution")->required();
  rate->add_option("--trials", args.trials, "Monte Carlo trials");
  rate->add_option("--p", args.p, "error moment order");
  rate->add_option("--window", args.window, "n values to fit (default: largest 3)")
      ->delimiter(',');
  rate->add_option("--plot-data", args.plot_data, "also write log2/log2 CSV here");

  CLI::App* moments = app.add_subcommand("moments", "path-supremum moment sweep");
  add_common(moments, args);
  moments->add_option("--n", args.n, "resolutions, comma separated")
      ->required()
      ->delimiter(',');
  moments->add_option("--trials", args.trials, "Monte Carlo trials");
  moments->add_option("--p", args.p_list, "moment orders, comma separated")
      ->delimiter(',');

  CLI::App* diverge =
      app.add_subcommand("diverge", "vanilla vs monotone blowup demo");
  add_common(diverge, args, /*with_scheme=*/false);
  diverge->add_option("--n", args.n, "coarse resolution")->required();
  diverge->add_option("--trials", args.trials, "Monte Carlo trials");
  diverge->add_option("--x0", args.x0, "initial state (scalar, applied per axis)");

  CLI::App* verify = app.add_subcommand("verify", "drift verifier reports");
  add_common(verify, args, /*with_scheme=*/false);
  verify->add_option("--n", args.n, "resolution")->required();
  verify->add_option("--pairs", args.pairs, "monotonicity sample pairs");
  verify->add_option("--points", args.points, "growth sample points");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& help) {
    return app.exit(help);
  } catch (const CLI::ParseError& err) {
    std::cerr << "ERROR[config] " << err.what() << "\n";
    return 2;
  }

  try {
    if (!(args.alpha > 0.0 && args.alpha <= 0.5)) {
      throw polyeuler::ConfigError("--alpha must lie in (0, 1/2]");
    }
    if (table->parsed()) return run_table(args, /*with_fit=*/false);
    if (rate->parsed()) return run_table(args, /*with_fit=*/true);
    if (moments->parsed()) return run_moments(args);
    if (diverge->parsed()) return run_diverge(args);
    if (verify->parsed()) return run_verify(args);
    std::cerr << "ERROR[config] no subcommand\n";
    return 2;
  } catch (const polyeuler::ConfigError& err) {
    std::cerr << "ERROR[config] " << err.what() << "\n";
    return 2;
  } catch (const polyeuler::SchemeUndefinedError& err) {
    std::cerr << "ERROR[scheme-undefined] " << err.what() << "\n";
    return 3;
  } catch (const std::exception& err) {
    std::cerr << "ERROR[runtime] " << err.what() << "\n";
    return 4;
  }
}
