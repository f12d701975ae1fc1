// Release gate for the monotone polygonal scheme: every promised behavior,
// each checked at its advertised tolerance against a closed form, a
// hand-checkable iteration, or the benchmark error tables.  One [PASS] or
// [FAIL] line per criterion; the exit status counts the failures.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "polyeuler/experiment.hpp"
#include "polyeuler/model.hpp"
#include "polyeuler/paths.hpp"
#include "polyeuler/solver.hpp"
#include "polyeuler/taming.hpp"

namespace {

using polyeuler::ErrorTable;
using polyeuler::MomentReport;

constexpr std::uint64_t kSeed = 42;
constexpr double kAlpha = 0.5;

// Resolutions shared by the error-table criteria, with their reference grid.
const std::vector<std::int64_t> kTableNs = {2048, 4096, 8192, 16384, 32768};
constexpr std::int64_t kTableRef = 65536;
constexpr std::int64_t kTableTrials = 1000;

// Benchmark endpoint mean-square errors for the two cubic problems at the
// resolutions above.  The factor-3 band absorbs Monte Carlo noise and
// reference-grid differences; the slope caps are the load-bearing part.
const double kBenchmarkConstMse[] = {5.90e-1, 3.41e-1, 1.45e-1, 4.35e-2, 1.09e-2};
const double kBenchmarkMultMse[] = {5.27e-1, 4.19e-1, 2.83e-1, 1.57e-1, 6.53e-2};

std::string fmt(double value) {
  char buf[48];
  std::snprintf(buf, sizeof buf, "%.4g", value);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

int g_failures = 0;

template <typename Fn>
void criterion(int index, const char* name, Fn&& body) {
  Outcome outcome;
  try {
    outcome = body();
  } catch (const std::exception& error) {
    outcome = {false, std::string("exception: ") + error.what()};
  }
  std::printf("[%s] criterion %d (%s): %s\n", outcome.pass ? "PASS" : "FAIL", index,
              name, outcome.detail.c_str());
  std::fflush(stdout);
  if (!outcome.pass) ++g_failures;
}

Outcome monotonicity_sweep() {
  const auto problem = polyeuler::builtin_cubic_multiplicative();
  double worst = 0.0;
  bool pass = true;
  for (std::int64_t n : {16, 256, 2048, 65536}) {
    const auto drift = polyeuler::TamedDrift::build(problem, n, kAlpha);
    const auto report = polyeuler::verify_monotonicity(drift, 100000, 0.0, kSeed, 1e-9);
    worst = std::max(worst, report.max_violation());
    pass = pass && report.pass();
  }
  return {pass, "max normalized defect " + fmt(worst) +
                    " over n in {2^4, 2^8, 2^11, 2^16}, 100000 pairs each (tol 1e-9)"};
}

Outcome growth_sweep() {
  const auto problem = polyeuler::builtin_cubic_multiplicative();
  double worst = 0.0;
  bool pass = true;
  for (std::int64_t n : {16, 256, 2048, 65536}) {
    const auto drift = polyeuler::TamedDrift::build(problem, n, kAlpha);
    const auto report =
        polyeuler::verify_growth(drift, 100000, 10.0 * drift.radius(), kSeed, 1e-9);
    worst = std::max(worst, report.max_violation());
    pass = pass && report.pass();
  }
  return {pass, "max excess over (L+1) n^a (1+|x|): " + fmt(worst) +
                    ", 100000 points out to 10 s_n per resolution (tol 1e-9)"};
}

Outcome radius_closed_form() {
  const polyeuler::SdeProblem problems[] = {polyeuler::builtin_cubic_multiplicative(),
                                            polyeuler::builtin_cubic_constant_diffusion()};
  double worst_gap = 0.0;
  for (const auto& problem : problems) {
    for (int k = 4; k <= 17; ++k) {
      const auto n = std::int64_t{1} << k;
      const double located = polyeuler::locate_taming_radius(problem, n, kAlpha);
      const double closed = std::cbrt(10.0 * std::sqrt(static_cast<double>(n)));
      worst_gap = std::max(worst_gap, std::abs(located - closed));
    }
  }
  std::vector<std::int64_t> tail;
  for (int k = 11; k <= 17; ++k) tail.push_back(std::int64_t{1} << k);
  const auto scaling = polyeuler::taming_radius_scaling(problems[0], kAlpha, tail);
  double ratio_lo = std::numeric_limits<double>::infinity();
  double ratio_hi = 0.0;
  for (const auto& row : scaling.rows) {
    ratio_lo = std::min(ratio_lo, row.ratio);
    ratio_hi = std::max(ratio_hi, row.ratio);
  }
  const bool pass = worst_gap <= 1e-6 && scaling.pass && ratio_lo >= 1.5 && ratio_hi <= 2.2;
  return {pass, "max |located - closed| " + fmt(worst_gap) +
                    " over both cubics, n in {2^4..2^17} (tol 1e-6); scaled radius in [" +
                    fmt(ratio_lo) + ", " + fmt(ratio_hi) + "] (band [1.5, 2.2])"};
}

Outcome table_band(const polyeuler::SdeProblem& problem, const double* benchmark,
                   std::vector<std::int64_t> window, double slope_cap,
                   std::optional<ErrorTable>& keep) {
  auto table =
      polyeuler::strong_error(problem, polyeuler::SchemeKind::monotone_polygonal(kAlpha),
                              kTableNs, kTableRef, kTableTrials, 2.0, kSeed);
  bool band = true;
  std::ostringstream ratios;
  for (std::size_t i = 0; i < table.rows.size(); ++i) {
    const double ratio = table.rows[i].error_moment / benchmark[i];
    if (!(ratio >= 1.0 / 3.0 && ratio <= 3.0)) band = false;
    ratios << (i ? "," : "") << fmt(ratio);
  }
  const auto fit = polyeuler::fit_rate(table, std::move(window));
  const bool slope_ok = fit.slope <= slope_cap;
  keep = std::move(table);
  std::ostringstream detail;
  detail << "mse/benchmark " << ratios.str() << " (band [0.333, 3]); slope " << fmt(fit.slope)
         << " (need <= " << fmt(slope_cap) << ")";
  return {band && slope_ok, detail.str()};
}

Outcome moment_uniformity(std::optional<MomentReport>& keep) {
  auto report = polyeuler::moment_sweep(polyeuler::builtin_cubic_multiplicative(),
                                        polyeuler::SchemeKind::monotone_polygonal(kAlpha),
                                        {256, 1024, 4096, 16384}, 2000, {2.0}, kSeed);
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  std::int64_t blowups = 0;
  for (const auto& row : report.rows) {
    lo = std::min(lo, row.estimate);
    hi = std::max(hi, row.estimate);
    blowups += row.blowups;
  }
  const double spread = hi / lo;
  keep = std::move(report);
  return {spread < 1.2 && blowups == 0,
          "sup-moment spread max/min " + fmt(spread) + " (need < 1.2), blowups " +
              std::to_string(blowups) + " (need 0), n in {2^8, 2^10, 2^12, 2^14}"};
}

Outcome divergence_contrast() {
  auto problem = polyeuler::builtin_cubic_multiplicative();
  problem.name = "cubic-no-noise";
  problem.diffusion = [](const Eigen::VectorXd&, Eigen::MatrixXd& out) { out.setZero(); };
  problem.sigma_lipschitz = 0.0;
  problem.validate();

  const auto grid = polyeuler::IncrementGrid::from_values(16, 1.0, Eigen::MatrixXd::Zero(1, 16));
  Eigen::VectorXd x0(1);
  x0 << 50.0;

  std::int64_t first_big = -1;
  double first_iterate = 0.0;
  polyeuler::SimulateOptions options;
  options.observer = [&](std::int64_t step, double, const Eigen::VectorXd& state) {
    if (step == 1) first_iterate = state[0];
    if (first_big < 0 && state.norm() > 1e10) first_big = step;
  };
  polyeuler::simulate(problem, polyeuler::SchemeKind::vanilla(), 16, grid, x0, options);
  const auto tamed =
      polyeuler::simulate(problem, polyeuler::SchemeKind::monotone_polygonal(kAlpha), 16, grid, x0);

  const bool vanilla_ok =
      first_big >= 1 && first_big <= 5 && std::abs(first_iterate + 731.4375) <= 1e-9;
  const bool tamed_ok = !tamed.blowup && tamed.sup_norm <= 100.0;
  std::ostringstream detail;
  detail << "vanilla first iterate " << fmt(first_iterate) << ", |X| > 1e10 at step "
         << first_big << " (need <= 5); monotone sup " << fmt(tamed.sup_norm)
         << " over 16 steps (need <= 100)";
  return {vanilla_ok && tamed_ok, detail.str()};
}

Outcome oracle_rates() {
  // Noise-free pull toward zero from 2: the exact endpoint is 2/e and the
  // one-step error analysis gives a clean 1/n decay.
  const auto ode = polyeuler::builtin_linear_pull(1.0, 0.0, 0.0, 2.0);
  const double exact = 2.0 * std::exp(-1.0);
  Eigen::VectorXd x0(1);
  x0 << 2.0;
  ErrorTable det;
  det.meta.problem = "linear-pull-ode";
  det.meta.scheme = "monotone";
  det.meta.alpha = kAlpha;
  det.meta.p = 1.0;
  det.meta.trials = 1;
  std::vector<std::int64_t> det_window;
  double worst_scaled = 0.0;
  for (int k = 4; k <= 12; ++k) {
    const auto n = std::int64_t{1} << k;
    const auto grid =
        polyeuler::IncrementGrid::from_values(n, 1.0, Eigen::MatrixXd::Zero(1, n));
    const auto sim =
        polyeuler::simulate(ode, polyeuler::SchemeKind::monotone_polygonal(kAlpha), n, grid, x0);
    polyeuler::ErrorRow row;
    row.n = n;
    row.trials_used = 1;
    row.error_moment = std::abs(sim.endpoint[0] - exact);
    det.rows.push_back(row);
    det_window.push_back(n);
    worst_scaled = std::max(worst_scaled, row.error_moment * static_cast<double>(n));
  }
  const auto det_fit = polyeuler::fit_rate(det, det_window);
  const bool det_ok = std::abs(det_fit.slope + 1.0) <= 0.1;

  // Additive noise keeps the diffusion constant, so the endpoint error gains
  // a full order: the coupled mse slope should sit near -2.
  const auto ou = polyeuler::builtin_linear_pull(1.0, 3.0, 0.5, 1.0);
  const std::vector<std::int64_t> ns = {64, 128, 256, 512, 1024};
  const auto table =
      polyeuler::strong_error(ou, polyeuler::SchemeKind::monotone_polygonal(kAlpha), ns, 16384,
                              2000, 2.0, kSeed);
  const auto noisy_fit = polyeuler::fit_rate(table, ns);
  const bool noisy_ok = noisy_fit.slope >= -2.4 && noisy_fit.slope <= -1.6;

  std::ostringstream detail;
  detail << "ODE error slope " << fmt(det_fit.slope) << " (need -1 +/- 0.1, max n*err "
         << fmt(worst_scaled) << "); noisy mse slope " << fmt(noisy_fit.slope)
         << " (need in [-2.4, -1.6])";
  return {det_ok && noisy_ok, detail.str()};
}

Outcome worker_reproducibility(const std::optional<ErrorTable>& table_const,
                               const std::optional<ErrorTable>& table_mult,
                               const std::optional<MomentReport>& moments) {
  if (!table_const || !table_mult || !moments) {
    return {false, "upstream experiment results unavailable"};
  }
  polyeuler::ExperimentOptions wide;
  wide.workers = 8;
  const auto const_wide = polyeuler::strong_error(
      polyeuler::builtin_cubic_constant_diffusion(),
      polyeuler::SchemeKind::monotone_polygonal(kAlpha), kTableNs, kTableRef, kTableTrials, 2.0,
      kSeed, wide);
  const auto mult_wide = polyeuler::strong_error(
      polyeuler::builtin_cubic_multiplicative(),
      polyeuler::SchemeKind::monotone_polygonal(kAlpha), kTableNs, kTableRef, kTableTrials, 2.0,
      kSeed, wide);
  const auto moments_wide = polyeuler::moment_sweep(
      polyeuler::builtin_cubic_multiplicative(),
      polyeuler::SchemeKind::monotone_polygonal(kAlpha), {256, 1024, 4096, 16384}, 2000, {2.0},
      kSeed, wide);

  const auto table_csv = [](const ErrorTable& table) {
    std::ostringstream out;
    table.write_csv(out);
    return out.str();
  };
  const auto moments_csv = [](const MomentReport& report) {
    std::ostringstream out;
    report.write_csv(out);
    return out.str();
  };
  const bool same_const = table_csv(*table_const) == table_csv(const_wide);
  const bool same_mult = table_csv(*table_mult) == table_csv(mult_wide);
  const bool same_moments = moments_csv(*moments) == moments_csv(moments_wide);
  std::ostringstream detail;
  detail << "workers 1 vs 8 byte-identical: const table " << (same_const ? "yes" : "NO")
         << ", mult table " << (same_mult ? "yes" : "NO") << ", moment sweep "
         << (same_moments ? "yes" : "NO");
  return {same_const && same_mult && same_moments, detail.str()};
}

}  // namespace

int main() {
  std::printf("release gate: 9 criteria, seed %llu\n",
              static_cast<unsigned long long>(kSeed));
  std::optional<ErrorTable> table_const;
  std::optional<ErrorTable> table_mult;
  std::optional<MomentReport> moments;

  criterion(1, "drift monotonicity", monotonicity_sweep);
  criterion(2, "drift growth bound", growth_sweep);
  criterion(3, "taming radius closed form", radius_closed_form);
  criterion(4, "strong error table, constant diffusion", [&] {
    return table_band(polyeuler::builtin_cubic_constant_diffusion(), kBenchmarkConstMse,
                      {8192, 16384, 32768}, -1.5, table_const);
  });
  criterion(5, "strong error table, multiplicative diffusion", [&] {
    return table_band(polyeuler::builtin_cubic_multiplicative(), kBenchmarkMultMse, kTableNs,
                      -0.7, table_mult);
  });
  criterion(6, "moment uniformity", [&] { return moment_uniformity(moments); });
  criterion(7, "divergence contrast", divergence_contrast);
  criterion(8, "linear-pull oracle rates", oracle_rates);
  criterion(9, "worker-count reproducibility", [&] {
    return worker_reproducibility(table_const, table_mult, moments);
  });

  std::printf("%d of 9 criteria passed\n", 9 - g_failures);
  return g_failures;
}
