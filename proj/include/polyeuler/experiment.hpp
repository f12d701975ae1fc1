#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "polyeuler/model.hpp"
#include "polyeuler/solver.hpp"

namespace polyeuler {

struct ExperimentOptions {
  int workers = 1;
  TamingOptions taming;
  double overflow_guard = 1e150;
};

struct ErrorRow {
  std::int64_t n = 0;
  std::int64_t trials_used = 0;
  double error_moment = 0.0;    // mean of |X_ref(T) - X_n(T)|^p over used trials
  double ci_half_width = 0.0;   // 95% normal CI half width
  std::int64_t blowups = 0;     // trials excluded because either path blew up
  std::string error;            // non-empty: row-level failure, values are NaN
};

struct ErrorTableMeta {
  std::string problem;
  std::string scheme;
  double alpha = 0.5;
  double p = 2.0;
  std::int64_t n_ref = 0;
  std::int64_t trials = 0;
  std::uint64_t master_seed = 0;
};

struct RateFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual_rms = 0.0;
  std::vector<std::int64_t> window;    // n values actually fitted
  std::vector<std::int64_t> excluded;  // requested but unusable rows
};

struct ErrorTable {
  ErrorTableMeta meta;
  std::vector<ErrorRow> rows;

  /// Header comments, then "n,trials,mse,ci,blowups" rows in fixed formatting
  /// (byte-identical for identical tables).  The fit, when given, is appended
  /// as comment lines.
  void write_csv(std::ostream& out, const RateFit* fit = nullptr) const;
  /// "log2_n,log2_mse" rows of the usable rows, ready for a slope plot.
  void write_loglog_csv(std::ostream& out) const;
};

/// Coupled strong-error table: per trial one reference path at n_ref and one
/// path per n on grids coarsened from the same fine grid, from the same
/// initial draw.  Rows where the scheme is undefined carry a row error; an
/// undefined reference throws SchemeUndefinedError.  Results are reduced in
/// trial order, so they do not depend on options.workers.
ErrorTable strong_error(const SdeProblem& problem, const SchemeKind& kind,
                        std::vector<std::int64_t> n_list, std::int64_t n_ref,
                        std::int64_t trials, double p, std::uint64_t master_seed,
                        const ExperimentOptions& options = {});

/// Least-squares slope of log2(mse) against log2(n).  An empty window picks
/// the largest three usable n; explicit windows may shrink when they name
/// unusable rows (reported in `excluded`).
RateFit fit_rate(const ErrorTable& table, std::vector<std::int64_t> window = {});

struct MomentRow {
  std::int64_t n = 0;
  double p = 0.0;
  std::int64_t trials_used = 0;
  double estimate = 0.0;  // mean of sup_k |X_k|^p over used trials
  double ci_half_width = 0.0;
  std::int64_t blowups = 0;
};

struct MomentReport {
  std::string problem;
  std::string scheme;
  double alpha = 0.5;
  std::int64_t trials = 0;
  std::uint64_t master_seed = 0;
  std::vector<MomentRow> rows;

  /// "n,p,trials,estimate,ci,blowups" rows.
  void write_csv(std::ostream& out) const;
};

/// Path-supremum moments E[sup_k |X_k|^p] across resolutions; the check that
/// moments stay bounded as n grows.  Every p must be <= problem.moment_order.
MomentReport moment_sweep(const SdeProblem& problem, const SchemeKind& kind,
                          const std::vector<std::int64_t>& n_list,
                          std::int64_t trials, const std::vector<double>& p_list,
                          std::uint64_t master_seed,
                          const ExperimentOptions& options = {});

struct DivergenceRow {
  std::string scheme;
  std::int64_t trials = 0;
  std::int64_t blowups = 0;
  double blowup_fraction = 0.0;
  /// Median |X(T)| with blown-up paths counted at the overflow guard.
  double median_endpoint_norm = 0.0;
};

struct DivergenceReport {
  std::string problem;
  std::int64_t n = 0;
  double x0_norm = 0.0;
  std::vector<DivergenceRow> rows;

  /// "scheme,trials,blowups,blowup_fraction,median_endpoint_norm" rows.
  void write_csv(std::ostream& out) const;
};

/// Same coarse grids, same large x0, vanilla Euler against the monotone
/// polygonal scheme: the side-by-side blowup demonstration.
DivergenceReport divergence_demo(const SdeProblem& problem, std::int64_t n,
                                 const Eigen::VectorXd& x0, std::int64_t trials,
                                 double alpha, std::uint64_t master_seed,
                                 const ExperimentOptions& options = {});

}  // namespace polyeuler
