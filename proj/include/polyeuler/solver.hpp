#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>

#include "polyeuler/model.hpp"
#include "polyeuler/paths.hpp"
#include "polyeuler/taming.hpp"

namespace polyeuler {

struct SchemeKind {
  enum class Family { kVanilla, kClassicalTamed, kMonotonePolygonal };

  Family family = Family::kMonotonePolygonal;
  double alpha = 0.5;

  static SchemeKind vanilla();
  static SchemeKind classical_tamed(double alpha = 0.5);
  static SchemeKind monotone_polygonal(double alpha = 0.5);
  /// "vanilla" | "tamed" | "monotone" (the CLI names).
  static SchemeKind from_label(const std::string& label, double alpha = 0.5);
  std::string label() const;
};

/// A scheme bound to (problem, n): the step-size-dependent drift is located
/// once here and then shared across trials.  Thread-safe for concurrent
/// stepping as long as each caller owns its scratch vector.
class ResolvedScheme {
 public:
  static ResolvedScheme resolve(const SdeProblem& problem, const SchemeKind& kind,
                                std::int64_t n, const TamingOptions& options = {});

  void drift_into(const Eigen::VectorXd& x, Eigen::VectorXd& scratch,
                  Eigen::VectorXd& out) const;

  const SchemeKind& kind() const { return kind_; }
  std::int64_t n() const { return n_; }
  /// Present only for the monotone polygonal family.
  const TamedDrift* tamed() const { return tamed_.get(); }

 private:
  SchemeKind kind_;
  std::int64_t n_ = 1;
  double strength_ = 1.0;  // n^alpha, for the classical taming denominator
  DriftFn base_drift_;
  std::shared_ptr<const TamedDrift> tamed_;
};

struct SimulationOutput {
  Eigen::VectorXd endpoint;  // last finite recorded state
  double sup_norm = 0.0;     // max |X_k| over recorded grid points
  bool blowup = false;
  std::int64_t blowup_step = -1;
};

struct SimulateOptions {
  /// States above this norm (or non-finite) set the blowup flag and freeze
  /// the path; generous so genuine divergence is what trips it.
  double overflow_guard = 1e150;
  /// Called with (step index, time, state) for the initial state and every
  /// recorded step; skipped once the guard has tripped.
  std::function<void(std::int64_t, double, const Eigen::VectorXd&)> observer;
};

/// Explicit Euler over the grid: one drift and one diffusion evaluation per
/// step, both at the left point.  Throws std::invalid_argument when grid,
/// problem, and x0 disagree on shape or resolution.
SimulationOutput simulate(const SdeProblem& problem, const ResolvedScheme& scheme,
                          const IncrementGrid& grid, const Eigen::VectorXd& x0,
                          const SimulateOptions& options = {});

SimulationOutput simulate(const SdeProblem& problem, const SchemeKind& kind,
                          std::int64_t n, const IncrementGrid& grid,
                          const Eigen::VectorXd& x0,
                          const SimulateOptions& options = {});

/// Runs the same scheme at resolution n_coarse and at the fine grid's own
/// resolution, the coarse one on coarsen(fine.resolution() / n_coarse), both
/// from the same x0: the coupled pair behind every strong-error row.
std::pair<SimulationOutput, SimulationOutput> simulate_pair(
    const SdeProblem& problem, const SchemeKind& kind, std::int64_t n_coarse,
    const IncrementGrid& fine, const Eigen::VectorXd& x0,
    const SimulateOptions& options = {});

}  // namespace polyeuler
