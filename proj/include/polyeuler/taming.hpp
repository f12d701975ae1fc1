#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "polyeuler/model.hpp"

namespace polyeuler {

/// Superlinear residual of the drift:  f(x) = b(0) - L x - b(x).
/// Subtracting it from the linear envelope b(0) - L x recovers b, so capping
/// f is what the step-size-dependent drift below is about.
Eigen::VectorXd drift_residual(const SdeProblem& problem, const Eigen::VectorXd& x);

struct TamingOptions {
  /// Radial search bound for the activation radius.  Exceeding it without
  /// reaching the cap level yields the untamed variant plus a notice.
  double search_cap = 1e6;
  /// Directions scanned per radius; 0 picks 2 for dim 1, else 64 * dim.
  int directions = 0;
  double bisection_tol = 1e-6;
};

/// Smallest radius at which the residual norm reaches n^alpha, located by a
/// radial scan over |f| maxima followed by bisection.  The returned value is
/// the lower end of the final bracket, so it never overestimates; coming in
/// slightly low only widens the capped band, which is the safe side.
/// Returns +infinity when the level is not reached within search_cap.
/// Throws SchemeUndefinedError when the radius is <= 2.
double locate_taming_radius(const SdeProblem& problem, std::int64_t n, double alpha,
                            const TamingOptions& options = {});

/// Piecewise-linear cutoff: 1 on [0, radius - 1], linear down to 0 at radius.
double taper_weight(double norm_x, double radius);

/// Piecewise-linear onset: 0 on [0, radius - 2], linear up to 1 at radius - 1.
double pull_weight(double norm_x, double radius);

/// The step-size-dependent drift
///   b_n(x) = b(0) - L x - taper * f(x) - n^alpha * pull * x,
/// which agrees with b inside |x| <= radius - 2, caps the residual across the
/// blend bands, and is linear outside.  Immutable once built; eval_into is
/// safe to call concurrently as long as each caller owns its scratch vector.
class TamedDrift {
 public:
  /// Locates the activation radius and builds the evaluator.
  static TamedDrift build(const SdeProblem& problem, std::int64_t n, double alpha,
                          const TamingOptions& options = {});

  /// Bypasses the search; radius must be > 2 (or +infinity).
  static TamedDrift with_radius(const SdeProblem& problem, std::int64_t n,
                                double alpha, double radius);

  /// Activation radius; +infinity means the drift is passed through untamed.
  double radius() const { return radius_; }
  bool untamed() const;
  std::int64_t n() const { return n_; }
  double alpha() const { return alpha_; }
  /// Cap level n^alpha.
  double strength() const { return strength_; }
  /// Non-empty when the radial search bailed at search_cap.
  const std::string& notice() const { return notice_; }
  const SdeProblem& base() const { return base_; }

  /// Writes b_n(x) into out.  scratch holds one base-drift evaluation; both
  /// must be preallocated to state_dim.
  void eval_into(const Eigen::VectorXd& x, Eigen::VectorXd& scratch,
                 Eigen::VectorXd& out) const;

  Eigen::VectorXd eval(const Eigen::VectorXd& x) const;

 private:
  TamedDrift() = default;

  SdeProblem base_;
  Eigen::VectorXd drift_at_zero_;
  double radius_ = 0.0;
  double strength_ = 1.0;
  double alpha_ = 0.5;
  std::int64_t n_ = 1;
  std::string notice_;
};

/// The usual normalization-style taming, b(x) / (1 + n^-alpha |b(x)|), kept
/// as a comparison point: bounded by n^alpha but not monotone.
Eigen::VectorXd classical_tamed_drift(const SdeProblem& problem, std::int64_t n,
                                      double alpha, const Eigen::VectorXd& x);

/// One sampled region of a verifier run.  max_violation is normalized by
/// (1 + |x - y|^2) for monotonicity rows and is the excess over the allowed
/// ratio for growth rows, so pass means max_violation <= tol in both cases.
struct RegionCheck {
  std::string region;
  std::int64_t pairs = 0;
  double max_violation = 0.0;
  bool pass = true;
};

struct VerifierReport {
  std::vector<RegionCheck> regions;
  double tol = 0.0;

  bool pass() const;
  double max_violation() const;
  /// CSV rows: region,pairs,max_violation,pass
  void write_csv(std::ostream& out) const;
};

/// Samples pairs stratified over the radial regions that the cutoff weights
/// carve out (inside, both blend bands, outside, plus unrestricted pairs) and
/// checks <b_n(x) - b_n(y), x - y> <= -L |x - y|^2 up to tol * (1 + |x-y|^2).
/// outer_radius bounds the outermost samples; pass 0 for 2 * radius.
VerifierReport verify_monotonicity(const TamedDrift& drift, std::int64_t pairs,
                                   double outer_radius, std::uint64_t seed,
                                   double tol = 1e-9);

/// Same check for an arbitrary drift function (negative controls in tests).
/// regions degenerate to one "global" stratum when radius is +infinity.
VerifierReport verify_monotonicity_fn(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& drift,
    int dim, double monotonicity, double radius, std::int64_t pairs,
    double outer_radius, std::uint64_t seed, double tol = 1e-9);

/// Checks |b_n(x)| <= (L + 1) * n^alpha * (1 + |x|) over |x| <= outer_radius.
/// When |b(0)| > n^alpha the allowed ratio is relaxed to 1 + |b(0)| / n^alpha
/// and the report says so in its region label.
VerifierReport verify_growth(const TamedDrift& drift, std::int64_t points,
                             double outer_radius, std::uint64_t seed,
                             double tol = 1e-9);

/// How the activation radius scales along a list of n.  ratio is
/// (radius - 2) * n^(-alpha / (exponent + 1)); bounded away from 0 is what
/// keeps the scheme defined for all large n.
struct RadiusScalingRow {
  std::int64_t n = 0;
  double radius = 0.0;  // +infinity for untamed
  double ratio = 0.0;   // 0 for untamed rows
  bool defined = true;  // false: radius <= 2 at this n
};

struct RadiusScalingReport {
  double alpha = 0.5;
  std::vector<RadiusScalingRow> rows;
  /// Smallest ratio among defined, tamed rows; +infinity if there are none.
  double min_ratio = 0.0;
  /// All rows defined and min_ratio > 0.
  bool pass = false;

  void write_csv(std::ostream& out) const;
};

/// Requires problem.growth (the exponent sets the expected scaling).
RadiusScalingReport taming_radius_scaling(const SdeProblem& problem, double alpha,
                                          const std::vector<std::int64_t>& n_list,
                                          const TamingOptions& options = {});

}  // namespace polyeuler
