#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>

namespace polyeuler {

/// Drift evaluator: writes b(x) into `out` (preallocated, size state_dim).
using DriftFn = std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>;

/// Diffusion evaluator: writes sigma(x) into `out` (state_dim x noise_dim).
using DiffusionFn = std::function<void(const Eigen::VectorXd&, Eigen::MatrixXd&)>;

/// Polynomial local Lipschitz bound on the drift:
///   |b(x) - b(y)| <= scale * (1 + |x| + |y|)^exponent * |x - y|.
struct GrowthBound {
  double scale = 0.0;
  double exponent = 0.0;
};

/// Extra data carried by problems with constant diffusion and a Lipschitz
/// drift Jacobian; only used for documentation and verifier reporting.
struct ConstantDiffusionData {
  double drift_jacobian_lipschitz = 0.0;
  Eigen::MatrixXd diffusion_value;
};

/// Law of the initial condition.
class InitialLaw {
 public:
  enum class Kind { kPoint, kScaledStandardNormal };

  static InitialLaw point(Eigen::VectorXd value);
  /// scale * Z with Z a standard normal vector of dimension dim.
  static InitialLaw scaled_normal(double scale, int dim);

  Kind kind() const { return kind_; }
  const Eigen::VectorXd& point_value() const { return point_value_; }
  double scale() const { return scale_; }
  int dim() const;

 private:
  Kind kind_ = Kind::kPoint;
  Eigen::VectorXd point_value_;
  double scale_ = 0.0;
  int dim_ = 0;
};

/// An SDE dX = b(X) dt + sigma(X) dW with one-sided Lipschitz ("monotone")
/// drift:  <b(x) - b(y), x - y> <= -L |x - y|^2  with L > 0.
struct SdeProblem {
  std::string name;
  int state_dim = 1;
  int noise_dim = 1;
  DriftFn drift;
  DiffusionFn diffusion;
  /// Strong monotonicity constant L (decay rate of the drift).
  double monotonicity = 0.0;
  /// Lipschitz constant of sigma; 0 for constant diffusion.
  double sigma_lipschitz = 0.0;
  std::optional<GrowthBound> growth;
  std::optional<ConstantDiffusionData> constant_diffusion;
  InitialLaw initial = InitialLaw::point(Eigen::VectorXd::Zero(1));
  /// Largest moment order the initial condition is assumed to carry.
  double moment_order = 2.0;
  double horizon = 1.0;

  /// Throws std::invalid_argument when structurally unusable.
  void validate() const;

  // Allocating conveniences for tests and one-off evaluation.
  Eigen::VectorXd drift_at(const Eigen::VectorXd& x) const;
  Eigen::MatrixXd diffusion_at(const Eigen::VectorXd& x) const;
};

/// dX = (2 - X/10 - X^3/10) dt + (1 + X) dW, X(0) = 5 * N(0,1).
SdeProblem builtin_cubic_multiplicative();

/// Same drift with sigma == 1, X(0) = 5 * N(0,1).
SdeProblem builtin_cubic_constant_diffusion();

/// Linear pull toward `mean`: dX = rate * (mean - X) dt + vol dW, X(0) = x0.
/// vol = 0 gives the deterministic benchmark with a closed-form solution.
SdeProblem builtin_linear_pull(double rate, double mean, double vol, double x0 = 1.0);

/// Lookup by name: "cubic-mult", "cubic-const", "linear-pull".
/// Throws std::invalid_argument for unknown names.
SdeProblem builtin_by_name(const std::string& name);

}  // namespace polyeuler
