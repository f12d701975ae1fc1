#include "polyeuler/model.hpp"

#include <cmath>
#include <stdexcept>

namespace polyeuler {

InitialLaw InitialLaw::point(Eigen::VectorXd value) {
  InitialLaw law;
  law.kind_ = Kind::kPoint;
  law.dim_ = static_cast<int>(value.size());
  law.point_value_ = std::move(value);
  return law;
}

InitialLaw InitialLaw::scaled_normal(double scale, int dim) {
  if (dim < 1) throw std::invalid_argument("InitialLaw: dim must be >= 1");
  if (!std::isfinite(scale)) throw std::invalid_argument("InitialLaw: scale must be finite");
  InitialLaw law;
  law.kind_ = Kind::kScaledStandardNormal;
  law.scale_ = scale;
  law.dim_ = dim;
  return law;
}

int InitialLaw::dim() const { return dim_; }

void SdeProblem::validate() const {
  if (state_dim < 1) throw std::invalid_argument(name + ": state_dim must be >= 1");
  if (noise_dim < 1) throw std::invalid_argument(name + ": noise_dim must be >= 1");
  if (!drift) throw std::invalid_argument(name + ": drift is not set");
  if (!diffusion) throw std::invalid_argument(name + ": diffusion is not set");
  if (!(monotonicity > 0.0) || !std::isfinite(monotonicity)) {
    throw std::invalid_argument(name + ": monotonicity constant must be positive");
  }
  if (sigma_lipschitz < 0.0 || !std::isfinite(sigma_lipschitz)) {
    throw std::invalid_argument(name + ": sigma_lipschitz must be >= 0");
  }
  if (!(moment_order > 0.0)) throw std::invalid_argument(name + ": moment_order must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument(name + ": horizon must be positive");
  }
  if (growth) {
    if (!(growth->scale > 0.0) || growth->exponent < 0.0) {
      throw std::invalid_argument(name + ": growth bound must have scale > 0, exponent >= 0");
    }
  }
  if (initial.dim() != state_dim) {
    throw std::invalid_argument(name + ": initial law dimension != state_dim");
  }
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(state_dim);
  if (!drift_at(zero).allFinite()) throw std::invalid_argument(name + ": drift(0) not finite");
  const Eigen::MatrixXd s0 = diffusion_at(zero);
  if (s0.rows() != state_dim || s0.cols() != noise_dim) {
    throw std::invalid_argument(name + ": diffusion(0) has wrong shape");
  }
  if (!s0.allFinite()) throw std::invalid_argument(name + ": diffusion(0) not finite");
}

Eigen::VectorXd SdeProblem::drift_at(const Eigen::VectorXd& x) const {
  Eigen::VectorXd out(state_dim);
  drift(x, out);
  return out;
}

Eigen::MatrixXd SdeProblem::diffusion_at(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd out(state_dim, noise_dim);
  diffusion(x, out);
  return out;
}

namespace {

SdeProblem cubic_base() {
  SdeProblem p;
  p.state_dim = 1;
  p.noise_dim = 1;
  p.drift = [](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    const double v = x[0];
    out[0] = 2.0 - 0.1 * v - 0.1 * v * v * v;
  };
  p.monotonicity = 0.1;
  // |b(x)-b(y)| = |x-y| (1 + x^2 + xy + y^2) / 10 and the quadratic form is
  // nonnegative, so scale 0.1 with exponent 2 is exact (attained at 0).
  p.growth = GrowthBound{0.1, 2.0};
  p.initial = InitialLaw::scaled_normal(5.0, 1);
  p.moment_order = 10.0;
  p.horizon = 1.0;
  return p;
}

}  // namespace

SdeProblem builtin_cubic_multiplicative() {
  SdeProblem p = cubic_base();
  p.name = "cubic-mult";
  p.diffusion = [](const Eigen::VectorXd& x, Eigen::MatrixXd& out) {
    out(0, 0) = 1.0 + x[0];
  };
  p.sigma_lipschitz = 1.0;
  return p;
}

SdeProblem builtin_cubic_constant_diffusion() {
  SdeProblem p = cubic_base();
  p.name = "cubic-const";
  p.diffusion = [](const Eigen::VectorXd&, Eigen::MatrixXd& out) { out(0, 0) = 1.0; };
  p.sigma_lipschitz = 0.0;
  // Drift Jacobian is -(1 + 3x^2)/10, Lipschitz with constant 3/10 in the
  // (1 + |x| + |y|) normalization.
  p.constant_diffusion = ConstantDiffusionData{0.3, Eigen::MatrixXd::Ones(1, 1)};
  return p;
}

SdeProblem builtin_linear_pull(double rate, double mean, double vol, double x0) {
  if (!(rate > 0.0)) throw std::invalid_argument("linear-pull: rate must be positive");
  if (vol < 0.0) throw std::invalid_argument("linear-pull: vol must be >= 0");
  SdeProblem p;
  p.name = "linear-pull";
  p.state_dim = 1;
  p.noise_dim = 1;
  p.drift = [rate, mean](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    out[0] = rate * (mean - x[0]);
  };
  p.diffusion = [vol](const Eigen::VectorXd&, Eigen::MatrixXd& out) { out(0, 0) = vol; };
  p.monotonicity = rate;
  p.sigma_lipschitz = 0.0;
  p.growth = GrowthBound{rate, 0.0};
  p.constant_diffusion =
      ConstantDiffusionData{1.0, Eigen::MatrixXd::Constant(1, 1, vol)};
  p.initial = InitialLaw::point(Eigen::VectorXd::Constant(1, x0));
  p.moment_order = 16.0;
  p.horizon = 1.0;
  return p;
}

SdeProblem builtin_by_name(const std::string& name) {
  if (name == "cubic-mult") return builtin_cubic_multiplicative();
  if (name == "cubic-const") return builtin_cubic_constant_diffusion();
  if (name == "linear-pull") return builtin_linear_pull(1.0, 3.0, 0.5, 1.0);
  throw std::invalid_argument("unknown builtin problem: " + name +
                              " (expected cubic-mult, cubic-const, or linear-pull)");
}

}  // namespace polyeuler
