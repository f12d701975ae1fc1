#include <doctest.h>

#include <cmath>
#include <limits>
#include <stdexcept>

#include "polyeuler/model.hpp"
#include "polyeuler/rng.hpp"

using namespace polyeuler;

namespace {

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

// Sampled points in [-range, range], deterministic.
double sample_point(RandomStream& stream, double range) {
  return range * (2.0 * stream.next_uniform() - 1.0);
}

}  // namespace

TEST_CASE("cubic builtins evaluate the (6.1) drift exactly") {
  const SdeProblem mult = builtin_cubic_multiplicative();
  const SdeProblem cons = builtin_cubic_constant_diffusion();
  CHECK(mult.drift_at(scalar(0.0))[0] == 2.0);
  CHECK(mult.drift_at(scalar(1.0))[0] == doctest::Approx(1.8).epsilon(1e-15));
  CHECK(mult.drift_at(scalar(-2.0))[0] == doctest::Approx(3.0).epsilon(1e-15));
  CHECK(mult.drift_at(scalar(10.0))[0] == doctest::Approx(-99.0).epsilon(1e-15));
  // Same drift in both problems.
  for (const double v : {-7.3, -1.0, 0.5, 4.2}) {
    CHECK(mult.drift_at(scalar(v))[0] == cons.drift_at(scalar(v))[0]);
  }
  CHECK(mult.diffusion_at(scalar(3.0))(0, 0) == 4.0);
  CHECK(cons.diffusion_at(scalar(3.0))(0, 0) == 1.0);
  CHECK(mult.sigma_lipschitz == 1.0);
  CHECK(cons.sigma_lipschitz == 0.0);
  CHECK(mult.monotonicity == 0.1);
  CHECK(mult.moment_order == 10.0);
  CHECK(mult.initial.kind() == InitialLaw::Kind::kScaledStandardNormal);
  CHECK(mult.initial.scale() == 5.0);
  CHECK(cons.constant_diffusion.has_value());
  CHECK(cons.constant_diffusion->diffusion_value(0, 0) == 1.0);
}

TEST_CASE("builtins satisfy the declared monotonicity constant") {
  RandomStream stream(11, 0, StreamRole::kVerifierSampling);
  for (const auto& problem : {builtin_cubic_multiplicative(),
                              builtin_linear_pull(1.0, 3.0, 0.5)}) {
    CAPTURE(problem.name);
    double worst = -1e300;
    for (int i = 0; i < 10000; ++i) {
      const Eigen::VectorXd x = scalar(sample_point(stream, 100.0));
      const Eigen::VectorXd y = scalar(sample_point(stream, 100.0));
      const double gap2 = (x - y).squaredNorm();
      const double defect = (problem.drift_at(x) - problem.drift_at(y)).dot(x - y) +
                            problem.monotonicity * gap2;
      worst = std::max(worst, defect / (1.0 + gap2));
    }
    CHECK(worst <= 1e-9);
  }
}

TEST_CASE("builtins satisfy the declared polynomial growth bound") {
  RandomStream stream(12, 0, StreamRole::kVerifierSampling);
  for (const auto& problem : {builtin_cubic_multiplicative(),
                              builtin_linear_pull(2.0, -1.0, 0.0)}) {
    CAPTURE(problem.name);
    REQUIRE(problem.growth.has_value());
    const auto bound = *problem.growth;
    for (int i = 0; i < 10000; ++i) {
      const Eigen::VectorXd x = scalar(sample_point(stream, 100.0));
      const Eigen::VectorXd y = scalar(sample_point(stream, 100.0));
      const double lhs = (problem.drift_at(x) - problem.drift_at(y)).norm();
      const double rhs = bound.scale *
                         std::pow(1.0 + x.norm() + y.norm(), bound.exponent) *
                         (x - y).norm();
      CHECK(lhs <= rhs * (1.0 + 1e-12));
    }
  }
}

TEST_CASE("monotonicity implies the coercivity consequence") {
  // <b(x) - b(0), x> <= -L |x|^2, rearranged to b(x).x <= b(0).x - L|x|^2.
  RandomStream stream(13, 0, StreamRole::kVerifierSampling);
  const SdeProblem problem = builtin_cubic_multiplicative();
  const Eigen::VectorXd b0 = problem.drift_at(scalar(0.0));
  for (int i = 0; i < 10000; ++i) {
    const Eigen::VectorXd x = scalar(sample_point(stream, 100.0));
    const double lhs = problem.drift_at(x).dot(x);
    const double rhs = b0.dot(x) - problem.monotonicity * x.squaredNorm();
    CHECK(lhs <= rhs + 1e-9 * (1.0 + x.squaredNorm()));
  }
}

TEST_CASE("linear pull drift and parameters") {
  const SdeProblem p = builtin_linear_pull(2.0, 3.0, 0.25, -1.5);
  CHECK(p.drift_at(scalar(3.0))[0] == 0.0);
  CHECK(p.drift_at(scalar(0.0))[0] == 6.0);
  CHECK(p.drift_at(scalar(5.0))[0] == -4.0);
  CHECK(p.diffusion_at(scalar(99.0))(0, 0) == 0.25);
  CHECK(p.monotonicity == 2.0);
  CHECK(p.initial.kind() == InitialLaw::Kind::kPoint);
  CHECK(p.initial.point_value()[0] == -1.5);
  CHECK_THROWS_AS(builtin_linear_pull(0.0, 0.0, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(builtin_linear_pull(1.0, 0.0, -1.0), std::invalid_argument);
}

TEST_CASE("builtin_by_name resolves all names and rejects unknowns") {
  CHECK(builtin_by_name("cubic-mult").name == "cubic-mult");
  CHECK(builtin_by_name("cubic-const").name == "cubic-const");
  CHECK(builtin_by_name("linear-pull").name == "linear-pull");
  CHECK_THROWS_AS(builtin_by_name("heston"), std::invalid_argument);
}

TEST_CASE("validate rejects structurally broken problems") {
  CHECK_NOTHROW(builtin_cubic_multiplicative().validate());
  CHECK_NOTHROW(builtin_cubic_constant_diffusion().validate());
  CHECK_NOTHROW(builtin_linear_pull(1.0, 3.0, 0.5).validate());

  SdeProblem p = builtin_cubic_multiplicative();
  p.monotonicity = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p = builtin_cubic_multiplicative();
  p.drift = nullptr;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p = builtin_cubic_multiplicative();
  p.initial = InitialLaw::scaled_normal(5.0, 2);
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p = builtin_cubic_multiplicative();
  p.horizon = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p = builtin_cubic_multiplicative();
  p.moment_order = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p = builtin_cubic_multiplicative();
  p.drift = [](const Eigen::VectorXd&, Eigen::VectorXd& out) {
    out[0] = std::numeric_limits<double>::quiet_NaN();
  };
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);

  p = builtin_cubic_multiplicative();
  p.growth = GrowthBound{0.0, 2.0};
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
}

TEST_CASE("InitialLaw constructors validate their inputs") {
  CHECK_THROWS_AS(InitialLaw::scaled_normal(1.0, 0), std::invalid_argument);
  CHECK_THROWS_AS(
      InitialLaw::scaled_normal(std::numeric_limits<double>::infinity(), 1),
      std::invalid_argument);
  const InitialLaw law = InitialLaw::point(scalar(4.0));
  CHECK(law.dim() == 1);
  CHECK(law.point_value()[0] == 4.0);
}
