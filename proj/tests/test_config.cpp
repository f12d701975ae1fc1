#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include "polyeuler/config.hpp"
#include "polyeuler/errors.hpp"
#include "polyeuler/model.hpp"

using namespace polyeuler;

namespace {

// A config equivalent of the builtin cubic problem.
const char* kCubicText =
    "# superlinear test problem\n"
    "name = cubic-from-config\n"
    "drift = 2 -0.1 0 -0.1   # constant term first\n"
    "sigma = 1 1\n"
    "monotonicity = 0.1\n"
    "moment_order = 10\n"
    "growth_scale = 0.1\n"
    "growth_exponent = 2\n"
    "initial = normal 5\n";

Eigen::VectorXd scalar(double v) { return Eigen::VectorXd::Constant(1, v); }

}  // namespace

TEST_CASE("config cubic matches the builtin coefficients") {
  const LoadedProblem loaded = parse_problem_config(kCubicText);
  CHECK(loaded.warnings.empty());
  const SdeProblem& p = loaded.problem;
  CHECK(p.name == "cubic-from-config");
  CHECK(p.horizon == 1.0);  // default
  CHECK(p.moment_order == 10.0);
  CHECK(p.sigma_lipschitz == 1.0);  // defaulted to the sigma slope
  REQUIRE(p.growth.has_value());
  CHECK(p.growth->scale == 0.1);
  CHECK(p.growth->exponent == 2.0);
  CHECK(p.initial.kind() == InitialLaw::Kind::kScaledStandardNormal);
  CHECK(p.initial.scale() == 5.0);

  const SdeProblem builtin = builtin_cubic_multiplicative();
  for (const double v : {-21.0, -1.5, 0.0, 0.3, 4.0, 60.0}) {
    const double got = p.drift_at(scalar(v))[0];
    const double want = builtin.drift_at(scalar(v))[0];
    CHECK(got == doctest::Approx(want).epsilon(1e-12));
    CHECK(p.diffusion_at(scalar(v))(0, 0) == builtin.diffusion_at(scalar(v))(0, 0));
  }
}

TEST_CASE("defaults and optional keys") {
  const LoadedProblem loaded = parse_problem_config(
      "drift = 1 -1\n"
      "sigma = 0.5\n"
      "monotonicity = 1\n"
      "initial = point -3.5\n"
      "jacobian_scale = 1\n");
  const SdeProblem& p = loaded.problem;
  CHECK(p.name == "config-problem");
  CHECK(p.moment_order == 2.0);
  CHECK(p.sigma_lipschitz == 0.0);
  CHECK(p.initial.kind() == InitialLaw::Kind::kPoint);
  CHECK(p.initial.point_value()[0] == -3.5);
  CHECK(!p.growth.has_value());
  REQUIRE(p.constant_diffusion.has_value());
  CHECK(p.constant_diffusion->drift_jacobian_lipschitz == 1.0);
  CHECK(p.constant_diffusion->diffusion_value(0, 0) == 0.5);

  const LoadedProblem steep = parse_problem_config(
      "drift = 0 -4\n"
      "sigma = 1 -2\n"
      "monotonicity = 2\n"
      "sigma_lipschitz = 3\n"
      "initial = point 0\n"
      "horizon = 0.5\n");
  CHECK(steep.problem.sigma_lipschitz == 3.0);
  CHECK(steep.problem.horizon == 0.5);
  // Affine sigma without an override keeps |slope|.
  const LoadedProblem bare = parse_problem_config(
      "drift = 0 -4\nsigma = 1 -2\nmonotonicity = 2\ninitial = point 0\n");
  CHECK(bare.problem.sigma_lipschitz == 2.0);
}

TEST_CASE("scalar-only restriction") {
  const std::string tail =
      "drift = 0 -1\nsigma = 1\nmonotonicity = 1\ninitial = point 0\n";
  CHECK_NOTHROW(parse_problem_config("state_dim = 1\nnoise_dim = 1\n" + tail));
  CHECK_THROWS_AS(parse_problem_config("state_dim = 2\n" + tail), ConfigError);
  CHECK_THROWS_AS(parse_problem_config("noise_dim = 3\n" + tail), ConfigError);
}

TEST_CASE("structural errors name the offending line") {
  CHECK_THROWS_WITH_AS(parse_problem_config("no equals sign here\n"),
                       "<string>:1: expected 'key = value'", ConfigError);
  CHECK_THROWS_WITH_AS(parse_problem_config("= 3\n"), "<string>:1: empty key",
                       ConfigError);
  CHECK_THROWS_WITH_AS(parse_problem_config("drift =\n"),
                       "<string>:1: empty value for key 'drift'", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_problem_config("monotonicity = 1\n\nmonotonicity = 2\n"),
      "<string>:3: duplicate key 'monotonicity' (first on line 1)", ConfigError);
  CHECK_THROWS_WITH_AS(parse_problem_config(""),
                       "<string>: missing required key 'monotonicity'", ConfigError);
}

TEST_CASE("value errors name the key and line") {
  const std::string base =
      "drift = 0 -1\nsigma = 1\nmonotonicity = 1\ninitial = point 0\n";
  CHECK_THROWS_WITH_AS(
      parse_problem_config(base + "horizon = fast\n"),
      "<string>:5: key 'horizon': expected one number, got 'fast'", ConfigError);
  CHECK_THROWS_WITH_AS(
      parse_problem_config(base + "horizon = 1 2\n"),
      "<string>:5: key 'horizon': expected one number, got '1 2'", ConfigError);
  CHECK_THROWS_AS(parse_problem_config(base + "horizon = 0\n"), ConfigError);
  CHECK_THROWS_AS(parse_problem_config(base + "moment_order = -1\n"), ConfigError);
  CHECK_THROWS_AS(parse_problem_config(base + "sigma_lipschitz = -1\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_problem_config(
          "drift = 0 -1 oops\nsigma = 1\nmonotonicity = 1\ninitial = point 0\n"),
      ConfigError);
  CHECK_THROWS_AS(
      parse_problem_config(
          "drift = 0 -1\nsigma = 1 2 3\nmonotonicity = 1\ninitial = point 0\n"),
      ConfigError);
  CHECK_THROWS_AS(parse_problem_config(base + "wobble = 3\n"), ConfigError);
  CHECK_THROWS_AS(
      parse_problem_config(
          "drift = 0 -1\nsigma = 1\nmonotonicity = 1e999\ninitial = point 0\n"),
      ConfigError);
}

TEST_CASE("initial grammar") {
  const std::string base = "drift = 0 -1\nsigma = 1\nmonotonicity = 1\n";
  CHECK_NOTHROW(parse_problem_config(base + "initial = normal 2\n"));
  CHECK_THROWS_AS(parse_problem_config(base + "initial = gaussian 2\n"), ConfigError);
  CHECK_THROWS_AS(parse_problem_config(base + "initial = point\n"), ConfigError);
  CHECK_THROWS_AS(parse_problem_config(base + "initial = point 1 2\n"), ConfigError);
}

TEST_CASE("growth bound keys travel as a pair") {
  const std::string base =
      "drift = 0 -1\nsigma = 1\nmonotonicity = 1\ninitial = point 0\n";
  CHECK_THROWS_AS(parse_problem_config(base + "growth_scale = 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_problem_config(base + "growth_exponent = 2\n"), ConfigError);
  CHECK_NOTHROW(
      parse_problem_config(base + "growth_scale = 1\ngrowth_exponent = 2\n"));
  CHECK_THROWS_AS(
      parse_problem_config(base + "growth_scale = 0\ngrowth_exponent = 2\n"),
      ConfigError);
}

TEST_CASE("jacobian_scale needs constant sigma") {
  CHECK_THROWS_AS(
      parse_problem_config("drift = 0 -1\nsigma = 1 1\nmonotonicity = 1\n"
                           "initial = point 0\njacobian_scale = 1\n"),
      ConfigError);
}

TEST_CASE("overstated monotonicity draws a warning, not an error") {
  const LoadedProblem loaded = parse_problem_config(
      "drift = 0 -0.1\n"
      "sigma = 1\n"
      "monotonicity = 1.0\n"  // the drift only decays at rate 0.1
      "initial = point 0\n");
  REQUIRE(loaded.warnings.size() == 1);
  CHECK(loaded.warnings[0].find("spot check") != std::string::npos);
  CHECK(loaded.problem.monotonicity == 1.0);
}

TEST_CASE("file loading uses the stem as the default name") {
  namespace fs = std::filesystem;
  const fs::path path = fs::temp_directory_path() / "steep-well.cfg";
  {
    std::ofstream out(path);
    out << "drift = 0 -2\nsigma = 0.25\nmonotonicity = 2\ninitial = point 1\n";
  }
  const LoadedProblem loaded = load_problem_config(path);
  CHECK(loaded.problem.name == "steep-well");
  CHECK(loaded.problem.drift_at(scalar(3.0))[0] == -6.0);
  std::remove(path.string().c_str());

  CHECK_THROWS_AS(load_problem_config(fs::temp_directory_path() / "no-such-file.cfg"),
                  ConfigError);
}
