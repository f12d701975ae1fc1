#include "polyeuler/solver.hpp"

#include <cmath>
#include <stdexcept>

#include "polyeuler/errors.hpp"

namespace polyeuler {

SchemeKind SchemeKind::vanilla() { return {Family::kVanilla, 0.5}; }

SchemeKind SchemeKind::classical_tamed(double alpha) {
  return {Family::kClassicalTamed, alpha};
}

SchemeKind SchemeKind::monotone_polygonal(double alpha) {
  return {Family::kMonotonePolygonal, alpha};
}

SchemeKind SchemeKind::from_label(const std::string& label, double alpha) {
  if (label == "vanilla") return vanilla();
  if (label == "tamed") return classical_tamed(alpha);
  if (label == "monotone") return monotone_polygonal(alpha);
  throw std::invalid_argument("unknown scheme: " + label +
                              " (expected vanilla, tamed, or monotone)");
}

std::string SchemeKind::label() const {
  switch (family) {
    case Family::kVanilla:
      return "vanilla";
    case Family::kClassicalTamed:
      return "tamed";
    case Family::kMonotonePolygonal:
      return "monotone";
  }
  return "unknown";
}

ResolvedScheme ResolvedScheme::resolve(const SdeProblem& problem,
                                       const SchemeKind& kind, std::int64_t n,
                                       const TamingOptions& options) {
  if (n < 1) throw std::invalid_argument("resolve: n must be >= 1");
  if (!(kind.alpha > 0.0) || kind.alpha > 0.5) {
    throw std::invalid_argument("resolve: alpha must lie in (0, 1/2]");
  }
  ResolvedScheme scheme;
  scheme.kind_ = kind;
  scheme.n_ = n;
  scheme.strength_ = std::pow(static_cast<double>(n), kind.alpha);
  scheme.base_drift_ = problem.drift;
  if (kind.family == SchemeKind::Family::kMonotonePolygonal) {
    scheme.tamed_ = std::make_shared<const TamedDrift>(
        TamedDrift::build(problem, n, kind.alpha, options));
  }
  return scheme;
}

void ResolvedScheme::drift_into(const Eigen::VectorXd& x, Eigen::VectorXd& scratch,
                                Eigen::VectorXd& out) const {
  switch (kind_.family) {
    case SchemeKind::Family::kVanilla:
      base_drift_(x, out);
      return;
    case SchemeKind::Family::kClassicalTamed:
      base_drift_(x, out);
      out /= 1.0 + out.norm() / strength_;
      return;
    case SchemeKind::Family::kMonotonePolygonal:
      tamed_->eval_into(x, scratch, out);
      return;
  }
}

namespace {

void check_shapes(const SdeProblem& problem, const ResolvedScheme& scheme,
                  const IncrementGrid& grid, const Eigen::VectorXd& x0) {
  if (grid.resolution() != scheme.n()) {
    throw std::invalid_argument("simulate: grid resolution != scheme resolution");
  }
  if (grid.noise_dim() != problem.noise_dim) {
    throw std::invalid_argument("simulate: grid noise_dim != problem noise_dim");
  }
  if (x0.size() != problem.state_dim) {
    throw std::invalid_argument("simulate: x0 dimension != state_dim");
  }
  if (!x0.allFinite()) {
    throw std::invalid_argument("simulate: x0 must be finite");
  }
  const double rel = std::abs(grid.horizon() - problem.horizon) /
                     std::max(1.0, problem.horizon);
  if (rel > 1e-12) {
    throw std::invalid_argument("simulate: grid horizon != problem horizon");
  }
}

}  // namespace

SimulationOutput simulate(const SdeProblem& problem, const ResolvedScheme& scheme,
                          const IncrementGrid& grid, const Eigen::VectorXd& x0,
                          const SimulateOptions& options) {
  check_shapes(problem, scheme, grid, x0);
  if (!(options.overflow_guard > 0.0)) {
    throw std::invalid_argument("simulate: overflow_guard must be positive");
  }

  const int d = problem.state_dim;
  Eigen::VectorXd x = x0;
  Eigen::VectorXd next(d), drift_val(d), scratch(d);
  Eigen::MatrixXd sigma_val(d, problem.noise_dim);

  SimulationOutput out;
  out.sup_norm = x.norm();
  double t = 0.0;
  if (options.observer) options.observer(0, t, x);

  if (x.norm() > options.overflow_guard) {
    out.blowup = true;
    out.blowup_step = 0;
    out.endpoint = x;
    return out;
  }

  const std::int64_t steps = grid.num_steps();
  for (std::int64_t k = 0; k < steps; ++k) {
    const double h = grid.step_size(k);
    scheme.drift_into(x, scratch, drift_val);
    problem.diffusion(x, sigma_val);
    next = x + h * drift_val + sigma_val * grid.increment(k);
    t += h;
    if (!next.allFinite()) {
      // Freeze at the last finite state; nothing non-finite is recorded.
      out.blowup = true;
      out.blowup_step = k + 1;
      break;
    }
    x = next;
    out.sup_norm = std::max(out.sup_norm, x.norm());
    if (options.observer) options.observer(k + 1, t, x);
    if (x.norm() > options.overflow_guard) {
      out.blowup = true;
      out.blowup_step = k + 1;
      break;
    }
  }
  out.endpoint = x;
  return out;
}

SimulationOutput simulate(const SdeProblem& problem, const SchemeKind& kind,
                          std::int64_t n, const IncrementGrid& grid,
                          const Eigen::VectorXd& x0, const SimulateOptions& options) {
  return simulate(problem, ResolvedScheme::resolve(problem, kind, n), grid, x0,
                  options);
}

std::pair<SimulationOutput, SimulationOutput> simulate_pair(
    const SdeProblem& problem, const SchemeKind& kind, std::int64_t n_coarse,
    const IncrementGrid& fine, const Eigen::VectorXd& x0,
    const SimulateOptions& options) {
  if (n_coarse < 1 || fine.resolution() % n_coarse != 0) {
    throw std::invalid_argument("simulate_pair: n_coarse must divide the fine resolution");
  }
  const IncrementGrid coarse = fine.coarsen(fine.resolution() / n_coarse);
  auto coarse_out = simulate(problem, ResolvedScheme::resolve(problem, kind, n_coarse),
                             coarse, x0, options);
  auto fine_out = simulate(
      problem, ResolvedScheme::resolve(problem, kind, fine.resolution()), fine, x0,
      options);
  return {std::move(coarse_out), std::move(fine_out)};
}

}  // namespace polyeuler
