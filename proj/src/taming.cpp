#include "polyeuler/taming.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "detail/format.hpp"
#include "polyeuler/errors.hpp"
#include "polyeuler/rng.hpp"

namespace polyeuler {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// Fixed stream for direction scans; the located radius must not depend on
// caller-supplied seeds.
constexpr std::uint64_t kDirectionSeed = 0x706f6c7965756c65ull;

void check_scheme_params(std::int64_t n, double alpha) {
  if (n < 1) throw std::invalid_argument("taming: n must be >= 1");
  if (!(alpha > 0.0) || alpha > 0.5) {
    throw std::invalid_argument("taming: alpha must lie in (0, 1/2]");
  }
}

std::vector<Eigen::VectorXd> scan_directions(int dim, int requested) {
  std::vector<Eigen::VectorXd> dirs;
  if (dim == 1) {
    dirs.push_back(Eigen::VectorXd::Constant(1, 1.0));
    dirs.push_back(Eigen::VectorXd::Constant(1, -1.0));
    return dirs;
  }
  const int count = requested > 0 ? requested : 64 * dim;
  RandomStream stream(kDirectionSeed, 0, StreamRole::kDirectionSampling);
  dirs.reserve(count);
  while (static_cast<int>(dirs.size()) < count) {
    Eigen::VectorXd u(dim);
    for (int i = 0; i < dim; ++i) u[i] = stream.next_normal();
    const double norm = u.norm();
    if (norm > 1e-12) dirs.push_back(u / norm);
  }
  return dirs;
}

}  // namespace

Eigen::VectorXd drift_residual(const SdeProblem& problem, const Eigen::VectorXd& x) {
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(problem.state_dim);
  return problem.drift_at(zero) - problem.monotonicity * x - problem.drift_at(x);
}

double locate_taming_radius(const SdeProblem& problem, std::int64_t n, double alpha,
                            const TamingOptions& options) {
  check_scheme_params(n, alpha);
  if (!(options.search_cap > 0.0)) {
    throw std::invalid_argument("taming: search_cap must be positive");
  }
  const double level = std::pow(static_cast<double>(n), alpha);
  const auto dirs = scan_directions(problem.state_dim, options.directions);

  Eigen::VectorXd x(problem.state_dim), bx(problem.state_dim);
  const Eigen::VectorXd b0 = problem.drift_at(Eigen::VectorXd::Zero(problem.state_dim));
  const double L = problem.monotonicity;
  // Largest residual norm over the scanned directions at radius r.
  const auto peak = [&](double r) {
    double m = 0.0;
    for (const auto& u : dirs) {
      x = r * u;
      problem.drift(x, bx);
      const double norm = (b0 - L * x - bx).norm();
      if (norm > m) m = norm;
    }
    return m;
  };

  if (peak(options.search_cap) < level) return kInf;

  // Bracket the first crossing on a coarse radial grid, then bisect.  The
  // residual vanishes at 0, so a crossing interval always exists.
  const int kIntervals = 4096;
  double lo = 0.0;
  double hi = options.search_cap;
  for (int i = 1; i <= kIntervals; ++i) {
    const double r = options.search_cap * i / kIntervals;
    if (peak(r) >= level) {
      lo = options.search_cap * (i - 1) / kIntervals;
      hi = r;
      break;
    }
  }
  while (hi - lo > options.bisection_tol) {
    const double mid = 0.5 * (lo + hi);
    if (peak(mid) >= level) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  // lo is the lower end of the final bracket: a slight underestimate, which
  // widens the capped band rather than shrinking it.
  if (lo <= 2.0) {
    std::ostringstream msg;
    msg << problem.name << ": taming radius " << lo << " <= 2 at n = " << n
        << ", alpha = " << alpha << "; scheme undefined at this resolution";
    throw SchemeUndefinedError(msg.str());
  }
  return lo;
}

double taper_weight(double norm_x, double radius) {
  if (std::isinf(radius)) return 1.0;
  if (norm_x <= radius - 1.0) return 1.0;
  if (norm_x >= radius) return 0.0;
  return radius - norm_x;
}

double pull_weight(double norm_x, double radius) {
  if (std::isinf(radius)) return 0.0;
  if (norm_x <= radius - 2.0) return 0.0;
  if (norm_x >= radius - 1.0) return 1.0;
  return norm_x - (radius - 2.0);
}

TamedDrift TamedDrift::build(const SdeProblem& problem, std::int64_t n, double alpha,
                             const TamingOptions& options) {
  problem.validate();
  const double radius = locate_taming_radius(problem, n, alpha, options);
  TamedDrift drift = with_radius(problem, n, alpha, radius);
  if (std::isinf(radius)) {
    std::ostringstream msg;
    msg << problem.name << ": residual stays below n^alpha = " << drift.strength_
        << " within search radius " << options.search_cap
        << "; drift passes through untamed";
    drift.notice_ = msg.str();
  }
  return drift;
}

TamedDrift TamedDrift::with_radius(const SdeProblem& problem, std::int64_t n,
                                   double alpha, double radius) {
  check_scheme_params(n, alpha);
  if (!(radius > 2.0)) {
    std::ostringstream msg;
    msg << problem.name << ": taming radius " << radius << " <= 2 at n = " << n
        << ", alpha = " << alpha << "; scheme undefined at this resolution";
    throw SchemeUndefinedError(msg.str());
  }
  TamedDrift drift;
  drift.base_ = problem;
  drift.drift_at_zero_ = problem.drift_at(Eigen::VectorXd::Zero(problem.state_dim));
  drift.radius_ = radius;
  drift.alpha_ = alpha;
  drift.n_ = n;
  drift.strength_ = std::pow(static_cast<double>(n), alpha);
  return drift;
}

bool TamedDrift::untamed() const { return std::isinf(radius_); }

void TamedDrift::eval_into(const Eigen::VectorXd& x, Eigen::VectorXd& scratch,
                           Eigen::VectorXd& out) const {
  const double norm_x = x.norm();
  if (untamed() || norm_x <= radius_ - 2.0) {
    base_.drift(x, out);
    return;
  }
  const double L = base_.monotonicity;
  if (norm_x >= radius_) {
    out = drift_at_zero_ - (L + strength_) * x;
    return;
  }
  base_.drift(x, scratch);
  const double keep = taper_weight(norm_x, radius_);
  const double pull = pull_weight(norm_x, radius_);
  // b0 - L x - keep * f(x) - strength * pull * x, with f folded into b(x).
  out = (1.0 - keep) * (drift_at_zero_ - L * x) + keep * scratch -
        (strength_ * pull) * x;
}

Eigen::VectorXd TamedDrift::eval(const Eigen::VectorXd& x) const {
  Eigen::VectorXd scratch(base_.state_dim), out(base_.state_dim);
  eval_into(x, scratch, out);
  return out;
}

Eigen::VectorXd classical_tamed_drift(const SdeProblem& problem, std::int64_t n,
                                      double alpha, const Eigen::VectorXd& x) {
  check_scheme_params(n, alpha);
  const Eigen::VectorXd b = problem.drift_at(x);
  return b / (1.0 + std::pow(static_cast<double>(n), -alpha) * b.norm());
}

bool VerifierReport::pass() const {
  for (const auto& r : regions) {
    if (!r.pass) return false;
  }
  return true;
}

double VerifierReport::max_violation() const {
  double m = -kInf;
  for (const auto& r : regions) m = std::max(m, r.max_violation);
  return regions.empty() ? 0.0 : m;
}

void VerifierReport::write_csv(std::ostream& out) const {
  out << "region,pairs,max_violation,pass\n";
  for (const auto& r : regions) {
    out << r.region << ',' << r.pairs << ',' << detail::fmt_double(r.max_violation)
        << ',' << (r.pass ? 1 : 0) << '\n';
  }
}

namespace {

struct Stratum {
  std::string name;
  double lo = 0.0;
  double hi = 0.0;
};

std::vector<Stratum> radial_strata(double radius, double outer) {
  if (std::isinf(radius)) return {{"global", 0.0, outer}};
  return {{"inside", 0.0, radius - 2.0},
          {"band-lo", radius - 2.0, radius - 1.0},
          {"band-hi", radius - 1.0, radius},
          {"outside", radius, outer},
          {"cross", 0.0, outer}};
}

class RadialSampler {
 public:
  RadialSampler(int dim, std::uint64_t seed)
      : dim_(dim), stream_(seed, 0, StreamRole::kVerifierSampling) {}

  void sample(double lo, double hi, Eigen::VectorXd& x) {
    if (dim_ == 1) {
      const double sign = stream_.next_uniform() < 0.5 ? -1.0 : 1.0;
      x[0] = sign * (lo + (hi - lo) * stream_.next_uniform());
      return;
    }
    double norm = 0.0;
    do {
      for (int i = 0; i < dim_; ++i) x[i] = stream_.next_normal();
      norm = x.norm();
    } while (norm <= 1e-12);
    x *= (lo + (hi - lo) * stream_.next_uniform()) / norm;
  }

 private:
  int dim_;
  RandomStream stream_;
};

}  // namespace

VerifierReport verify_monotonicity_fn(
    const std::function<void(const Eigen::VectorXd&, Eigen::VectorXd&)>& drift,
    int dim, double monotonicity, double radius, std::int64_t pairs,
    double outer_radius, std::uint64_t seed, double tol) {
  if (pairs < 1) throw std::invalid_argument("verify_monotonicity: pairs must be >= 1");
  const double outer = outer_radius > 0.0
                           ? outer_radius
                           : (std::isinf(radius) ? 100.0 : 2.0 * radius);
  auto strata = radial_strata(radius, outer);
  const auto per = pairs / static_cast<std::int64_t>(strata.size());
  RadialSampler sampler(dim, seed);
  Eigen::VectorXd x(dim), y(dim), bx(dim), by(dim);

  VerifierReport report;
  report.tol = tol;
  for (std::size_t si = 0; si < strata.size(); ++si) {
    const auto& st = strata[si];
    RegionCheck check;
    check.region = st.name;
    check.pairs = (si + 1 == strata.size()) ? pairs - per * (strata.size() - 1) : per;
    check.max_violation = -kInf;
    for (std::int64_t i = 0; i < check.pairs; ++i) {
      sampler.sample(st.lo, st.hi, x);
      sampler.sample(st.lo, st.hi, y);
      drift(x, bx);
      drift(y, by);
      const double gap2 = (x - y).squaredNorm();
      const double defect = (bx - by).dot(x - y) + monotonicity * gap2;
      check.max_violation = std::max(check.max_violation, defect / (1.0 + gap2));
    }
    check.pass = check.max_violation <= tol;
    report.regions.push_back(std::move(check));
  }
  return report;
}

VerifierReport verify_monotonicity(const TamedDrift& drift, std::int64_t pairs,
                                   double outer_radius, std::uint64_t seed,
                                   double tol) {
  const int dim = drift.base().state_dim;
  Eigen::VectorXd scratch(dim);
  auto eval = [&drift, &scratch](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    drift.eval_into(x, scratch, out);
  };
  return verify_monotonicity_fn(eval, dim, drift.base().monotonicity, drift.radius(),
                                pairs, outer_radius, seed, tol);
}

VerifierReport verify_growth(const TamedDrift& drift, std::int64_t points,
                             double outer_radius, std::uint64_t seed, double tol) {
  if (points < 1) throw std::invalid_argument("verify_growth: points must be >= 1");
  const int dim = drift.base().state_dim;
  const double outer = outer_radius > 0.0
                           ? outer_radius
                           : (drift.untamed() ? 100.0 : 10.0 * drift.radius());
  const double level = drift.strength();
  const double origin_norm = drift.base().drift_at(Eigen::VectorXd::Zero(dim)).norm();
  // (L+1) n^alpha (1+|x|) holds as is when |b(0)| <= n^alpha; otherwise only
  // with the origin term carried along.
  const bool relaxed = origin_norm > level;
  const double allowed = relaxed ? 1.0 + origin_norm / level : 1.0;
  const double scale = (drift.base().monotonicity + 1.0) * level;

  RadialSampler sampler(dim, seed);
  Eigen::VectorXd x(dim), scratch(dim), bn(dim);
  RegionCheck check;
  check.region = relaxed ? "growth-relaxed-origin" : "growth";
  check.pairs = points;
  check.max_violation = -kInf;
  for (std::int64_t i = 0; i < points; ++i) {
    if (i == 0) {
      x.setZero();  // pin the origin itself
    } else {
      sampler.sample(0.0, outer, x);
    }
    drift.eval_into(x, scratch, bn);
    const double ratio = bn.norm() / (scale * (1.0 + x.norm()));
    check.max_violation = std::max(check.max_violation, ratio - allowed);
  }
  check.pass = check.max_violation <= tol;

  VerifierReport report;
  report.tol = tol;
  report.regions.push_back(std::move(check));
  return report;
}

RadiusScalingReport taming_radius_scaling(const SdeProblem& problem, double alpha,
                                          const std::vector<std::int64_t>& n_list,
                                          const TamingOptions& options) {
  if (!problem.growth) {
    throw std::invalid_argument(problem.name +
                                ": radius scaling needs a declared growth bound");
  }
  RadiusScalingReport report;
  report.alpha = alpha;
  report.min_ratio = kInf;
  report.pass = true;
  const double exponent = alpha / (problem.growth->exponent + 1.0);
  for (const auto n : n_list) {
    RadiusScalingRow row;
    row.n = n;
    try {
      row.radius = locate_taming_radius(problem, n, alpha, options);
      if (std::isinf(row.radius)) {
        row.ratio = 0.0;  // untamed: nothing to scale
      } else {
        row.ratio = (row.radius - 2.0) * std::pow(static_cast<double>(n), -exponent);
        report.min_ratio = std::min(report.min_ratio, row.ratio);
      }
    } catch (const SchemeUndefinedError&) {
      row.defined = false;
      row.radius = std::numeric_limits<double>::quiet_NaN();
      row.ratio = 0.0;
      report.pass = false;
    }
    report.rows.push_back(row);
  }
  if (report.min_ratio <= 0.0 && !std::isinf(report.min_ratio)) report.pass = false;
  return report;
}

void RadiusScalingReport::write_csv(std::ostream& out) const {
  out << "n,radius,ratio,defined\n";
  for (const auto& row : rows) {
    out << row.n << ',' << detail::fmt_double(row.radius) << ','
        << detail::fmt_double(row.ratio) << ',' << (row.defined ? 1 : 0) << '\n';
  }
}

}  // namespace polyeuler
