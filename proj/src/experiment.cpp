#include "polyeuler/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <mutex>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "detail/format.hpp"
#include "polyeuler/errors.hpp"
#include "polyeuler/paths.hpp"
#include "polyeuler/rng.hpp"

namespace polyeuler {

namespace {

constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

double z95() {
  static const double z = normal_quantile(0.975);
  return z;
}

/// Runs body(0..trials-1), possibly across workers.  Each trial writes only
/// its own output slot, and all reductions happen afterwards in trial order,
/// so results cannot depend on the worker count or on scheduling.
void run_trials(std::int64_t trials, int workers,
                const std::function<void(std::int64_t)>& body) {
  if (workers <= 1 || trials <= 1) {
    for (std::int64_t t = 0; t < trials; ++t) body(t);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::atomic<bool> failed{false};
  std::exception_ptr first_error;
  std::mutex error_mutex;
  auto worker = [&] {
    for (;;) {
      const std::int64_t t = next.fetch_add(1);
      if (t >= trials || failed.load()) return;
      try {
        body(t);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
        failed.store(true);
        return;
      }
    }
  };
  const auto count = static_cast<int>(std::min<std::int64_t>(workers, trials));
  std::vector<std::thread> pool;
  pool.reserve(count);
  for (int i = 0; i < count; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  if (first_error) std::rethrow_exception(first_error);
}

void check_integer_resolution(std::int64_t n, double horizon) {
  const double product = static_cast<double>(n) * horizon;
  if (std::abs(product - std::round(product)) > 1e-9 * std::max(1.0, product)) {
    std::ostringstream msg;
    msg << "experiment grids need integer n * horizon; got n = " << n
        << ", horizon = " << horizon;
    throw ConfigError(msg.str());
  }
}

std::vector<std::int64_t> sorted_unique(std::vector<std::int64_t> ns,
                                        const char* what) {
  if (ns.empty()) throw ConfigError(std::string(what) + ": empty n list");
  std::sort(ns.begin(), ns.end());
  if (std::adjacent_find(ns.begin(), ns.end()) != ns.end()) {
    throw ConfigError(std::string(what) + ": duplicate n values");
  }
  if (ns.front() < 1) throw ConfigError(std::string(what) + ": n must be >= 1");
  return ns;
}

struct MeanCi {
  std::int64_t used = 0;
  double mean = kNan;
  double ci = kNan;
};

/// Two-pass mean and 95% CI half width over the finite slots, in index order.
MeanCi reduce(const std::vector<double>& values, const std::vector<char>& skip) {
  MeanCi out;
  double sum = 0.0;
  out.used = 0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (skip[i]) continue;
    sum += values[i];
    ++out.used;
  }
  if (out.used == 0) return out;
  out.mean = sum / static_cast<double>(out.used);
  if (out.used < 2) return out;
  double ss = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (skip[i]) continue;
    const double d = values[i] - out.mean;
    ss += d * d;
  }
  const double var = ss / static_cast<double>(out.used - 1);
  out.ci = z95() * std::sqrt(var / static_cast<double>(out.used));
  return out;
}

}  // namespace

ErrorTable strong_error(const SdeProblem& problem, const SchemeKind& kind,
                        std::vector<std::int64_t> n_list, std::int64_t n_ref,
                        std::int64_t trials, double p, std::uint64_t master_seed,
                        const ExperimentOptions& options) {
  problem.validate();
  if (trials < 2) throw ConfigError("strong_error: trials must be >= 2");
  if (!(p > 0.0) || !std::isfinite(p)) throw ConfigError("strong_error: p must be positive");
  auto ns = sorted_unique(std::move(n_list), "strong_error");
  if (n_ref < ns.back()) throw ConfigError("strong_error: n_ref must be >= every n");
  check_integer_resolution(n_ref, problem.horizon);
  for (const auto n : ns) {
    check_integer_resolution(n, problem.horizon);
    if (n_ref % n != 0) {
      std::ostringstream msg;
      msg << "strong_error: n_ref = " << n_ref << " is not a multiple of n = " << n;
      throw ConfigError(msg.str());
    }
  }

  // An undefined reference invalidates the whole table, so this throws.
  const auto ref_scheme = ResolvedScheme::resolve(problem, kind, n_ref, options.taming);

  std::vector<ResolvedScheme> schemes;
  std::vector<std::int64_t> usable;
  std::vector<std::string> row_errors(ns.size());
  for (std::size_t i = 0; i < ns.size(); ++i) {
    try {
      schemes.push_back(ResolvedScheme::resolve(problem, kind, ns[i], options.taming));
      usable.push_back(static_cast<std::int64_t>(i));
    } catch (const SchemeUndefinedError&) {
      row_errors[i] = "scheme-undefined";
    }
  }

  const auto u = usable.size();
  std::vector<std::vector<double>> gaps(u, std::vector<double>(trials, kNan));
  std::vector<std::vector<char>> blown(u, std::vector<char>(trials, 0));

  SimulateOptions sim_options;
  sim_options.overflow_guard = options.overflow_guard;
  run_trials(trials, options.workers, [&](std::int64_t trial) {
    const auto t32 = static_cast<std::uint32_t>(trial);
    const Eigen::VectorXd x0 = sample_initial(master_seed, t32, problem);
    const IncrementGrid fine = IncrementGrid::generate(master_seed, t32, n_ref,
                                                       problem.horizon,
                                                       problem.noise_dim);
    const SimulationOutput ref = simulate(problem, ref_scheme, fine, x0, sim_options);
    for (std::size_t j = 0; j < u; ++j) {
      const auto idx = static_cast<std::size_t>(usable[j]);
      const IncrementGrid coarse = fine.coarsen(n_ref / ns[idx]);
      const SimulationOutput out =
          simulate(problem, schemes[j], coarse, x0, sim_options);
      if (ref.blowup || out.blowup) {
        blown[j][trial] = 1;
      } else {
        gaps[j][trial] = std::pow((ref.endpoint - out.endpoint).norm(), p);
      }
    }
  });

  ErrorTable table;
  table.meta = {problem.name, kind.label(), kind.alpha, p,
                n_ref,        trials,       master_seed};
  std::size_t j = 0;
  for (std::size_t i = 0; i < ns.size(); ++i) {
    ErrorRow row;
    row.n = ns[i];
    if (!row_errors[i].empty()) {
      row.error = row_errors[i];
      row.error_moment = kNan;
      row.ci_half_width = kNan;
      table.rows.push_back(std::move(row));
      continue;
    }
    const auto stats = reduce(gaps[j], blown[j]);
    row.trials_used = stats.used;
    row.error_moment = stats.mean;
    row.ci_half_width = stats.ci;
    row.blowups = static_cast<std::int64_t>(
        std::count(blown[j].begin(), blown[j].end(), 1));
    table.rows.push_back(std::move(row));
    ++j;
  }
  return table;
}

RateFit fit_rate(const ErrorTable& table, std::vector<std::int64_t> window) {
  std::vector<std::pair<double, double>> points;  // (log2 n, log2 mse)
  RateFit fit;

  auto usable = [](const ErrorRow& row) {
    return row.error.empty() && std::isfinite(row.error_moment) &&
           row.error_moment > 0.0 && row.trials_used > 0;
  };

  if (window.empty()) {
    for (const auto& row : table.rows) {
      if (usable(row)) window.push_back(row.n);
    }
    if (window.size() > 3) window.erase(window.begin(), window.end() - 3);
  }

  std::sort(window.begin(), window.end());
  window.erase(std::unique(window.begin(), window.end()), window.end());
  for (const auto n : window) {
    const auto it = std::find_if(table.rows.begin(), table.rows.end(),
                                 [n](const ErrorRow& r) { return r.n == n; });
    if (it == table.rows.end()) {
      throw std::invalid_argument("fit_rate: window names n = " + std::to_string(n) +
                                  " which is not in the table");
    }
    if (!usable(*it)) {
      fit.excluded.push_back(n);
      continue;
    }
    fit.window.push_back(n);
    points.emplace_back(std::log2(static_cast<double>(n)),
                        std::log2(it->error_moment));
  }
  if (points.size() < 2) {
    throw std::invalid_argument("fit_rate: need at least two usable rows");
  }

  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : points) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(points.size());
  my /= static_cast<double>(points.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : points) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double rss = 0.0;
  for (const auto& [x, y] : points) {
    const double r = y - (fit.intercept + fit.slope * x);
    rss += r * r;
  }
  fit.residual_rms = std::sqrt(rss / static_cast<double>(points.size()));
  return fit;
}

namespace {

void write_joined(std::ostream& out, const std::vector<std::int64_t>& ns) {
  for (std::size_t i = 0; i < ns.size(); ++i) {
    if (i) out << '|';
    out << ns[i];
  }
}

}  // namespace

void ErrorTable::write_csv(std::ostream& out, const RateFit* fit) const {
  out << "# strong error table\n";
  out << "# problem=" << meta.problem << " scheme=" << meta.scheme
      << " alpha=" << detail::fmt_double(meta.alpha)
      << " p=" << detail::fmt_double(meta.p) << " n_ref=" << meta.n_ref
      << " trials=" << meta.trials << " seed=" << meta.master_seed << "\n";
  out << "# generator=philox4x32-10 inverse-cdf\n";
  out << "n,trials,mse,ci,blowups\n";
  for (const auto& row : rows) {
    out << row.n << ',' << row.trials_used << ','
        << detail::fmt_double(row.error_moment) << ','
        << detail::fmt_double(row.ci_half_width) << ',' << row.blowups << '\n';
  }
  for (const auto& row : rows) {
    if (!row.error.empty()) {
      out << "# row-error n=" << row.n << ": " << row.error << '\n';
    }
  }
  if (fit) {
    out << "# rate-fit slope=" << detail::fmt_double(fit->slope)
        << " intercept=" << detail::fmt_double(fit->intercept)
        << " residual_rms=" << detail::fmt_double(fit->residual_rms) << " window=";
    write_joined(out, fit->window);
    out << " excluded=";
    write_joined(out, fit->excluded);
    out << '\n';
  }
}

void ErrorTable::write_loglog_csv(std::ostream& out) const {
  out << "log2_n,log2_mse\n";
  for (const auto& row : rows) {
    if (!row.error.empty() || !(row.error_moment > 0.0) ||
        !std::isfinite(row.error_moment)) {
      continue;
    }
    out << detail::fmt_double(std::log2(static_cast<double>(row.n))) << ','
        << detail::fmt_double(std::log2(row.error_moment)) << '\n';
  }
}

MomentReport moment_sweep(const SdeProblem& problem, const SchemeKind& kind,
                          const std::vector<std::int64_t>& n_list,
                          std::int64_t trials, const std::vector<double>& p_list,
                          std::uint64_t master_seed,
                          const ExperimentOptions& options) {
  problem.validate();
  if (trials < 2) throw ConfigError("moment_sweep: trials must be >= 2");
  if (p_list.empty()) throw ConfigError("moment_sweep: empty p list");
  for (const double p : p_list) {
    if (!(p > 0.0) || !std::isfinite(p)) {
      throw ConfigError("moment_sweep: p must be positive");
    }
    if (p > problem.moment_order) {
      std::ostringstream msg;
      msg << "moment_sweep: p = " << p << " exceeds the declared moment order "
          << problem.moment_order << " of " << problem.name;
      throw ConfigError(msg.str());
    }
  }
  auto ns = sorted_unique(n_list, "moment_sweep");
  for (const auto n : ns) check_integer_resolution(n, problem.horizon);

  std::vector<ResolvedScheme> schemes;
  schemes.reserve(ns.size());
  for (const auto n : ns) {
    schemes.push_back(ResolvedScheme::resolve(problem, kind, n, options.taming));
  }

  std::vector<std::vector<double>> sups(ns.size(), std::vector<double>(trials, kNan));
  std::vector<std::vector<char>> blown(ns.size(), std::vector<char>(trials, 0));

  SimulateOptions sim_options;
  sim_options.overflow_guard = options.overflow_guard;
  run_trials(trials, options.workers, [&](std::int64_t trial) {
    const auto t32 = static_cast<std::uint32_t>(trial);
    const Eigen::VectorXd x0 = sample_initial(master_seed, t32, problem);
    for (std::size_t j = 0; j < ns.size(); ++j) {
      const IncrementGrid grid = IncrementGrid::generate(
          master_seed, t32, ns[j], problem.horizon, problem.noise_dim);
      const SimulationOutput out = simulate(problem, schemes[j], grid, x0, sim_options);
      if (out.blowup) {
        blown[j][trial] = 1;
      } else {
        sups[j][trial] = out.sup_norm;
      }
    }
  });

  MomentReport report;
  report.problem = problem.name;
  report.scheme = kind.label();
  report.alpha = kind.alpha;
  report.trials = trials;
  report.master_seed = master_seed;
  std::vector<double> powered(trials);
  for (std::size_t j = 0; j < ns.size(); ++j) {
    for (const double p : p_list) {
      for (std::int64_t t = 0; t < trials; ++t) {
        powered[t] = blown[j][t] ? kNan : std::pow(sups[j][t], p);
      }
      const auto stats = reduce(powered, blown[j]);
      MomentRow row;
      row.n = ns[j];
      row.p = p;
      row.trials_used = stats.used;
      row.estimate = stats.mean;
      row.ci_half_width = stats.ci;
      row.blowups = static_cast<std::int64_t>(
          std::count(blown[j].begin(), blown[j].end(), 1));
      report.rows.push_back(row);
    }
  }
  return report;
}

void MomentReport::write_csv(std::ostream& out) const {
  out << "# path-supremum moments\n";
  out << "# problem=" << problem << " scheme=" << scheme
      << " alpha=" << detail::fmt_double(alpha) << " trials=" << trials
      << " seed=" << master_seed << "\n";
  out << "n,p,trials,estimate,ci,blowups\n";
  for (const auto& row : rows) {
    out << row.n << ',' << detail::fmt_double(row.p) << ',' << row.trials_used << ','
        << detail::fmt_double(row.estimate) << ','
        << detail::fmt_double(row.ci_half_width) << ',' << row.blowups << '\n';
  }
}

DivergenceReport divergence_demo(const SdeProblem& problem, std::int64_t n,
                                 const Eigen::VectorXd& x0, std::int64_t trials,
                                 double alpha, std::uint64_t master_seed,
                                 const ExperimentOptions& options) {
  problem.validate();
  if (trials < 1) throw ConfigError("divergence_demo: trials must be >= 1");
  if (n < 1) throw ConfigError("divergence_demo: n must be >= 1");
  check_integer_resolution(n, problem.horizon);
  if (x0.size() != problem.state_dim || !x0.allFinite()) {
    throw ConfigError("divergence_demo: x0 must be finite with the problem dimension");
  }

  const SchemeKind kinds[2] = {SchemeKind::vanilla(),
                               SchemeKind::monotone_polygonal(alpha)};
  ResolvedScheme schemes[2] = {
      ResolvedScheme::resolve(problem, kinds[0], n, options.taming),
      ResolvedScheme::resolve(problem, kinds[1], n, options.taming)};

  std::vector<std::vector<double>> norms(2, std::vector<double>(trials, 0.0));
  std::vector<std::vector<char>> blown(2, std::vector<char>(trials, 0));

  SimulateOptions sim_options;
  sim_options.overflow_guard = options.overflow_guard;
  run_trials(trials, options.workers, [&](std::int64_t trial) {
    const auto t32 = static_cast<std::uint32_t>(trial);
    const IncrementGrid grid = IncrementGrid::generate(master_seed, t32, n,
                                                       problem.horizon,
                                                       problem.noise_dim);
    for (int s = 0; s < 2; ++s) {
      const SimulationOutput out = simulate(problem, schemes[s], grid, x0, sim_options);
      blown[s][trial] = out.blowup ? 1 : 0;
      // Blown paths count at the guard: they dominate any finite median.
      norms[s][trial] = out.blowup ? options.overflow_guard : out.endpoint.norm();
    }
  });

  DivergenceReport report;
  report.problem = problem.name;
  report.n = n;
  report.x0_norm = x0.norm();
  for (int s = 0; s < 2; ++s) {
    DivergenceRow row;
    row.scheme = kinds[s].label();
    row.trials = trials;
    row.blowups = static_cast<std::int64_t>(
        std::count(blown[s].begin(), blown[s].end(), 1));
    row.blowup_fraction =
        static_cast<double>(row.blowups) / static_cast<double>(trials);
    std::vector<double> sorted = norms[s];
    std::sort(sorted.begin(), sorted.end());
    const std::size_t mid = sorted.size() / 2;
    row.median_endpoint_norm = (sorted.size() % 2 == 1)
                                   ? sorted[mid]
                                   : 0.5 * (sorted[mid - 1] + sorted[mid]);
    report.rows.push_back(std::move(row));
  }
  return report;
}

void DivergenceReport::write_csv(std::ostream& out) const {
  out << "# divergence demo\n";
  out << "# problem=" << problem << " n=" << n
      << " x0_norm=" << detail::fmt_double(x0_norm) << "\n";
  out << "scheme,trials,blowups,blowup_fraction,median_endpoint_norm\n";
  for (const auto& row : rows) {
    out << row.scheme << ',' << row.trials << ',' << row.blowups << ','
        << detail::fmt_double(row.blowup_fraction) << ','
        << detail::fmt_double(row.median_endpoint_norm) << '\n';
  }
}

}  // namespace polyeuler
