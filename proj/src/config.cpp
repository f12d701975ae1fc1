#include "polyeuler/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "polyeuler/errors.hpp"
#include "polyeuler/rng.hpp"

namespace polyeuler {

namespace {

constexpr std::uint64_t kSpotCheckSeed = 0x636f6e666967ull;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r");
  return s.substr(begin, end - begin + 1);
}

struct Entry {
  std::string value;
  int line = 0;
  bool used = false;
};

class KeyValues {
 public:
  KeyValues(const std::string& text, const std::string& origin) : origin_(origin) {
    std::istringstream in(text);
    std::string raw;
    int line_no = 0;
    while (std::getline(in, raw)) {
      ++line_no;
      const auto hash = raw.find('#');
      if (hash != std::string::npos) raw.erase(hash);
      const std::string line = trim(raw);
      if (line.empty()) continue;
      const auto eq = line.find('=');
      if (eq == std::string::npos) {
        fail(line_no, "expected 'key = value'");
      }
      const std::string key = trim(line.substr(0, eq));
      const std::string value = trim(line.substr(eq + 1));
      if (key.empty()) fail(line_no, "empty key");
      if (value.empty()) fail(line_no, "empty value for key '" + key + "'");
      if (entries_.count(key)) {
        fail(line_no, "duplicate key '" + key + "' (first on line " +
                          std::to_string(entries_[key].line) + ")");
      }
      entries_[key] = Entry{value, line_no, false};
    }
  }

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(origin_ + ":" + std::to_string(line) + ": " + msg);
  }

  const Entry* find(const std::string& key) {
    const auto it = entries_.find(key);
    if (it == entries_.end()) return nullptr;
    it->second.used = true;
    return &it->second;
  }

  const Entry& require(const std::string& key) {
    const Entry* entry = find(key);
    if (!entry) {
      throw ConfigError(origin_ + ": missing required key '" + key + "'");
    }
    return *entry;
  }

  double number(const std::string& key, const Entry& entry) const {
    std::istringstream in(entry.value);
    double v = 0.0;
    std::string rest;
    if (!(in >> v) || (in >> rest)) {
      fail(entry.line, "key '" + key + "': expected one number, got '" +
                           entry.value + "'");
    }
    if (!std::isfinite(v)) fail(entry.line, "key '" + key + "': not finite");
    return v;
  }

  std::vector<double> numbers(const std::string& key, const Entry& entry) const {
    std::istringstream in(entry.value);
    std::vector<double> out;
    double v = 0.0;
    while (in >> v) {
      if (!std::isfinite(v)) fail(entry.line, "key '" + key + "': not finite");
      out.push_back(v);
    }
    if (!in.eof() || out.empty()) {
      fail(entry.line, "key '" + key + "': expected numbers, got '" +
                           entry.value + "'");
    }
    return out;
  }

  void reject_unknown() const {
    for (const auto& [key, entry] : entries_) {
      if (!entry.used) fail(entry.line, "unknown key '" + key + "'");
    }
  }

 private:
  std::string origin_;
  std::map<std::string, Entry> entries_;
};

LoadedProblem parse_impl(const std::string& text, const std::string& origin,
                         const std::string& default_name) {
  KeyValues kv(text, origin);
  SdeProblem problem;
  problem.state_dim = 1;
  problem.noise_dim = 1;

  // Only scalar problems come from config files; builtins are the way to get
  // anything else.
  for (const char* key : {"state_dim", "noise_dim"}) {
    if (const Entry* entry = kv.find(key)) {
      if (kv.number(key, *entry) != 1.0) {
        kv.fail(entry->line, std::string("key '") + key +
                                 "': config problems are scalar (use builtins "
                                 "for higher dimensions)");
      }
    }
  }

  if (const Entry* entry = kv.find("name")) {
    problem.name = entry->value;
  } else {
    problem.name = default_name;
  }

  if (const Entry* entry = kv.find("horizon")) {
    problem.horizon = kv.number("horizon", *entry);
    if (!(problem.horizon > 0.0)) kv.fail(entry->line, "horizon must be positive");
  }

  {
    const Entry& entry = kv.require("monotonicity");
    problem.monotonicity = kv.number("monotonicity", entry);
    if (!(problem.monotonicity > 0.0)) {
      kv.fail(entry.line, "monotonicity must be positive");
    }
  }

  if (const Entry* entry = kv.find("moment_order")) {
    problem.moment_order = kv.number("moment_order", *entry);
    if (!(problem.moment_order > 0.0)) {
      kv.fail(entry->line, "moment_order must be positive");
    }
  }

  const Entry& drift_entry = kv.require("drift");
  const std::vector<double> coeffs = kv.numbers("drift", drift_entry);
  problem.drift = [coeffs](const Eigen::VectorXd& x, Eigen::VectorXd& out) {
    const double v = x[0];
    double acc = 0.0;
    for (auto it = coeffs.rbegin(); it != coeffs.rend(); ++it) acc = acc * v + *it;
    out[0] = acc;
  };

  const Entry& sigma_entry = kv.require("sigma");
  const std::vector<double> sigma = kv.numbers("sigma", sigma_entry);
  if (sigma.size() > 2) {
    kv.fail(sigma_entry.line, "sigma takes one (constant) or two (affine) numbers");
  }
  const double sigma_intercept = sigma[0];
  const double sigma_slope = sigma.size() == 2 ? sigma[1] : 0.0;
  problem.diffusion = [sigma_intercept, sigma_slope](const Eigen::VectorXd& x,
                                                     Eigen::MatrixXd& out) {
    out(0, 0) = sigma_intercept + sigma_slope * x[0];
  };
  problem.sigma_lipschitz = std::abs(sigma_slope);
  if (const Entry* entry = kv.find("sigma_lipschitz")) {
    problem.sigma_lipschitz = kv.number("sigma_lipschitz", *entry);
    if (problem.sigma_lipschitz < 0.0) {
      kv.fail(entry->line, "sigma_lipschitz must be >= 0");
    }
  }

  {
    const Entry& entry = kv.require("initial");
    std::istringstream in(entry.value);
    std::string kind;
    double value = 0.0;
    std::string rest;
    if (!(in >> kind >> value) || (in >> rest) || !std::isfinite(value)) {
      kv.fail(entry.line, "initial must be 'point <value>' or 'normal <scale>'");
    }
    if (kind == "point") {
      problem.initial = InitialLaw::point(Eigen::VectorXd::Constant(1, value));
    } else if (kind == "normal") {
      problem.initial = InitialLaw::scaled_normal(value, 1);
    } else {
      kv.fail(entry.line, "initial must be 'point <value>' or 'normal <scale>'");
    }
  }

  const Entry* growth_scale = kv.find("growth_scale");
  const Entry* growth_exponent = kv.find("growth_exponent");
  if (static_cast<bool>(growth_scale) != static_cast<bool>(growth_exponent)) {
    throw ConfigError(origin +
                      ": growth_scale and growth_exponent must be given together");
  }
  if (growth_scale) {
    GrowthBound bound;
    bound.scale = kv.number("growth_scale", *growth_scale);
    bound.exponent = kv.number("growth_exponent", *growth_exponent);
    if (!(bound.scale > 0.0) || bound.exponent < 0.0) {
      kv.fail(growth_scale->line,
              "growth bound needs scale > 0 and exponent >= 0");
    }
    problem.growth = bound;
  }

  if (const Entry* entry = kv.find("jacobian_scale")) {
    if (sigma_slope != 0.0) {
      kv.fail(entry->line, "jacobian_scale applies only with constant sigma");
    }
    ConstantDiffusionData data;
    data.drift_jacobian_lipschitz = kv.number("jacobian_scale", *entry);
    data.diffusion_value = Eigen::MatrixXd::Constant(1, 1, sigma_intercept);
    problem.constant_diffusion = data;
  }

  kv.reject_unknown();

  try {
    problem.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(origin + ": " + err.what());
  }

  LoadedProblem loaded;
  loaded.problem = std::move(problem);

  // Spot check of the declared monotonicity constant; a failure is reported,
  // not fatal, since sampled pairs cannot prove the declaration either way.
  {
    const auto& p = loaded.problem;
    RandomStream stream(kSpotCheckSeed, 0, StreamRole::kVerifierSampling);
    Eigen::VectorXd x(1), y(1), bx(1), by(1);
    for (int i = 0; i < 1000; ++i) {
      x[0] = 100.0 * (2.0 * stream.next_uniform() - 1.0);
      y[0] = 100.0 * (2.0 * stream.next_uniform() - 1.0);
      p.drift(x, bx);
      p.drift(y, by);
      const double gap2 = (x - y).squaredNorm();
      const double defect = (bx - by).dot(x - y) + p.monotonicity * gap2;
      if (defect / (1.0 + gap2) > 1e-9) {
        std::ostringstream msg;
        msg << "declared monotonicity " << p.monotonicity
            << " fails a spot check: defect " << defect << " at x = " << x[0]
            << ", y = " << y[0];
        loaded.warnings.push_back(msg.str());
        break;
      }
    }
  }
  return loaded;
}

}  // namespace

LoadedProblem parse_problem_config(const std::string& text,
                                   const std::string& origin) {
  return parse_impl(text, origin, "config-problem");
}

LoadedProblem load_problem_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  std::ostringstream buffer;
  buffer << in.rdbuf();
  const std::string stem = path.stem().string();
  return parse_impl(buffer.str(), path.string(),
                    stem.empty() ? "config-problem" : stem);
}

}  // namespace polyeuler
