#include "polyeuler/paths.hpp"

#include <cmath>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>

#include "polyeuler/rng.hpp"

namespace polyeuler {

namespace {

constexpr std::uint32_t kGridMagic = 0x50454947u;  // "PEIG"
constexpr std::uint32_t kGridVersion = 1;

// Splits n * horizon into full steps of length 1/n plus an optional shorter
// final step.  Tolerates representation noise around integer n * horizon.
struct StepLayout {
  std::int64_t full_steps = 0;
  double tail = 0.0;  // 0 when n * horizon is an integer
};

StepLayout step_layout(std::int64_t n, double horizon) {
  const double product = static_cast<double>(n) * horizon;
  auto full = static_cast<std::int64_t>(std::floor(product + 1e-9));
  double tail = horizon - static_cast<double>(full) / static_cast<double>(n);
  if (tail <= 1e-12 * horizon) tail = 0.0;
  return {full, tail};
}

template <typename T>
void write_pod(std::ostream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw std::runtime_error("increment grid: truncated stream");
  return value;
}

}  // namespace

IncrementGrid IncrementGrid::generate(std::uint64_t master_seed, std::uint32_t trial,
                                      std::int64_t n, double horizon, int noise_dim) {
  if (n < 1) throw std::invalid_argument("increment grid: n must be >= 1");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) {
    throw std::invalid_argument("increment grid: horizon must be positive");
  }
  if (noise_dim < 1) throw std::invalid_argument("increment grid: noise_dim must be >= 1");

  const auto layout = step_layout(n, horizon);
  const std::int64_t steps = layout.full_steps + (layout.tail > 0.0 ? 1 : 0);
  if (steps < 1) throw std::invalid_argument("increment grid: empty grid");

  IncrementGrid grid;
  grid.n_ = n;
  grid.horizon_ = horizon;
  grid.truncated_ = layout.tail > 0.0;
  grid.label_ = {master_seed, trial};
  grid.increments_.resize(noise_dim, steps);

  const RandomStream stream(master_seed, trial, StreamRole::kWienerIncrement);
  const double root_h = std::sqrt(1.0 / static_cast<double>(n));
  const double root_tail = layout.tail > 0.0 ? std::sqrt(layout.tail) : 0.0;
  for (std::int64_t k = 0; k < steps; ++k) {
    const double scale = k < layout.full_steps ? root_h : root_tail;
    for (int j = 0; j < noise_dim; ++j) {
      grid.increments_(j, k) =
          scale * stream.normal_at(static_cast<std::uint64_t>(k) * noise_dim + j);
    }
  }
  return grid;
}

IncrementGrid IncrementGrid::from_values(std::int64_t n, double horizon,
                                         Eigen::MatrixXd increments, SeedLabel label) {
  if (n < 1) throw std::invalid_argument("increment grid: n must be >= 1");
  if (!(horizon > 0.0)) throw std::invalid_argument("increment grid: horizon must be positive");
  if (increments.cols() < 1 || increments.rows() < 1) {
    throw std::invalid_argument("increment grid: increments must be non-empty");
  }
  const auto layout = step_layout(n, horizon);
  const std::int64_t steps = layout.full_steps + (layout.tail > 0.0 ? 1 : 0);
  if (increments.cols() != steps) {
    throw std::invalid_argument("increment grid: column count does not match n * horizon");
  }
  IncrementGrid grid;
  grid.n_ = n;
  grid.horizon_ = horizon;
  grid.truncated_ = layout.tail > 0.0;
  grid.label_ = label;
  grid.increments_ = std::move(increments);
  return grid;
}

IncrementGrid IncrementGrid::coarsen(std::int64_t factor) const {
  if (factor < 1) throw std::invalid_argument("coarsen: factor must be >= 1");
  if (factor == 1) return *this;
  if (truncated_) throw std::invalid_argument("coarsen: grid has a truncated final step");
  if (n_ % factor != 0) throw std::invalid_argument("coarsen: factor must divide n");
  if (num_steps() % factor != 0) {
    throw std::invalid_argument("coarsen: factor must divide the step count");
  }
  IncrementGrid coarse;
  coarse.n_ = n_ / factor;
  coarse.horizon_ = horizon_;
  coarse.truncated_ = false;
  coarse.label_ = label_;
  const std::int64_t cols = num_steps() / factor;
  coarse.increments_.resize(increments_.rows(), cols);
  // Exact block sums in index order: the coarse path sees the same Wiener
  // path, evaluated on the coarser mesh.
  for (std::int64_t c = 0; c < cols; ++c) {
    coarse.increments_.col(c) = increments_.col(c * factor);
    for (std::int64_t k = 1; k < factor; ++k) {
      coarse.increments_.col(c) += increments_.col(c * factor + k);
    }
  }
  return coarse;
}

double IncrementGrid::step_size(std::int64_t k) const {
  if (k < 0 || k >= num_steps()) throw std::out_of_range("step_size: bad index");
  if (!truncated_ || k + 1 < num_steps()) return 1.0 / static_cast<double>(n_);
  return horizon_ - static_cast<double>(num_steps() - 1) / static_cast<double>(n_);
}

void IncrementGrid::write_binary(std::ostream& out) const {
  write_pod(out, kGridMagic);
  write_pod(out, kGridVersion);
  write_pod(out, n_);
  write_pod(out, horizon_);
  write_pod(out, static_cast<std::int32_t>(increments_.rows()));
  write_pod(out, label_.master_seed);
  write_pod(out, label_.trial);
  write_pod(out, static_cast<std::int64_t>(increments_.cols()));
  for (std::int64_t c = 0; c < increments_.cols(); ++c) {
    for (std::int64_t r = 0; r < increments_.rows(); ++r) {
      write_pod(out, increments_(r, c));
    }
  }
}

IncrementGrid IncrementGrid::read_binary(std::istream& in) {
  if (read_pod<std::uint32_t>(in) != kGridMagic) {
    throw std::runtime_error("increment grid: bad magic");
  }
  if (read_pod<std::uint32_t>(in) != kGridVersion) {
    throw std::runtime_error("increment grid: unsupported version");
  }
  const auto n = read_pod<std::int64_t>(in);
  const auto horizon = read_pod<double>(in);
  const auto rows = read_pod<std::int32_t>(in);
  SeedLabel label;
  label.master_seed = read_pod<std::uint64_t>(in);
  label.trial = read_pod<std::uint32_t>(in);
  const auto cols = read_pod<std::int64_t>(in);
  if (rows < 1 || cols < 1) throw std::runtime_error("increment grid: bad shape");
  Eigen::MatrixXd values(rows, cols);
  for (std::int64_t c = 0; c < cols; ++c) {
    for (std::int64_t r = 0; r < rows; ++r) {
      values(r, c) = read_pod<double>(in);
    }
  }
  return from_values(n, horizon, std::move(values), label);
}

Eigen::VectorXd sample_initial(std::uint64_t master_seed, std::uint32_t trial,
                               const SdeProblem& problem) {
  const auto& law = problem.initial;
  if (law.kind() == InitialLaw::Kind::kPoint) return law.point_value();
  RandomStream stream(master_seed, trial, StreamRole::kInitialCondition);
  Eigen::VectorXd x(law.dim());
  for (int i = 0; i < law.dim(); ++i) x[i] = law.scale() * stream.next_normal();
  return x;
}

}  // namespace polyeuler
