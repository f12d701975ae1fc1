#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>

#include "polyeuler/model.hpp"

namespace polyeuler {

/// Identifies the stream a grid was drawn from.
struct SeedLabel {
  std::uint64_t master_seed = 0;
  std::uint32_t trial = 0;
};

/// Wiener increments over [0, horizon] at resolution n (step 1/n).  When
/// n * horizon is not an integer the final step is truncated; experiment
/// drivers reject that case, the library itself handles it.
///
/// Column k holds the increment over step k.  Regeneration with the same
/// (master_seed, trial, n) is bit-identical, and coarsening sums blocks of
/// columns in index order, so a coarse grid is an exact function of the fine
/// one: that is the coupling the strong-error tables rely on.
class IncrementGrid {
 public:
  static IncrementGrid generate(std::uint64_t master_seed, std::uint32_t trial,
                                std::int64_t n, double horizon, int noise_dim);

  /// Wraps externally supplied increments (tests, replay).
  static IncrementGrid from_values(std::int64_t n, double horizon,
                                   Eigen::MatrixXd increments, SeedLabel label = {});

  /// Sums each factor consecutive columns; factor must divide n and the
  /// column count, and the grid must have no truncated final step.
  IncrementGrid coarsen(std::int64_t factor) const;

  std::int64_t resolution() const { return n_; }  // steps per unit time
  double horizon() const { return horizon_; }
  int noise_dim() const { return static_cast<int>(increments_.rows()); }
  std::int64_t num_steps() const { return increments_.cols(); }
  /// True when every step has length exactly 1/n.
  bool uniform() const { return !truncated_; }

  double step_size(std::int64_t k) const;
  auto increment(std::int64_t k) const { return increments_.col(k); }
  const Eigen::MatrixXd& increments() const { return increments_; }
  SeedLabel seed_label() const { return label_; }

  /// Little-endian binary dump with a small header; for debugging sessions
  /// where two builds must be fed byte-identical noise.
  void write_binary(std::ostream& out) const;
  static IncrementGrid read_binary(std::istream& in);

 private:
  IncrementGrid() = default;

  Eigen::MatrixXd increments_;  // noise_dim x num_steps
  std::int64_t n_ = 1;
  double horizon_ = 1.0;
  bool truncated_ = false;
  SeedLabel label_;
};

/// Draws the initial condition of `problem` for (master_seed, trial) from the
/// initial-condition stream; deterministic and independent of the grids.
Eigen::VectorXd sample_initial(std::uint64_t master_seed, std::uint32_t trial,
                               const SdeProblem& problem);

}  // namespace polyeuler
