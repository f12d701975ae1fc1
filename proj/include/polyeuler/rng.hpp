#pragma once

#include <array>
#include <cstdint>

namespace polyeuler {

// Counter-based generator: Philox-4x32 with 10 rounds (Salmon, Moraes, Dror,
// Shaw, "Parallel random numbers: as easy as 1, 2, 3", SC'11).  A block is a
// pure function of (counter, key), so any position in any stream can be
// evaluated without sequential replay.  That is what makes Monte Carlo runs
// reproducible under arbitrary work scheduling.
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Disjoint sub-streams for the different consumers of randomness.  Keeping
/// them apart means e.g. adding verifier draws never shifts Wiener paths.
enum class StreamRole : std::uint32_t {
  kWienerIncrement = 0,
  kInitialCondition = 1,
  kVerifierSampling = 2,
  kDirectionSampling = 3,
};

/// Inverse standard normal CDF.  Throws std::domain_error outside (0, 1).
double normal_quantile(double p);

/// A deterministic stream of i.i.d. draws addressed by
/// (master_seed, trial, role, index).  Copyable, and const access is
/// thread-safe; the sequential next_*() helpers advance a private cursor.
class RandomStream {
 public:
  RandomStream(std::uint64_t master_seed, std::uint32_t trial, StreamRole role);

  /// index-th uniform draw, strictly inside (0, 1).
  double uniform_at(std::uint64_t index) const;

  /// index-th standard normal draw (inverse-CDF of uniform_at(index)).
  double normal_at(std::uint64_t index) const;

  double next_uniform() { return uniform_at(cursor_++); }
  double next_normal() { return normal_at(cursor_++); }

 private:
  std::uint64_t word_at(std::uint64_t index) const;

  std::array<std::uint32_t, 2> key_;
  std::uint32_t trial_;
  std::uint32_t role_;
  std::uint64_t cursor_ = 0;
};

}  // namespace polyeuler
