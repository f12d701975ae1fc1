#include "polyeuler/rng.hpp"

#include <boost/math/special_functions/erf.hpp>
#include <cmath>
#include <stdexcept>

namespace polyeuler {

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;  // golden ratio
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;  // sqrt(3) - 1

inline void round_once(std::array<std::uint32_t, 4>& x,
                       const std::array<std::uint32_t, 2>& k) {
  const std::uint64_t p0 = static_cast<std::uint64_t>(kMul0) * x[0];
  const std::uint64_t p1 = static_cast<std::uint64_t>(kMul1) * x[2];
  const std::uint32_t hi0 = static_cast<std::uint32_t>(p0 >> 32);
  const std::uint32_t lo0 = static_cast<std::uint32_t>(p0);
  const std::uint32_t hi1 = static_cast<std::uint32_t>(p1 >> 32);
  const std::uint32_t lo1 = static_cast<std::uint32_t>(p1);
  x = {hi1 ^ x[1] ^ k[0], lo1, hi0 ^ x[3] ^ k[1], lo0};
}

}  // namespace

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) {
  for (int round = 0; round < 10; ++round) {
    round_once(counter, key);
    key[0] += kWeyl0;
    key[1] += kWeyl1;
  }
  return counter;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw std::domain_error("normal_quantile: p must lie in (0, 1)");
  }
  // Phi(x) = erfc(-x / sqrt(2)) / 2.
  return -std::sqrt(2.0) * boost::math::erfc_inv(2.0 * p);
}

RandomStream::RandomStream(std::uint64_t master_seed, std::uint32_t trial,
                           StreamRole role)
    : key_{static_cast<std::uint32_t>(master_seed),
           static_cast<std::uint32_t>(master_seed >> 32)},
      trial_(trial),
      role_(static_cast<std::uint32_t>(role)) {}

std::uint64_t RandomStream::word_at(std::uint64_t index) const {
  const std::uint64_t block = index >> 1;
  const std::array<std::uint32_t, 4> counter = {
      static_cast<std::uint32_t>(block), static_cast<std::uint32_t>(block >> 32),
      trial_, role_};
  const auto out = philox4x32(counter, key_);
  if ((index & 1u) == 0) {
    return static_cast<std::uint64_t>(out[0]) | (static_cast<std::uint64_t>(out[1]) << 32);
  }
  return static_cast<std::uint64_t>(out[2]) | (static_cast<std::uint64_t>(out[3]) << 32);
}

double RandomStream::uniform_at(std::uint64_t index) const {
  // Top 53 bits, centered on the dyadic midpoints: strictly inside (0, 1),
  // so the normal quantile below is always finite.
  const std::uint64_t w = word_at(index);
  return static_cast<double>(w >> 11) * 0x1.0p-53 + 0x1.0p-54;
}

double RandomStream::normal_at(std::uint64_t index) const {
  return normal_quantile(uniform_at(index));
}

}  // namespace polyeuler
