#include "marlpc/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>

namespace marlpc {

RngStream::RngStream(std::uint64_t master_seed, Stream id, std::uint64_t salt) {
  // seed_seq keeps only 32-bit words, so split the inputs explicitly.
  std::seed_seq seq{
      static_cast<std::uint32_t>(master_seed & 0xffffffffu),
      static_cast<std::uint32_t>(master_seed >> 32),
      static_cast<std::uint32_t>(static_cast<std::uint64_t>(id)),
      static_cast<std::uint32_t>(salt & 0xffffffffu),
      static_cast<std::uint32_t>(salt >> 32),
  };
  engine_.seed(seq);
}

std::uint64_t RngStream::next() {
  ++draws_;
  return engine_();
}

double RngStream::uniform() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

double RngStream::uniform(double lo, double hi) {
  return lo + (hi - lo) * uniform();
}

double RngStream::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1], keeps log finite
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t RngStream::integer(std::uint64_t bound) {
  const std::uint64_t max = std::numeric_limits<std::uint64_t>::max();
  const std::uint64_t limit = max - max % bound;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % bound;
}

}  // namespace marlpc
