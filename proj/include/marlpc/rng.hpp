#pragma once

#include <cstdint>
#include <random>

namespace marlpc {

// Named sub-streams: each stochastic concern draws from its own seeded stream so
// concerns can be re-seeded or replayed independently of one another.
enum class Stream : std::uint64_t {
  Placement = 1,
  Mobility = 2,
  ShadowingInit = 3,
  ShadowingStep = 4,
  FadingInit = 5,
  FadingStep = 6,
  Exploration = 7,
  Replay = 8,
  WeightInit = 9,
  BaselineRandom = 10,
  Instance = 11,
};

// Deterministic uniform/normal source on top of mt19937_64. Box-Muller is done
// inline without caching the second variate, so a stream's output is a pure
// function of (seed, stream id, salt, call sequence). The draw counter counts
// raw engine invocations and supports stream-accounting checks.
class RngStream {
 public:
  RngStream(std::uint64_t master_seed, Stream id, std::uint64_t salt = 0);

  double uniform();  // [0, 1)
  double uniform(double lo, double hi);
  double normal();   // N(0, 1), consumes exactly two engine draws
  std::uint64_t integer(std::uint64_t bound);  // unbiased in [0, bound)

  std::uint64_t draws() const { return draws_; }
  std::mt19937_64& engine() { return engine_; }

 private:
  std::uint64_t next();

  std::mt19937_64 engine_;
  std::uint64_t draws_ = 0;
};

}  // namespace marlpc
