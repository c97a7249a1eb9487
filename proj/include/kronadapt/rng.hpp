#ifndef KRONADAPT_RNG_HPP
#define KRONADAPT_RNG_HPP

#include <cstdint>
#include <random>

#include "kronadapt/types.hpp"

namespace kronadapt {

// Deterministic random source. Same seed, same call sequence, same build ->
// bit-identical streams. All sampling in the library goes through this.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::mt19937_64& engine() { return engine_; }

  double gaussian(double mean = 0.0, double std = 1.0) {
    std::normal_distribution<double> dist(mean, std);
    return dist(engine_);
  }

  double uniform(double lo, double hi) {
    std::uniform_real_distribution<double> dist(lo, hi);
    return dist(engine_);
  }

 private:
  std::mt19937_64 engine_;
};

// rows x cols matrix with i.i.d. N(0, std^2) entries, filled column by column.
Matrix sample_gaussian(Rng& rng, Index rows, Index cols, double std = 1.0);

// rows x cols matrix with i.i.d. U(-bound, bound) entries.
Matrix sample_uniform(Rng& rng, Index rows, Index cols, double bound);

}  // namespace kronadapt

#endif
