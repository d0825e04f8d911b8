#pragma once

#include <cstdint>
#include <vector>

namespace dpp {

/// Counter-based generator ("sm64ctr-v1"): the t-th draw depends only on
/// (seed, t), so state streams are reproducible and replications can be
/// evaluated in any order. Core mixer is splitmix64.
struct CounterRng {
  std::uint64_t seed = 0;

  static std::uint64_t mix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
    return x ^ (x >> 31);
  }

  std::uint64_t at(std::uint64_t counter) const {
    return mix(mix(seed) ^ mix(counter + 0xA0761D6478BD642Full));
  }

  /// Uniform double in [0,1) from draw index `counter`.
  double uniform(std::uint64_t counter) const {
    return static_cast<double>(at(counter) >> 11) * 0x1.0p-53;
  }
};

/// Samples state indices i.i.d. from fixed probabilities by inverting the
/// cumulative distribution at u(seed, t).
class StateSampler {
 public:
  StateSampler(std::vector<double> probs, std::uint64_t seed) : cum_(std::move(probs)), rng_{seed} {
    double acc = 0.0;
    for (double& c : cum_) {
      acc += c;
      c = acc;
    }
    if (!cum_.empty()) cum_.back() = 1.0;
  }

  int sample(std::uint64_t t) const {
    const double u = rng_.uniform(t);
    for (std::size_t k = 0; k < cum_.size(); ++k) {
      if (u < cum_[k]) return static_cast<int>(k);
    }
    return static_cast<int>(cum_.size()) - 1;
  }

 private:
  std::vector<double> cum_;
  CounterRng rng_;
};

}  // namespace dpp
