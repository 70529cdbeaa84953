#pragma once

#include <cstdint>
#include <random>
#include <string_view>

#include "popctl/simplex.h"

namespace popctl {

// Child seed for the stream named `label`. Streams with different labels are
// independent of each other, so adding a consumer never shifts another.
std::uint64_t derive_seed(std::uint64_t master, std::string_view label);

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}
  Rng(std::uint64_t master, std::string_view label)
      : engine_(derive_seed(master, label)) {}

  // Uniform on [0, 1) from the top 53 bits; identical on every platform.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }
  bool bernoulli(double p) { return uniform() < p; }
  // Uniform entries in [0, 1), normalized to sum 1.
  Vec normalized_uniform(int d);
  std::uint64_t bits() { return engine_(); }

 private:
  std::mt19937_64 engine_;
};

}  // namespace popctl
