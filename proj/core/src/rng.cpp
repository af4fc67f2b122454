// Apache License, Version 2.0, refer to LICENSE.txt

#include "epinfer/rng.hpp"

#include <random>

namespace epinfer {

std::int64_t binomial_draw(std::int64_t n, double p, Xoshiro256pp &engine) {
  if (n <= 0) return 0;
  if (p >= 1.0) return n;
  if (p <= 0.0) return 0;
  std::binomial_distribution<std::int64_t> dist(n, p);
  return dist(engine);
}

}  // namespace epinfer
