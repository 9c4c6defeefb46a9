// Gaussian blob fixtures for classifier tests.
#pragma once

#include "cefr/ml/classifier.hpp"
#include "cefr/random.hpp"

namespace cefr::testing {

struct Blobs {
  ml::Matrix x;
  ml::Labels y;
};

/// n_per class rows around centres spaced `gap` apart on a diagonal, in d
/// dimensions, with unit-sd noise scaled by `sd`.
inline Blobs make_blobs(int classes, int n_per, int d, double gap, double sd, std::uint64_t seed) {
  Rng rng(seed);
  Blobs b;
  b.x.resize(classes * n_per, d);
  for (int c = 0; c < classes; ++c) {
    for (int i = 0; i < n_per; ++i) {
      const int r = c * n_per + i;
      for (int j = 0; j < d; ++j) b.x(r, j) = gap * c * (j % 2 == 0 ? 1.0 : -0.5) + rng.normal(0.0, sd);
      b.y.push_back(c);
    }
  }
  return b;
}

}  // namespace cefr::testing
