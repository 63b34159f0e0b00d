#pragma once

#include "edmc/matrix_ops.hpp"

#include <cstdint>

namespace edmc {

/// Partially observed squared-distance matrix D_obs together with its
/// sampling set E. values is zero outside E.
struct ObservedDistances {
  SampleSet e;
  SymmetricMatrix values;
  double sampling_ratio = 1.0;
  double noise_sigma = 0.0;
  // Embedding dimension and seed recorded in the observation file header.
  Index k = 0;
  std::uint64_t seed = 0;

  Index n() const { return e.n(); }

  /// Builds D_obs from a full matrix by masking it with e.
  static ObservedDistances from_full(const SymmetricMatrix& d, SampleSet e, Index k = 0);
};

}  // namespace edmc
