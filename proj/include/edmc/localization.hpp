#pragma once

#include "edmc/manifold.hpp"

#include <optional>
#include <vector>

namespace edmc {

enum class Frame { Arbitrary, Aligned };

struct LocationMap {
  Matrix coords;  // n x k, one node per row
  Frame frame = Frame::Arbitrary;

  Index n() const { return coords.rows(); }
  Index k() const { return coords.cols(); }
};

struct AlignmentResult {
  Matrix rotation;     // k x k orthogonal, reflections allowed
  Vector translation;  // length k
  double rmse_position = 0.0;
};

/// X = Q diag(sqrt(lambda)), so X X^T equals the Gram matrix of y.
LocationMap extract_coordinates(const ManifoldPoint& y);

/// Orthogonal Procrustes with translation: finds R (orthogonal) and t
/// minimizing sum_i || R^T x_i + t - ref_i ||^2 and returns the transformed
/// map. Throws DegenerateReference when the centered reference has rank < k.
std::pair<LocationMap, AlignmentResult> align(const LocationMap& est, const LocationMap& ref);

/// Anchor variant: the transform is fitted on the listed rows only
/// (ref holds the anchor positions in the same order) and applied to every
/// node of est. rmse_position is reported over the anchors.
std::pair<LocationMap, AlignmentResult> align_to_anchors(const LocationMap& est,
                                                         const std::vector<Index>& anchors,
                                                         const LocationMap& ref);

/// Squared-distance matrix of the map's coordinates.
SymmetricMatrix edm_of(const LocationMap& map);

/// Top-k classical scaling of a squared-distance matrix: eigenvectors of
/// -1/2 J D J scaled by the square roots of the (clamped at zero)
/// eigenvalues.
LocationMap classical_scaling(const SymmetricMatrix& d, Index k);

}  // namespace edmc
