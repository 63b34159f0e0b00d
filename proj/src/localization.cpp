#include "edmc/localization.hpp"

#include "edmc/error.hpp"

#include <Eigen/SVD>

#include <cmath>
#include <string>

namespace edmc {

LocationMap extract_coordinates(const ManifoldPoint& y) {
  return {y.q() * y.lambda().cwiseSqrt().asDiagonal(), Frame::Arbitrary};
}

namespace {

// Procrustes fit of est_fit onto ref_fit (same shape), returning R and t with
// R^T x + t the fitted transform.
AlignmentResult fit_rigid(const Matrix& est_fit, const Matrix& ref_fit) {
  const Index n = ref_fit.rows();
  const Index k = ref_fit.cols();
  if (n <= k) {
    throw Error(ErrorKind::DegenerateReference,
                "need more than k=" + std::to_string(k) + " reference points, got " + std::to_string(n));
  }
  const Vector mean_est = est_fit.colwise().mean().transpose();
  const Vector mean_ref = ref_fit.colwise().mean().transpose();
  const Matrix est_c = est_fit.rowwise() - mean_est.transpose();
  const Matrix ref_c = ref_fit.rowwise() - mean_ref.transpose();

  Eigen::JacobiSVD<Matrix> ref_svd(ref_c);
  const Vector& sv = ref_svd.singularValues();
  if (!(sv(0) > 0.0) || sv(k - 1) <= 1e-10 * sv(0)) {
    throw Error(ErrorKind::DegenerateReference, "reference points are affinely dependent");
  }

  Eigen::JacobiSVD<Matrix> svd(est_c.transpose() * ref_c, Eigen::ComputeFullU | Eigen::ComputeFullV);
  AlignmentResult out;
  out.rotation = svd.matrixU() * svd.matrixV().transpose();
  out.translation = mean_ref - out.rotation.transpose() * mean_est;
  return out;
}

Matrix apply_rigid(const Matrix& coords, const AlignmentResult& t) {
  return (coords * t.rotation).rowwise() + t.translation.transpose();
}

double rmse(const Matrix& a, const Matrix& b) {
  return std::sqrt((a - b).rowwise().squaredNorm().mean());
}

}  // namespace

std::pair<LocationMap, AlignmentResult> align(const LocationMap& est, const LocationMap& ref) {
  if (est.n() != ref.n() || est.k() != ref.k()) {
    throw Error(ErrorKind::InvalidDimension, "align: maps differ in shape");
  }
  AlignmentResult t = fit_rigid(est.coords, ref.coords);
  LocationMap out{apply_rigid(est.coords, t), Frame::Aligned};
  t.rmse_position = rmse(out.coords, ref.coords);
  return {std::move(out), std::move(t)};
}

std::pair<LocationMap, AlignmentResult> align_to_anchors(const LocationMap& est, const std::vector<Index>& anchors,
                                                         const LocationMap& ref) {
  if (static_cast<Index>(anchors.size()) != ref.n() || est.k() != ref.k()) {
    throw Error(ErrorKind::InvalidDimension, "align_to_anchors: anchor list does not match reference");
  }
  Matrix est_fit(ref.n(), est.k());
  for (std::size_t a = 0; a < anchors.size(); ++a) {
    if (anchors[a] < 0 || anchors[a] >= est.n()) {
      throw Error(ErrorKind::InvalidArgument, "align_to_anchors: anchor index out of range");
    }
    est_fit.row(static_cast<Index>(a)) = est.coords.row(anchors[a]);
  }
  AlignmentResult t = fit_rigid(est_fit, ref.coords);
  LocationMap out{apply_rigid(est.coords, t), Frame::Aligned};
  t.rmse_position = rmse(apply_rigid(est_fit, t), ref.coords);
  return {std::move(out), std::move(t)};
}

SymmetricMatrix edm_of(const LocationMap& map) {
  const Matrix& x = map.coords;
  const Index n = x.rows();
  Matrix d(n, n);
  for (Index i = 0; i < n; ++i) {
    d(i, i) = 0.0;
    for (Index j = i + 1; j < n; ++j) d(i, j) = d(j, i) = (x.row(i) - x.row(j)).squaredNorm();
  }
  return SymmetricMatrix(d);
}

LocationMap classical_scaling(const SymmetricMatrix& d, Index k) {
  const Index n = d.n();
  const Matrix j = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  EigenPair eig = truncated_eig(-0.5 * j * d.mat() * j, k);
  const Vector scale = eig.values.cwiseMax(0.0).cwiseSqrt();
  return {eig.vectors * scale.asDiagonal(), Frame::Arbitrary};
}

}  // namespace edmc
