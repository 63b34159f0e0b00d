#include "edmc/manifold.hpp"

#include "edmc/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace edmc {

namespace {

constexpr double kOrthonormalTol = 1e-10;
constexpr double kRankTol = 1e-12;

Matrix symmetrized(const Matrix& a) { return 0.5 * (a + a.transpose()); }

// Top-k eigenpairs of a symmetric matrix, or nullopt when they are not all
// above kRankTol * |lambda|_max.
std::optional<EigenPair> top_positive(const Matrix& a, Index k) {
  if (a.rows() < k) return std::nullopt;
  Eigen::SelfAdjointEigenSolver<Matrix> es(a);
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalFailure, "symmetric eigensolver did not converge");
  }
  const Vector& w = es.eigenvalues();  // ascending
  const double scale = std::max(std::abs(w(0)), std::abs(w(w.size() - 1)));
  EigenPair eig{w.tail(k).reverse(), es.eigenvectors().rightCols(k).rowwise().reverse()};
  if (!(scale > 0.0) || !(eig.values(k - 1) > kRankTol * scale)) return std::nullopt;
  return eig;
}

}  // namespace

ManifoldPoint::ManifoldPoint(Matrix q, Vector lambda) : q_(std::move(q)), lambda_(std::move(lambda)) {
  const Index k = q_.cols();
  if (k < 1 || q_.rows() < k || lambda_.size() != k) {
    throw Error(ErrorKind::InvalidDimension, "ManifoldPoint: Q is " + std::to_string(q_.rows()) + "x" +
                                                 std::to_string(k) + " with " +
                                                 std::to_string(lambda_.size()) + " eigenvalues");
  }
  const double ortho = (q_.transpose() * q_ - Matrix::Identity(k, k)).cwiseAbs().maxCoeff();
  if (!(ortho <= kOrthonormalTol)) {
    throw Error(ErrorKind::InvalidArgument, "ManifoldPoint: Q columns not orthonormal (deviation " +
                                                std::to_string(ortho) + ")");
  }
  for (Index i = 0; i < k; ++i) {
    if (!(lambda_(i) > 0.0) || (i > 0 && lambda_(i) > lambda_(i - 1))) {
      throw Error(ErrorKind::InvalidArgument, "ManifoldPoint: eigenvalues must be positive and descending");
    }
  }
}

Vector ManifoldPoint::gram_diagonal() const {
  return q_.cwiseAbs2() * lambda_;
}

TangentVector TangentVector::zero(Index n, Index k) { return {Matrix::Zero(k, k), Matrix::Zero(n, k)}; }

SymmetricMatrix to_ambient(const ManifoldPoint& y) {
  return SymmetricMatrix(y.q() * y.lambda().asDiagonal() * y.q().transpose());
}

Matrix to_ambient(const ManifoldPoint& y, const TangentVector& v) {
  const Matrix uq = v.up * y.q().transpose();
  return y.q() * v.b * y.q().transpose() + uq + uq.transpose();
}

ManifoldPoint point_from_ambient(const Matrix& a, Index k) {
  auto eig = top_positive(symmetrized(a), k);
  if (!eig) {
    throw Error(ErrorKind::RankDeficientRetraction,
                "point_from_ambient: fewer than " + std::to_string(k) + " positive eigenvalues");
  }
  return ManifoldPoint(std::move(eig->vectors), std::move(eig->values));
}

TangentVector project_tangent_from_product(const ManifoldPoint& y, const Matrix& sq) {
  if (sq.rows() != y.n() || sq.cols() != y.k()) {
    throw Error(ErrorKind::InvalidDimension, "project_tangent: operand/base point size mismatch");
  }
  TangentVector v;
  v.b = symmetrized(y.q().transpose() * sq);
  v.up = sq - y.q() * (y.q().transpose() * sq);
  return v;
}

TangentVector project_tangent(const ManifoldPoint& y, const Matrix& a) {
  if (a.rows() != y.n() || a.cols() != y.n()) {
    throw Error(ErrorKind::InvalidDimension, "project_tangent: operand is " + std::to_string(a.rows()) + "x" +
                                                 std::to_string(a.cols()) + ", base point n=" +
                                                 std::to_string(y.n()));
  }
  const Matrix sq = 0.5 * (a * y.q() + a.transpose() * y.q());
  return project_tangent_from_product(y, sq);
}

TangentVector riemannian_grad(const ManifoldPoint& y, const SymmetricMatrix& euclid_grad) {
  return project_tangent(y, euclid_grad.mat());
}

TangentVector transport(const ManifoldPoint& y_new, const ManifoldPoint& y_old, const TangentVector& v_old) {
  if (y_new.n() != y_old.n() || y_new.k() != y_old.k() || v_old.up.rows() != y_old.n() ||
      v_old.b.rows() != y_old.k()) {
    throw Error(ErrorKind::InvalidDimension, "transport: dimension mismatch");
  }
  // ambient(V_old) * Q_new = Qo B (Qo^T Qn) + Up (Qo^T Qn) + Qo (Up^T Qn)
  const Matrix overlap = y_old.q().transpose() * y_new.q();
  const Matrix sq =
      y_old.q() * (v_old.b * overlap + v_old.up.transpose() * y_new.q()) + v_old.up * overlap;
  return project_tangent_from_product(y_new, sq);
}

double tangent_inner(const TangentVector& v1, const TangentVector& v2) {
  if (v1.b.rows() != v2.b.rows() || v1.up.rows() != v2.up.rows() || v1.up.cols() != v2.up.cols()) {
    throw Error(ErrorKind::InvalidDimension, "tangent_inner: vectors from different spaces");
  }
  return v1.b.cwiseProduct(v2.b).sum() + 2.0 * v1.up.cwiseProduct(v2.up).sum();
}

double tangent_norm(const TangentVector& v) { return std::sqrt(tangent_inner(v, v)); }

std::optional<ManifoldPoint> try_retract(const ManifoldPoint& y, const TangentVector& v, double step) {
  const Index n = y.n();
  const Index k = y.k();
  if (v.up.rows() != n || v.up.cols() != k || v.b.rows() != k || v.b.cols() != k) {
    throw Error(ErrorKind::InvalidDimension, "retract: tangent vector does not match base point");
  }
  if (step == 0.0) return y;

  // Y + tV lives in span[Q, Up]. Householder QR gives an orthonormal basis
  // containing that span even when Up is rank deficient.
  const Index m = std::min<Index>(n, 2 * k);
  Matrix stacked(n, 2 * k);
  stacked << y.q(), v.up;
  Eigen::HouseholderQR<Matrix> qr(stacked);
  const Matrix basis = qr.householderQ() * Matrix::Identity(n, m);

  const Matrix mq = basis.transpose() * y.q();   // m x k
  const Matrix mu = basis.transpose() * v.up;    // m x k
  Matrix inner = y.lambda().asDiagonal();
  inner += step * v.b;
  const Matrix cross = step * mu * mq.transpose();
  const Matrix core = symmetrized(mq * inner * mq.transpose() + cross + cross.transpose());

  auto eig = top_positive(core, k);
  if (!eig) return std::nullopt;
  Matrix q = basis * eig->vectors;
  return ManifoldPoint(std::move(q), std::move(eig->values));
}

ManifoldPoint retract(const ManifoldPoint& y, const TangentVector& v, double step) {
  auto next = try_retract(y, v, step);
  if (!next) {
    throw Error(ErrorKind::RankDeficientRetraction,
                "retract: fewer than " + std::to_string(y.k()) + " positive eigenvalues after step " +
                    std::to_string(step));
  }
  return *next;
}

}  // namespace edmc
