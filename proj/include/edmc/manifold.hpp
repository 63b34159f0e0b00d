#pragma once

// Geometry of the manifold of n x n symmetric PSD matrices of rank exactly k,
// embedded in the space of symmetric matrices with the trace inner product.
// Points are kept in eigenform Q diag(lambda) Q^T and tangent vectors in the
// factored form Q B Q^T + Up Q^T + Q Up^T with Q^T Up = 0; nothing here forms
// an n x n matrix except the explicit to_ambient conversions.

#include "edmc/matrix_ops.hpp"

#include <optional>

namespace edmc {

class ManifoldPoint {
 public:
  ManifoldPoint() = default;

  /// Validates Q^T Q = I (1e-10) and lambda strictly positive, descending.
  ManifoldPoint(Matrix q, Vector lambda);

  Index n() const { return q_.rows(); }
  Index k() const { return q_.cols(); }
  const Matrix& q() const { return q_; }
  const Vector& lambda() const { return lambda_; }

  /// diag(Y), computed from the factors in O(nk).
  Vector gram_diagonal() const;

 private:
  Matrix q_;
  Vector lambda_;
};

struct TangentVector {
  Matrix b;   // k x k, symmetric
  Matrix up;  // n x k, orthogonal to the base point's Q

  static TangentVector zero(Index n, Index k);

  TangentVector operator+(const TangentVector& o) const { return {b + o.b, up + o.up}; }
  TangentVector operator-(const TangentVector& o) const { return {b - o.b, up - o.up}; }
  TangentVector operator-() const { return {-b, -up}; }
  TangentVector operator*(double s) const { return {s * b, s * up}; }
};

inline TangentVector operator*(double s, const TangentVector& v) { return v * s; }

SymmetricMatrix to_ambient(const ManifoldPoint& y);
Matrix to_ambient(const ManifoldPoint& y, const TangentVector& v);

/// Nearest rank-k PSD matrix to Sym(A) via truncated eigendecomposition.
/// Throws RankDeficientRetraction when the top k eigenvalues are not all
/// positive.
ManifoldPoint point_from_ambient(const Matrix& a, Index k);

/// Orthogonal projection onto T_Y:
/// QQ^T S + S QQ^T - QQ^T S QQ^T with S = Sym(A).
TangentVector project_tangent(const ManifoldPoint& y, const Matrix& a);

/// Same projection for an operand given by its products with Q, i.e.
/// sq = Sym(A) Q. Lets callers with structured A avoid the n x n form.
TangentVector project_tangent_from_product(const ManifoldPoint& y, const Matrix& sq);

TangentVector riemannian_grad(const ManifoldPoint& y, const SymmetricMatrix& euclid_grad);

/// Vector transport by projection: P_{T_{Y_new}}(ambient(V_old)), evaluated
/// from the factors of the old base point.
TangentVector transport(const ManifoldPoint& y_new, const ManifoldPoint& y_old,
                        const TangentVector& v_old);

/// tr(B1^T B2) + 2 tr(Up1^T Up2): the trace inner product of the ambient
/// forms.
double tangent_inner(const TangentVector& v1, const TangentVector& v2);
double tangent_norm(const TangentVector& v);

/// W_k(Y + step V), computed on the at most 2k-dimensional column space
/// span[Q, Up]. Returns nullopt when fewer than k eigenvalues exceed
/// 1e-12 |lambda_max|.
std::optional<ManifoldPoint> try_retract(const ManifoldPoint& y, const TangentVector& v,
                                         double step);

/// Throwing variant of try_retract (RankDeficientRetraction).
ManifoldPoint retract(const ManifoldPoint& y, const TangentVector& v, double step);

}  // namespace edmc
