#pragma once

// Dense symmetric primitives and the linear operators of distance geometry:
// the Gram-to-EDM map g(Y) = 2 Sym(diag(Y) 1^T - Y), its adjoint, the
// sampling operator P_E and truncated symmetric eigendecomposition.

#include <Eigen/Dense>

#include <cstddef>
#include <utility>
#include <vector>

namespace edmc {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Dense n x n matrix that is exactly symmetric. Construction from an
/// arbitrary square matrix averages it with its transpose, so an input that
/// is already symmetric is stored bit-for-bit unchanged.
class SymmetricMatrix {
 public:
  SymmetricMatrix() = default;
  explicit SymmetricMatrix(const Matrix& a);

  static SymmetricMatrix zero(Index n);

  Index n() const { return data_.rows(); }
  const Matrix& mat() const { return data_; }
  double operator()(Index i, Index j) const { return data_(i, j); }

  SymmetricMatrix operator+(const SymmetricMatrix& o) const;
  SymmetricMatrix operator-(const SymmetricMatrix& o) const;
  SymmetricMatrix operator*(double s) const;

 private:
  Matrix data_;
};

/// Observed index set E. Stores each unordered off-diagonal pair once (i < j)
/// plus a dense 0/1 indicator of the symmetric closure. The diagonal is never
/// part of E: it is identically zero for any distance matrix.
class SampleSet {
 public:
  using Pair = std::pair<Index, Index>;

  SampleSet() = default;
  SampleSet(Index n, const std::vector<Pair>& pairs);

  static SampleSet full(Index n);
  static SampleSet empty(Index n) { return SampleSet(n, {}); }

  Index n() const { return n_; }
  const std::vector<Pair>& pairs() const { return pairs_; }
  const Matrix& indicator() const { return indicator_; }
  bool contains(Index i, Index j) const { return indicator_(i, j) != 0.0; }

  /// |E| counting (i,j) and (j,i) separately.
  std::size_t directed_size() const { return 2 * pairs_.size(); }

 private:
  Index n_ = 0;
  std::vector<Pair> pairs_;
  Matrix indicator_;
};

/// Eigenpairs with values in descending order and orthonormal columns.
struct EigenPair {
  Vector values;
  Matrix vectors;
};

SymmetricMatrix sym(const Matrix& a);
Matrix skew(const Matrix& a);

/// Trace inner product <A, B> = tr(A^T B).
double frob_inner(const Matrix& a, const Matrix& b);

/// g(Y)[i][j] = Y[i][i] + Y[j][j] - 2 Y[i][j].
SymmetricMatrix edm_from_gram(const SymmetricMatrix& y);

/// Adjoint of edm_from_gram: 2 diag(Sym(R) 1) - 2 Sym(R).
SymmetricMatrix edm_adjoint(const Matrix& r);

/// P_E(A): keeps entries on E, zeroes everything else including the diagonal.
SymmetricMatrix apply_mask(const SymmetricMatrix& a, const SampleSet& e);

/// The k algebraically largest eigenpairs of Sym(A). Negative values are
/// returned as-is.
EigenPair truncated_eig(const Matrix& a, Index k);

/// P diag(values) P^T.
SymmetricMatrix reconstruct(const EigenPair& eig);

}  // namespace edmc
