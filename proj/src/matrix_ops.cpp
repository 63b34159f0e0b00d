#include "edmc/matrix_ops.hpp"

#include "edmc/error.hpp"

#include <algorithm>
#include <string>

namespace edmc {

namespace {

void require_square(const Matrix& a, const char* what) {
  if (a.rows() != a.cols() || a.rows() < 1) {
    throw Error(ErrorKind::InvalidDimension, std::string(what) + ": expected a nonempty square matrix, got " +
                                                 std::to_string(a.rows()) + "x" + std::to_string(a.cols()));
  }
}

void require_same_n(Index a, Index b, const char* what) {
  if (a != b) {
    throw Error(ErrorKind::InvalidDimension,
                std::string(what) + ": size " + std::to_string(a) + " vs " + std::to_string(b));
  }
}

}  // namespace

SymmetricMatrix::SymmetricMatrix(const Matrix& a) {
  require_square(a, "SymmetricMatrix");
  data_ = 0.5 * (a + a.transpose());
}

SymmetricMatrix SymmetricMatrix::zero(Index n) { return SymmetricMatrix(Matrix::Zero(n, n)); }

SymmetricMatrix SymmetricMatrix::operator+(const SymmetricMatrix& o) const {
  require_same_n(n(), o.n(), "SymmetricMatrix::operator+");
  SymmetricMatrix r;
  r.data_ = data_ + o.data_;
  return r;
}

SymmetricMatrix SymmetricMatrix::operator-(const SymmetricMatrix& o) const {
  require_same_n(n(), o.n(), "SymmetricMatrix::operator-");
  SymmetricMatrix r;
  r.data_ = data_ - o.data_;
  return r;
}

SymmetricMatrix SymmetricMatrix::operator*(double s) const {
  SymmetricMatrix r;
  r.data_ = s * data_;
  return r;
}

SampleSet::SampleSet(Index n, const std::vector<Pair>& pairs) : n_(n), indicator_(Matrix::Zero(n, n)) {
  if (n < 1) throw Error(ErrorKind::InvalidDimension, "SampleSet: n must be >= 1");
  pairs_.reserve(pairs.size());
  for (auto [i, j] : pairs) {
    if (i < 0 || j < 0 || i >= n || j >= n) {
      throw Error(ErrorKind::InvalidArgument, "SampleSet: index pair (" + std::to_string(i) + "," +
                                                  std::to_string(j) + ") out of range");
    }
    if (i == j) throw Error(ErrorKind::InvalidArgument, "SampleSet: diagonal entries are not samples");
    if (i > j) std::swap(i, j);
    pairs_.emplace_back(i, j);
  }
  std::sort(pairs_.begin(), pairs_.end());
  pairs_.erase(std::unique(pairs_.begin(), pairs_.end()), pairs_.end());
  for (auto [i, j] : pairs_) {
    indicator_(i, j) = 1.0;
    indicator_(j, i) = 1.0;
  }
}

SampleSet SampleSet::full(Index n) {
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(n * (n - 1) / 2));
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  return SampleSet(n, pairs);
}

SymmetricMatrix sym(const Matrix& a) { return SymmetricMatrix(a); }

Matrix skew(const Matrix& a) {
  require_square(a, "skew");
  return 0.5 * (a - a.transpose());
}

double frob_inner(const Matrix& a, const Matrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorKind::InvalidDimension, "frob_inner: shape mismatch");
  }
  return a.cwiseProduct(b).sum();
}

SymmetricMatrix edm_from_gram(const SymmetricMatrix& y) {
  const Matrix& m = y.mat();
  const Vector d = m.diagonal();
  Matrix g = d.replicate(1, m.cols());
  g += d.transpose().replicate(m.rows(), 1);
  g -= 2.0 * m;
  // Exact zeros; rounding in d_i + d_i - 2 d_i can leave tiny residue.
  g.diagonal().setZero();
  return SymmetricMatrix(g);
}

SymmetricMatrix edm_adjoint(const Matrix& r) {
  const SymmetricMatrix s = sym(r);
  Matrix out = -2.0 * s.mat();
  out.diagonal() += 2.0 * s.mat().rowwise().sum();
  return SymmetricMatrix(out);
}

SymmetricMatrix apply_mask(const SymmetricMatrix& a, const SampleSet& e) {
  require_same_n(a.n(), e.n(), "apply_mask");
  return SymmetricMatrix(a.mat().cwiseProduct(e.indicator()));
}

EigenPair truncated_eig(const Matrix& a, Index k) {
  require_square(a, "truncated_eig");
  if (k < 1 || k > a.rows()) {
    throw Error(ErrorKind::InvalidDimension, "truncated_eig: k=" + std::to_string(k) + " outside [1, " +
                                                 std::to_string(a.rows()) + "]");
  }
  Eigen::SelfAdjointEigenSolver<Matrix> es(sym(a).mat());
  if (es.info() != Eigen::Success) {
    throw Error(ErrorKind::NumericalFailure, "truncated_eig: symmetric eigensolver did not converge");
  }
  // Ascending from Eigen; take the last k in reverse.
  EigenPair out;
  out.values = es.eigenvalues().tail(k).reverse();
  out.vectors = es.eigenvectors().rightCols(k).rowwise().reverse();
  return out;
}

SymmetricMatrix reconstruct(const EigenPair& eig) {
  return SymmetricMatrix(eig.vectors * eig.values.asDiagonal() * eig.vectors.transpose());
}

}  // namespace edmc
