#include "edmc/solver.hpp"

#include "edmc/error.hpp"
#include "edmc/rng.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace edmc {

const char* to_string(BetaRule rule) {
  switch (rule) {
    case BetaRule::PolakRibierePlus: return "pr+";
    case BetaRule::FletcherReeves: return "fr";
    case BetaRule::SteepestDescent: return "sd";
  }
  return "?";
}

BetaRule beta_rule_from_string(const std::string& name) {
  if (name == "pr+" || name == "pr" || name == "polak-ribiere") return BetaRule::PolakRibierePlus;
  if (name == "fr" || name == "fletcher-reeves") return BetaRule::FletcherReeves;
  if (name == "sd" || name == "steepest-descent") return BetaRule::SteepestDescent;
  throw Error(ErrorKind::InvalidArgument, "unknown beta rule '" + name + "' (expected pr+, fr or sd)");
}

const char* to_string(SolverStatus status) {
  switch (status) {
    case SolverStatus::Converged: return "converged";
    case SolverStatus::MaxIterations: return "max_iterations";
    case SolverStatus::LineSearchFailure: return "line_search_failure";
  }
  return "?";
}

void SolverConfig::validate() const {
  auto bad = [](const std::string& what) { throw Error(ErrorKind::InvalidArgument, "SolverConfig: " + what); };
  if (k < 1) bad("k must be >= 1");
  if (epsilon && !(*epsilon >= 0.0)) bad("epsilon must be >= 0");
  if (max_iters < 0) bad("max_iters must be >= 0");
  if (!(armijo_mu > 0.0 && armijo_mu < 1.0)) bad("armijo_mu must lie in (0,1)");
  if (!(armijo_c1 > 0.0 && armijo_c1 < 1.0)) bad("armijo_c1 must lie in (0,1)");
  if (max_backtracks < 0) bad("max_backtracks must be >= 0");
}

namespace {

void require_match(const ManifoldPoint& y, const ObservedDistances& obs) {
  if (y.n() != obs.n() || obs.values.n() != obs.n()) {
    throw Error(ErrorKind::InvalidDimension, "point has n=" + std::to_string(y.n()) +
                                                 ", observations have n=" + std::to_string(obs.n()));
  }
}

double half_sq_norm(const SymmetricMatrix& r) { return 0.5 * r.mat().squaredNorm(); }

// Riemannian gradient from the masked residual R. The Euclidean gradient is
// 2 diag(R 1) - 2 R, so its product with Q needs only R Q.
TangentVector grad_from_residual(const ManifoldPoint& y, const SymmetricMatrix& r) {
  const Vector row_sums = r.mat().rowwise().sum();
  const Matrix gq = 2.0 * (row_sums.asDiagonal() * y.q()) - 2.0 * (r.mat() * y.q());
  return project_tangent_from_product(y, gq);
}

}  // namespace

SymmetricMatrix masked_residual(const ManifoldPoint& y, const ObservedDistances& obs) {
  require_match(y, obs);
  return apply_mask(edm_from_gram(to_ambient(y)) - obs.values, obs.e);
}

double cost(const ManifoldPoint& y, const ObservedDistances& obs) {
  return half_sq_norm(masked_residual(y, obs));
}

SymmetricMatrix euclidean_gradient(const ManifoldPoint& y, const ObservedDistances& obs) {
  return edm_adjoint(masked_residual(y, obs).mat());
}

TangentVector riemannian_gradient(const ManifoldPoint& y, const ObservedDistances& obs) {
  return grad_from_residual(y, masked_residual(y, obs));
}

double choose_beta(const TangentVector& new_grad, const TangentVector& transported_old_grad, double old_grad_sq,
                   BetaRule rule) {
  if (rule == BetaRule::SteepestDescent || !(old_grad_sq > 0.0)) return 0.0;
  if (rule == BetaRule::FletcherReeves) return tangent_inner(new_grad, new_grad) / old_grad_sq;
  const double num = tangent_inner(new_grad, new_grad - transported_old_grad);
  return std::max(0.0, num / old_grad_sq);
}

LineSearchResult line_search(const ManifoldPoint& y, const TangentVector& p, double f_y, double slope,
                             const ObservedDistances& obs, const SolverConfig& cfg) {
  if (!(slope < 0.0)) {
    throw Error(ErrorKind::InvalidArgument, "line_search: direction is not a descent direction");
  }
  // Before retraction t -> f(Y + tP) is an exact quadratic; start at its
  // minimizer.
  const SymmetricMatrix a = masked_residual(y, obs);
  const SymmetricMatrix bp = apply_mask(edm_from_gram(SymmetricMatrix(to_ambient(y, p))), obs.e);
  const double curvature = bp.mat().squaredNorm();
  double alpha = curvature > 0.0 ? -frob_inner(a.mat(), bp.mat()) / curvature : 1.0;
  if (!(alpha > 0.0) || !std::isfinite(alpha)) alpha = 1.0;

  for (int m = 0; m <= cfg.max_backtracks; ++m, alpha *= cfg.armijo_mu) {
    auto next = try_retract(y, p, alpha);
    if (!next) continue;
    const double f_next = cost(*next, obs);
    // Strict decrease too: once alpha * slope underflows against f_y the
    // Armijo bound alone admits steps that change nothing.
    if (f_next <= f_y + cfg.armijo_c1 * alpha * slope && f_next < f_y) {
      return {alpha, std::move(*next), f_next, m};
    }
  }
  throw Error(ErrorKind::LineSearchFailure,
              "no acceptable step within " + std::to_string(cfg.max_backtracks) + " backtracks");
}

ManifoldPoint spectral_init(const ObservedDistances& obs, Index k) {
  const Index n = obs.n();
  if (k < 1 || k > n) throw Error(ErrorKind::InvalidDimension, "spectral_init: k out of range");
  const Matrix j = Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  const Matrix gram = -0.5 * j * obs.values.mat() * j;
  EigenPair eig = truncated_eig(gram, k);
  const double top = eig.values(0);
  if (!(top > 0.0)) {
    eig.values.setOnes();
  } else {
    const double floor = 1e-6 * top;
    for (Index i = 0; i < k; ++i) eig.values(i) = std::max(eig.values(i), floor);
  }
  return ManifoldPoint(std::move(eig.vectors), std::move(eig.values));
}

ManifoldPoint random_init(Index n, Index k, std::uint64_t seed) {
  if (k < 1 || k > n) throw Error(ErrorKind::InvalidDimension, "random_init: k out of range");
  Rng rng(seed);
  Matrix x(n, k);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < k; ++c) x(i, c) = rng.normal();
  // X = QR  =>  XX^T = Q (R R^T) Q^T; diagonalize the k x k core.
  Eigen::HouseholderQR<Matrix> qr(x);
  const Matrix q = qr.householderQ() * Matrix::Identity(n, k);
  const Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
  EigenPair core = truncated_eig(r * r.transpose(), k);
  return ManifoldPoint(q * core.vectors, core.values);
}

SolverReport solve(const ObservedDistances& obs, const SolverConfig& cfg, const std::optional<ManifoldPoint>& init,
                   const IterationObserver& observer) {
  cfg.validate();
  if (cfg.k >= obs.n()) {
    throw Error(ErrorKind::InvalidDimension, "solve: need n > k (n=" + std::to_string(obs.n()) +
                                                 ", k=" + std::to_string(cfg.k) + ")");
  }
  ManifoldPoint y = init ? *init
                         : (cfg.init == InitMode::Spectral ? spectral_init(obs, cfg.k)
                                                           : random_init(obs.n(), cfg.k, cfg.seed));
  if (y.k() != cfg.k) throw Error(ErrorKind::InvalidDimension, "solve: initial point has wrong rank");
  require_match(y, obs);

  SolverReport report;
  report.epsilon = cfg.epsilon.value_or(1e-6 * apply_mask(obs.values, obs.e).mat().norm());

  SymmetricMatrix residual = masked_residual(y, obs);
  double f = half_sq_norm(residual);
  report.initial_residual = std::sqrt(2.0 * f);
  report.final_residual = report.initial_residual;

  auto finish = [&](SolverStatus status) {
    report.status = status;
    report.converged = status == SolverStatus::Converged;
    report.iterations = static_cast<int>(report.trace.size());
    report.final_residual = std::sqrt(2.0 * f);
    report.estimate = y;
    return report;
  };

  if (report.final_residual < report.epsilon) return finish(SolverStatus::Converged);

  TangentVector grad = grad_from_residual(y, residual);
  TangentVector dir = -grad;
  double beta = 0.0;

  for (int i = 1; i <= cfg.max_iters; ++i) {
    IterationRecord rec;
    rec.iter = i;
    rec.f_prev = f;
    rec.beta = beta;
    rec.grad_norm = tangent_norm(grad);

    double slope = tangent_inner(grad, dir);
    if (!(slope < -1e-12 * rec.grad_norm * tangent_norm(dir))) {
      dir = -grad;
      slope = -rec.grad_norm * rec.grad_norm;
      rec.restarted = true;
      rec.beta = 0.0;
    }
    if (!(slope < 0.0)) return finish(SolverStatus::LineSearchFailure);  // stationary point

    std::optional<LineSearchResult> step;
    try {
      step = line_search(y, dir, f, slope, obs, cfg);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::LineSearchFailure || rec.restarted) {
        if (e.kind() == ErrorKind::LineSearchFailure) return finish(SolverStatus::LineSearchFailure);
        throw;
      }
      dir = -grad;
      slope = -rec.grad_norm * rec.grad_norm;
      rec.restarted = true;
      rec.beta = 0.0;
      try {
        step = line_search(y, dir, f, slope, obs, cfg);
      } catch (const Error& e2) {
        if (e2.kind() == ErrorKind::LineSearchFailure) return finish(SolverStatus::LineSearchFailure);
        throw;
      }
    }

    rec.slope = slope;
    rec.alpha = step->alpha;
    rec.backtracks = step->backtracks;
    rec.f = step->f_next;

    ManifoldPoint y_old = std::move(y);
    y = std::move(step->next);
    f = step->f_next;
    residual = masked_residual(y, obs);
    report.trace.push_back(rec);
    if (observer) observer(rec, y);

    if (std::sqrt(2.0 * f) < report.epsilon) return finish(SolverStatus::Converged);

    TangentVector new_grad = grad_from_residual(y, residual);
    const double old_grad_sq = rec.grad_norm * rec.grad_norm;
    if (cfg.beta_rule == BetaRule::PolakRibierePlus) {
      beta = choose_beta(new_grad, transport(y, y_old, grad), old_grad_sq, cfg.beta_rule);
    } else {
      beta = choose_beta(new_grad, new_grad, old_grad_sq, cfg.beta_rule);
    }
    dir = beta == 0.0 ? -new_grad : -new_grad + beta * transport(y, y_old, dir);
    grad = std::move(new_grad);
  }
  return finish(SolverStatus::MaxIterations);
}

}  // namespace edmc
