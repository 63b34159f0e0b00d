#pragma once

// Riemannian nonlinear conjugate gradient for fixed-rank EDM completion:
//   minimize f(Y) = 1/2 || P_E(g(Y)) - P_E(D_obs) ||_F^2
// over the rank-k PSD manifold, with an exact-quadratic initial step,
// Armijo backtracking on the retracted objective and projection transport.

#include "edmc/manifold.hpp"
#include "edmc/observations.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace edmc {

enum class BetaRule { PolakRibierePlus, FletcherReeves, SteepestDescent };
enum class InitMode { Spectral, Random };

const char* to_string(BetaRule rule);
BetaRule beta_rule_from_string(const std::string& name);

struct SolverConfig {
  Index k = 2;
  /// Absolute tolerance on ||P_E(g(Y)) - D_obs||_F. When unset, the solver
  /// uses 1e-6 * ||D_obs||_F.
  std::optional<double> epsilon;
  int max_iters = 500;
  double armijo_mu = 0.5;
  double armijo_c1 = 1e-4;
  int max_backtracks = 25;
  BetaRule beta_rule = BetaRule::PolakRibierePlus;
  InitMode init = InitMode::Spectral;
  std::uint64_t seed = 0;

  void validate() const;
};

struct IterationRecord {
  int iter = 0;
  double f_prev = 0.0;
  double f = 0.0;
  double grad_norm = 0.0;   // ||grad f(Y_i)|| at the point the step left from
  double alpha = 0.0;
  double beta = 0.0;
  double slope = 0.0;       // <grad f(Y_i), P_i>
  int backtracks = 0;
  bool restarted = false;   // P_i was reset to -grad

  /// Armijo sufficient-decrease test as evaluated by the line search.
  bool armijo_holds(double c1) const { return f <= f_prev + c1 * alpha * slope; }
};

enum class SolverStatus { Converged, MaxIterations, LineSearchFailure };
const char* to_string(SolverStatus status);

struct SolverReport {
  int iterations = 0;
  double initial_residual = 0.0;
  double final_residual = 0.0;
  double epsilon = 0.0;
  bool converged = false;
  SolverStatus status = SolverStatus::MaxIterations;
  std::vector<IterationRecord> trace;
  ManifoldPoint estimate;
};

struct LineSearchResult {
  double alpha = 0.0;
  ManifoldPoint next;
  double f_next = 0.0;
  int backtracks = 0;
};

/// Masked residual P_E(g(Y)) - P_E(D_obs).
SymmetricMatrix masked_residual(const ManifoldPoint& y, const ObservedDistances& obs);

double cost(const ManifoldPoint& y, const ObservedDistances& obs);

SymmetricMatrix euclidean_gradient(const ManifoldPoint& y, const ObservedDistances& obs);

/// Riemannian gradient computed without forming the n x n Euclidean
/// gradient. Equals riemannian_grad(y, euclidean_gradient(y, obs)).
TangentVector riemannian_gradient(const ManifoldPoint& y, const ObservedDistances& obs);

/// old_grad_sq is <g_old, g_old> at the previous point. Returns 0 when it
/// vanishes.
double choose_beta(const TangentVector& new_grad, const TangentVector& transported_old_grad,
                   double old_grad_sq, BetaRule rule);

/// Requires <grad, p> < 0 (slope). Throws LineSearchFailure when no step is
/// accepted within cfg.max_backtracks halvings.
LineSearchResult line_search(const ManifoldPoint& y, const TangentVector& p, double f_y,
                             double slope, const ObservedDistances& obs, const SolverConfig& cfg);

/// Default starting point: classical scaling of D_obs with unobserved
/// entries set to zero, top-k eigenvalues floored at 1e-6 lambda_1.
ManifoldPoint spectral_init(const ObservedDistances& obs, Index k);

/// Y = X X^T with X an n x k standard Gaussian factor drawn from seed.
ManifoldPoint random_init(Index n, Index k, std::uint64_t seed);

using IterationObserver = std::function<void(const IterationRecord&, const ManifoldPoint&)>;

SolverReport solve(const ObservedDistances& obs, const SolverConfig& cfg,
                   const std::optional<ManifoldPoint>& init = std::nullopt,
                   const IterationObserver& observer = {});

}  // namespace edmc
