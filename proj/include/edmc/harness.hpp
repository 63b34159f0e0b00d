#pragma once

// Simulation protocol: random sensor layouts, sampling models, the MSE_s /
// MSE_a metrics and seeded multi-trial sweeps.

#include "edmc/localization.hpp"
#include "edmc/observations.hpp"
#include "edmc/solver.hpp"

#include <cstdint>
#include <optional>
#include <vector>

namespace edmc {

struct Scenario {
  Index n = 0;
  Index k = 0;
  Matrix coords;  // n x k ground truth
  SymmetricMatrix d_true;
  std::uint64_t seed = 0;
};

/// Node coordinates printed in the five-sensor example map (x1..x5).
Matrix figure1_coordinates();

/// Uniform layout: coordinates i.i.d. U[0,1). Requires n > k >= 1.
Scenario generate_scenario(Index n, Index k, std::uint64_t seed);

/// Fixed layout given explicitly (n x k).
Scenario scenario_from_coordinates(const Matrix& coords, std::uint64_t seed = 0);

enum class SamplingModel { UniformPairs, RadioRange };

struct SamplingSpec {
  SamplingModel model = SamplingModel::UniformPairs;
  double ratio = 1.0;  // UniformPairs
  double rho = 0.0;    // RadioRange, in position units
  double noise_sigma = 0.0;
};

/// UniformPairs draws floor(ratio * n(n-1)/2) unordered pairs without
/// replacement; RadioRange keeps every pair within distance rho. Optional
/// Gaussian noise is added symmetrically and clamped at zero.
ObservedDistances sample_observations(const Scenario& s, const SamplingSpec& spec,
                                      std::uint64_t seed);

struct EvalResult {
  double mse_s = 0.0;
  double mse_a = 0.0;
  double rmse = 0.0;
  double rmse_position = 0.0;
  int iterations = 0;
  bool converged = false;
  double wall_time = 0.0;
};

/// MSE_s = ||P_E(D_hat) - P_E(D)||^2 / |E| (|E| directed),
/// MSE_a = ||D_hat - D||^2 / n^2, rmse = sqrt(MSE_a). The position error
/// comes from classical scaling of D_hat aligned to the true coordinates.
EvalResult evaluate(const SymmetricMatrix& d_hat, const Scenario& s, const ObservedDistances& obs);

struct SweepGrid {
  std::vector<Index> n_values;
  std::vector<Index> k_values;
  std::vector<double> ratios;
  int trials = 1;
  BetaRule beta_rule = BetaRule::PolakRibierePlus;
  std::uint64_t master_seed = 0;
  double success_threshold = 1e-6;  // on MSE_a
  bool record_traces = true;
  double noise_sigma = 0.0;
};

struct TracePoint {
  int iter = 0;
  double f = 0.0;
  double mse_s = 0.0;
  double mse_a = 0.0;
};

struct TrialResult {
  Index n = 0;
  Index k = 0;
  double ratio = 0.0;
  int trial = 0;
  std::uint64_t seed = 0;
  EvalResult eval;
  SolverStatus status = SolverStatus::MaxIterations;
  std::vector<TracePoint> trace;  // iteration 0 is the initial point
};

struct CellSummary {
  Index n = 0;
  Index k = 0;
  double ratio = 0.0;
  int trials = 0;
  double mean_mse_s = 0.0;
  double mean_mse_a = 0.0;
  double median_mse_a = 0.0;
  double mean_rmse = 0.0;
  double median_rmse = 0.0;
  double mean_iterations = 0.0;
  double success_rate = 0.0;
};

struct SweepResult {
  std::vector<TrialResult> trials;  // grid order: n, k, ratio, trial
  std::vector<CellSummary> cells;
};

/// Seed of one trial. Depends only on the master seed and the cell/trial
/// coordinates, never on execution order.
std::uint64_t trial_seed(std::uint64_t master, Index n, Index k, double ratio, int trial);

/// One scenario -> sample -> solve -> evaluate pipeline.
TrialResult run_trial(Index n, Index k, double ratio, int trial, std::uint64_t seed,
                      const SolverConfig& cfg, const SweepGrid& grid);

/// Runs every grid cell on up to `jobs` threads (0 = hardware concurrency).
/// Solver failures are recorded per trial and never abort the sweep.
SweepResult run_sweep(const SweepGrid& grid, const SolverConfig& cfg, unsigned jobs = 0);

CellSummary summarize(const std::vector<TrialResult>& cell_trials, double success_threshold);

}  // namespace edmc
