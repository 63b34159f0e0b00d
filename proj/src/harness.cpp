#include "edmc/harness.hpp"

#include "edmc/error.hpp"
#include "edmc/rng.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <chrono>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>
#include <thread>

namespace edmc {

ObservedDistances ObservedDistances::from_full(const SymmetricMatrix& d, SampleSet e, Index k) {
  if (d.n() != e.n()) throw Error(ErrorKind::InvalidDimension, "ObservedDistances: matrix/sample size mismatch");
  ObservedDistances obs;
  obs.values = apply_mask(d, e);
  const double total = 0.5 * static_cast<double>(e.n()) * static_cast<double>(e.n() - 1);
  obs.sampling_ratio = total > 0 ? static_cast<double>(e.pairs().size()) / total : 0.0;
  obs.e = std::move(e);
  obs.k = k;
  return obs;
}

Matrix figure1_coordinates() {
  Matrix x(5, 2);
  x << 7, 9,
       2, 7,
       11, 7,
       12, 4,
       15, 6;
  return x;
}

Scenario scenario_from_coordinates(const Matrix& coords, std::uint64_t seed) {
  if (coords.rows() <= coords.cols() || coords.cols() < 1) {
    throw Error(ErrorKind::InvalidDimension, "scenario: need n > k >= 1, got n=" + std::to_string(coords.rows()) +
                                                 ", k=" + std::to_string(coords.cols()));
  }
  Scenario s;
  s.n = coords.rows();
  s.k = coords.cols();
  s.coords = coords;
  s.d_true = edm_of(LocationMap{coords, Frame::Arbitrary});
  s.seed = seed;
  return s;
}

Scenario generate_scenario(Index n, Index k, std::uint64_t seed) {
  if (k < 1 || n <= k) {
    throw Error(ErrorKind::InvalidDimension,
                "scenario: need n > k >= 1, got n=" + std::to_string(n) + ", k=" + std::to_string(k));
  }
  Rng rng(seed);
  Matrix x(n, k);
  for (Index i = 0; i < n; ++i)
    for (Index c = 0; c < k; ++c) x(i, c) = rng.uniform();
  return scenario_from_coordinates(x, seed);
}

ObservedDistances sample_observations(const Scenario& s, const SamplingSpec& spec, std::uint64_t seed) {
  const Index n = s.n;
  const std::uint64_t total = static_cast<std::uint64_t>(n) * static_cast<std::uint64_t>(n - 1) / 2;
  Rng rng(seed);
  std::vector<SampleSet::Pair> pairs;

  if (spec.model == SamplingModel::UniformPairs) {
    if (!(spec.ratio > 0.0 && spec.ratio <= 1.0)) {
      throw Error(ErrorKind::EmptySample, "sampling ratio must lie in (0, 1], got " + std::to_string(spec.ratio));
    }
    // The relative slack keeps e.g. 0.3 * 19900 from flooring to 5969.
    const auto count =
        static_cast<std::uint64_t>(std::floor(spec.ratio * static_cast<double>(total) * (1.0 + 1e-12)));
    if (count < 1) {
      throw Error(ErrorKind::EmptySample, "ratio " + std::to_string(spec.ratio) + " selects no pair out of " +
                                              std::to_string(total));
    }
    std::vector<SampleSet::Pair> all;
    all.reserve(total);
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j) all.emplace_back(i, j);
    // Partial Fisher-Yates: the first `count` slots are a uniform subset.
    for (std::uint64_t m = 0; m < count; ++m) {
      const std::uint64_t pick = m + rng.below(total - m);
      std::swap(all[m], all[pick]);
    }
    pairs.assign(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(count));
  } else {
    if (!(spec.rho > 0.0)) throw Error(ErrorKind::InvalidArgument, "radio range rho must be > 0");
    const double rho_sq = spec.rho * spec.rho;
    for (Index i = 0; i < n; ++i)
      for (Index j = i + 1; j < n; ++j)
        if (s.d_true(i, j) <= rho_sq) pairs.emplace_back(i, j);
    if (pairs.empty()) throw Error(ErrorKind::EmptySample, "no pair within radio range");
  }

  ObservedDistances obs = ObservedDistances::from_full(s.d_true, SampleSet(n, pairs), s.k);
  obs.seed = s.seed;
  if (spec.noise_sigma > 0.0) {
    Matrix v = obs.values.mat();
    for (auto [i, j] : obs.e.pairs()) {
      const double noisy = std::max(0.0, v(i, j) + spec.noise_sigma * rng.normal());
      v(i, j) = v(j, i) = noisy;
    }
    obs.values = SymmetricMatrix(v);
    obs.noise_sigma = spec.noise_sigma;
  }
  return obs;
}

EvalResult evaluate(const SymmetricMatrix& d_hat, const Scenario& s, const ObservedDistances& obs) {
  if (d_hat.n() != s.n || obs.n() != s.n) {
    throw Error(ErrorKind::InvalidDimension, "evaluate: estimate, scenario and observations differ in size");
  }
  EvalResult r;
  const Matrix diff = d_hat.mat() - s.d_true.mat();
  const std::size_t e_size = obs.e.directed_size();
  r.mse_s = e_size > 0 ? diff.cwiseProduct(obs.e.indicator()).squaredNorm() / static_cast<double>(e_size) : 0.0;
  r.mse_a = diff.squaredNorm() / static_cast<double>(s.n * s.n);
  r.rmse = std::sqrt(r.mse_a);
  try {
    const LocationMap est = classical_scaling(d_hat, s.k);
    r.rmse_position = align(est, LocationMap{s.coords, Frame::Arbitrary}).second.rmse_position;
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::DegenerateReference) throw;
    r.rmse_position = std::numeric_limits<double>::quiet_NaN();
  }
  return r;
}

std::uint64_t trial_seed(std::uint64_t master, Index n, Index k, double ratio, int trial) {
  const std::uint64_t cell = derive_seed(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k),
                                         std::bit_cast<std::uint64_t>(ratio));
  return derive_seed(master, cell, static_cast<std::uint64_t>(trial));
}

TrialResult run_trial(Index n, Index k, double ratio, int trial, std::uint64_t seed, const SolverConfig& cfg,
                      const SweepGrid& grid) {
  TrialResult out;
  out.n = n;
  out.k = k;
  out.ratio = ratio;
  out.trial = trial;
  out.seed = seed;

  const auto start = std::chrono::steady_clock::now();
  const Scenario s = generate_scenario(n, k, derive_seed(seed, 1));
  SamplingSpec spec;
  spec.ratio = ratio;
  spec.noise_sigma = grid.noise_sigma;
  const ObservedDistances obs = sample_observations(s, spec, derive_seed(seed, 2));

  SolverConfig local = cfg;
  local.k = k;
  local.beta_rule = grid.beta_rule;
  local.seed = derive_seed(seed, 3);

  const double e_size = static_cast<double>(obs.e.directed_size());
  auto trace_point = [&](int iter, double f, const ManifoldPoint& y) {
    const Matrix diff = edm_from_gram(to_ambient(y)).mat() - s.d_true.mat();
    return TracePoint{iter, f, diff.cwiseProduct(obs.e.indicator()).squaredNorm() / e_size,
                      diff.squaredNorm() / static_cast<double>(n * n)};
  };

  try {
    const ManifoldPoint init =
        local.init == InitMode::Spectral ? spectral_init(obs, k) : random_init(n, k, local.seed);
    IterationObserver observer;
    if (grid.record_traces) {
      out.trace.push_back(trace_point(0, cost(init, obs), init));
      observer = [&](const IterationRecord& rec, const ManifoldPoint& y) {
        out.trace.push_back(trace_point(rec.iter, rec.f, y));
      };
    }
    const SolverReport report = solve(obs, local, init, observer);
    out.status = report.status;
    out.eval = evaluate(edm_from_gram(to_ambient(report.estimate)), s, obs);
    out.eval.iterations = report.iterations;
    out.eval.converged = report.converged;
  } catch (const Error&) {
    const double inf = std::numeric_limits<double>::infinity();
    out.status = SolverStatus::LineSearchFailure;
    out.eval.mse_s = out.eval.mse_a = out.eval.rmse = inf;
    out.eval.rmse_position = std::numeric_limits<double>::quiet_NaN();
    out.eval.converged = false;
  }
  out.eval.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return out;
}

CellSummary summarize(const std::vector<TrialResult>& cell_trials, double success_threshold) {
  CellSummary c;
  if (cell_trials.empty()) return c;
  c.n = cell_trials.front().n;
  c.k = cell_trials.front().k;
  c.ratio = cell_trials.front().ratio;
  c.trials = static_cast<int>(cell_trials.size());

  std::vector<double> mse_a, rmse;
  int successes = 0;
  for (const auto& t : cell_trials) {
    c.mean_mse_s += t.eval.mse_s;
    c.mean_mse_a += t.eval.mse_a;
    c.mean_rmse += t.eval.rmse;
    c.mean_iterations += t.eval.iterations;
    mse_a.push_back(t.eval.mse_a);
    rmse.push_back(t.eval.rmse);
    if (t.eval.mse_a < success_threshold) ++successes;
  }
  const double count = static_cast<double>(c.trials);
  c.mean_mse_s /= count;
  c.mean_mse_a /= count;
  c.mean_rmse /= count;
  c.mean_iterations /= count;
  c.success_rate = successes / count;

  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  };
  c.median_mse_a = median(mse_a);
  c.median_rmse = median(rmse);
  return c;
}

SweepResult run_sweep(const SweepGrid& grid, const SolverConfig& cfg, unsigned jobs) {
  if (grid.n_values.empty() || grid.k_values.empty() || grid.ratios.empty() || grid.trials < 1) {
    throw Error(ErrorKind::InvalidArgument, "sweep grid is empty");
  }
  for (Index n : grid.n_values)
    for (Index k : grid.k_values)
      if (k < 1 || n <= k) throw Error(ErrorKind::InvalidDimension, "sweep grid: need n > k >= 1");
  for (double r : grid.ratios)
    if (!(r > 0.0 && r <= 1.0)) throw Error(ErrorKind::EmptySample, "sweep grid: ratios must lie in (0, 1]");
  struct Task {
    Index n, k;
    double ratio;
    int trial;
  };
  std::vector<Task> tasks;
  for (Index n : grid.n_values)
    for (Index k : grid.k_values)
      for (double r : grid.ratios)
        for (int t = 0; t < grid.trials; ++t) tasks.push_back({n, k, r, t});

  SweepResult result;
  result.trials.resize(tasks.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      const Task& t = tasks[i];
      result.trials[i] =
          run_trial(t.n, t.k, t.ratio, t.trial, trial_seed(grid.master_seed, t.n, t.k, t.ratio, t.trial), cfg, grid);
    }
  };

  if (jobs == 0) jobs = std::max(1u, std::thread::hardware_concurrency());
  jobs = static_cast<unsigned>(std::min<std::size_t>(jobs, tasks.size()));
  if (jobs <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
  }

  for (std::size_t begin = 0; begin < tasks.size(); begin += static_cast<std::size_t>(grid.trials)) {
    std::vector<TrialResult> cell(result.trials.begin() + static_cast<std::ptrdiff_t>(begin),
                                  result.trials.begin() + static_cast<std::ptrdiff_t>(begin + grid.trials));
    result.cells.push_back(summarize(cell, grid.success_threshold));
  }
  return result;
}

}  // namespace edmc
