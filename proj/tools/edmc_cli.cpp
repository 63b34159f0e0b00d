// edmc: generate sensor scenarios, complete partially observed distance
// matrices, evaluate reconstructions and run sampling-ratio sweeps.
//
// Exit codes: 0 success, 2 usage error, 3 input parse error, 4 solver did not
// converge, 5 I/O error.

#include "edmc/error.hpp"
#include "edmc/harness.hpp"
#include "edmc/io.hpp"
#include "edmc/rng.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace edmc;

namespace {

enum Exit { kOk = 0, kUsage = 2, kParse = 3, kNoConvergence = 4, kIo = 5 };

enum class LogLevel { Quiet, Info, Trace };

LogLevel log_level() {
  const char* env = std::getenv("EDM_LOG");
  if (!env) return LogLevel::Info;
  const std::string v = env;
  if (v == "quiet") return LogLevel::Quiet;
  if (v == "trace") return LogLevel::Trace;
  return LogLevel::Info;
}

void log(LogLevel level, const std::string& msg) {
  if (level <= log_level()) std::cerr << "edmc: " << msg << '\n';
}

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Parse: return kParse;
    case ErrorKind::Io: return kIo;
    case ErrorKind::LineSearchFailure:
    case ErrorKind::NumericalFailure:
    case ErrorKind::RankDeficientRetraction: return kNoConvergence;
    default: return kUsage;
  }
}

void prepare_out_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec || !fs::is_directory(dir)) {
    throw Error(ErrorKind::Io, "cannot create output directory '" + dir.string() + "'");
  }
}

template <typename F>
std::string render(F&& writer) {
  std::ostringstream os;
  writer(os);
  return os.str();
}

std::vector<double> parse_list(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  for (std::string tok; std::getline(ss, tok, ',');) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) throw std::invalid_argument(tok);
    } catch (const std::exception&) {
      throw Error(ErrorKind::InvalidArgument, "invalid number '" + tok + "' in list '" + text + "'");
    }
  }
  if (out.empty()) throw Error(ErrorKind::InvalidArgument, "empty list");
  return out;
}

json to_json(const EvalResult& r) {
  return {{"mse_s", r.mse_s},         {"mse_a", r.mse_a},           {"rmse", r.rmse},
          {"rmse_position", r.rmse_position}, {"iterations", r.iterations}, {"converged", r.converged},
          {"wall_time", r.wall_time}};
}

json to_json(const CellSummary& c) {
  return {{"n", c.n},
          {"k", c.k},
          {"ratio", c.ratio},
          {"trials", c.trials},
          {"mean_mse_s", c.mean_mse_s},
          {"mean_mse_a", c.mean_mse_a},
          {"median_mse_a", c.median_mse_a},
          {"mean_rmse", c.mean_rmse},
          {"median_rmse", c.median_rmse},
          {"mean_iterations", c.mean_iterations},
          {"success_rate", c.success_rate}};
}

// ---------------------------------------------------------------------------

struct GenerateArgs {
  long n = 0;
  long k = 2;
  std::string fixed;
  double ratio = 1.0;
  double rho = 0.0;
  double noise = 0.0;
  std::uint64_t seed = 0;
  std::string out;
};

int cmd_generate(const GenerateArgs& a) {
  prepare_out_dir(a.out);
  Scenario s;
  if (!a.fixed.empty()) {
    if (a.fixed != "fig1") throw Error(ErrorKind::InvalidArgument, "unknown fixed layout '" + a.fixed + "'");
    s = scenario_from_coordinates(figure1_coordinates(), a.seed);
    if ((a.n && a.n != s.n) || a.k != s.k) {
      throw Error(ErrorKind::InvalidArgument, "layout fig1 has n=5, k=2");
    }
  } else {
    s = generate_scenario(a.n, a.k, a.seed);
  }
  SamplingSpec spec;
  spec.ratio = a.ratio;
  spec.noise_sigma = a.noise;
  if (a.rho > 0.0) {
    spec.model = SamplingModel::RadioRange;
    spec.rho = a.rho;
  }
  // Sampling draws from a seed stream separate from the layout.
  ObservedDistances obs = sample_observations(s, spec, derive_seed(a.seed, 2));
  obs.seed = a.seed;

  const fs::path dir = a.out;
  io::write_file_atomic(dir / "coords.csv", render([&](auto& os) { io::write_matrix_csv(os, s.coords); }));
  io::write_file_atomic(dir / "edm.csv", render([&](auto& os) { io::write_matrix_csv(os, s.d_true.mat()); }));
  io::write_file_atomic(dir / "observations.txt", render([&](auto& os) { io::write_observations(os, obs); }));
  log(LogLevel::Info, "wrote scenario n=" + std::to_string(s.n) + " k=" + std::to_string(s.k) + " with " +
                          std::to_string(obs.e.pairs().size()) + " observed pairs to " + dir.string());
  return kOk;
}

// ---------------------------------------------------------------------------

struct CompleteArgs {
  std::string obs;
  long k = 0;
  int max_iters = 500;
  double eps = -1.0;
  std::string beta = "pr+";
  std::string init = "spectral";
  std::uint64_t seed = 0;
  std::string truth_edm;
  std::string out;
  std::string format = "csv";
};

int cmd_complete(const CompleteArgs& a) {
  prepare_out_dir(a.out);
  const ObservedDistances obs = io::load_observations(a.obs);
  std::optional<Matrix> truth;
  if (!a.truth_edm.empty()) {
    truth = io::load_matrix_csv(a.truth_edm);
    if (truth->rows() != obs.n() || truth->cols() != obs.n()) {
      throw Error(ErrorKind::InvalidDimension, "truth EDM does not match observation size");
    }
  }

  SolverConfig cfg;
  cfg.k = a.k > 0 ? a.k : obs.k;
  if (cfg.k < 1) throw Error(ErrorKind::InvalidArgument, "embedding dimension unknown: pass --k");
  cfg.max_iters = a.max_iters;
  if (a.eps >= 0.0) cfg.epsilon = a.eps;
  cfg.beta_rule = beta_rule_from_string(a.beta);
  if (a.init == "random") {
    cfg.init = InitMode::Random;
  } else if (a.init != "spectral") {
    throw Error(ErrorKind::InvalidArgument, "unknown init '" + a.init + "'");
  }
  cfg.seed = a.seed;

  const double e_size = static_cast<double>(obs.e.directed_size());
  std::vector<double> mse_s_trace;
  IterationObserver observer;
  if (truth) {
    observer = [&](const IterationRecord&, const ManifoldPoint& y) {
      const Matrix diff = edm_from_gram(to_ambient(y)).mat() - *truth;
      mse_s_trace.push_back(diff.cwiseProduct(obs.e.indicator()).squaredNorm() / e_size);
    };
  }
  const SolverReport report = solve(obs, cfg, std::nullopt, observer);
  if (log_level() == LogLevel::Trace) {
    for (const auto& r : report.trace) {
      log(LogLevel::Trace, "iter " + std::to_string(r.iter) + " f=" + io::format_double(r.f) +
                               " alpha=" + io::format_double(r.alpha) + " backtracks=" + std::to_string(r.backtracks));
    }
  }

  const LocationMap map = extract_coordinates(report.estimate);
  const SymmetricMatrix d_hat = edm_from_gram(to_ambient(report.estimate));
  const fs::path dir = a.out;
  io::write_file_atomic(dir / "coords.csv", render([&](auto& os) { io::write_matrix_csv(os, map.coords); }));
  io::write_file_atomic(dir / "edm.csv", render([&](auto& os) { io::write_matrix_csv(os, d_hat.mat()); }));

  if (a.format == "json") {
    json rows = json::array();
    for (std::size_t i = 0; i < report.trace.size(); ++i) {
      const auto& r = report.trace[i];
      json row = {{"iter", r.iter}, {"f", r.f}, {"grad_norm", r.grad_norm}, {"alpha", r.alpha},
                  {"beta", r.beta}, {"backtracks", r.backtracks}};
      if (truth) row["mse_s"] = mse_s_trace[i];
      rows.push_back(row);
    }
    io::write_file_atomic(dir / "trace.json", rows.dump(2) + "\n");
  } else {
    io::write_file_atomic(dir / "trace.csv", render([&](auto& os) {
      os << "iter,f" << (truth ? ",mse_s" : "") << ",grad_norm,alpha,beta,backtracks\n";
      for (std::size_t i = 0; i < report.trace.size(); ++i) {
        const auto& r = report.trace[i];
        os << r.iter << ',' << io::format_double(r.f);
        if (truth) os << ',' << io::format_double(mse_s_trace[i]);
        os << ',' << io::format_double(r.grad_norm) << ',' << io::format_double(r.alpha) << ','
           << io::format_double(r.beta) << ',' << r.backtracks << '\n';
      }
    }));
  }

  const json summary = {{"n", obs.n()},
                        {"k", cfg.k},
                        {"iterations", report.iterations},
                        {"converged", report.converged},
                        {"status", to_string(report.status)},
                        {"initial_residual", report.initial_residual},
                        {"final_residual", report.final_residual},
                        {"epsilon", report.epsilon},
                        {"beta_rule", to_string(cfg.beta_rule)}};
  io::write_file_atomic(dir / "summary.json", summary.dump(2) + "\n");
  std::cout << summary.dump() << '\n';

  if (!report.converged) {
    log(LogLevel::Info, std::string("solver stopped without converging (") + to_string(report.status) + ")");
    return kNoConvergence;
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct EvaluateArgs {
  std::string estimate;
  std::string truth_coords;
  std::string obs;
  std::string out;
  std::string format = "json";
};

int cmd_evaluate(const EvaluateArgs& a) {
  if (!a.out.empty()) prepare_out_dir(fs::path(a.out).parent_path().empty() ? "." : fs::path(a.out).parent_path());
  const Matrix d_hat = io::load_matrix_csv(a.estimate);
  const Scenario s = scenario_from_coordinates(io::load_matrix_csv(a.truth_coords));
  const ObservedDistances obs = io::load_observations(a.obs);
  const EvalResult r = evaluate(SymmetricMatrix(d_hat), s, obs);

  std::string text;
  if (a.format == "csv") {
    text = "mse_s,mse_a,rmse,rmse_position\n" + io::format_double(r.mse_s) + "," + io::format_double(r.mse_a) + "," +
           io::format_double(r.rmse) + "," + io::format_double(r.rmse_position) + "\n";
  } else {
    json j = to_json(r);
    j.erase("iterations");
    j.erase("converged");
    j.erase("wall_time");
    text = j.dump() + "\n";
  }
  if (a.out.empty()) {
    std::cout << text;
  } else {
    io::write_file_atomic(a.out, text);
  }
  return kOk;
}

// ---------------------------------------------------------------------------

struct SweepArgs {
  std::string n = "200";
  std::string k = "2";
  std::string ratios = "0.05,0.1,0.15,0.2,0.25,0.3,0.35,0.4,0.45,0.5";
  int trials = 20;
  std::string beta = "pr+";
  int max_iters = 1000;
  double noise = 0.0;
  std::uint64_t seed = 0;
  unsigned jobs = 0;
  bool no_traces = false;
  std::string out;
  std::string format = "csv";
};

int cmd_sweep(const SweepArgs& a) {
  prepare_out_dir(a.out);
  SweepGrid grid;
  for (double v : parse_list(a.n)) grid.n_values.push_back(static_cast<Index>(v));
  for (double v : parse_list(a.k)) grid.k_values.push_back(static_cast<Index>(v));
  grid.ratios = parse_list(a.ratios);
  grid.trials = a.trials;
  grid.beta_rule = beta_rule_from_string(a.beta);
  grid.master_seed = a.seed;
  grid.record_traces = !a.no_traces;
  grid.noise_sigma = a.noise;
  SolverConfig cfg;
  cfg.max_iters = a.max_iters;

  log(LogLevel::Info, "running sweep of " +
                          std::to_string(grid.n_values.size() * grid.k_values.size() * grid.ratios.size()) +
                          " cells x " + std::to_string(grid.trials) + " trials");
  const SweepResult res = run_sweep(grid, cfg, a.jobs);
  const fs::path dir = a.out;

  if (a.format == "json") {
    json trials = json::array();
    for (const auto& t : res.trials) {
      json row = to_json(t.eval);
      row.update({{"n", t.n}, {"k", t.k}, {"ratio", t.ratio}, {"trial", t.trial}, {"seed", t.seed},
                  {"status", to_string(t.status)}});
      trials.push_back(row);
    }
    json cells = json::array();
    for (const auto& c : res.cells) cells.push_back(to_json(c));
    io::write_file_atomic(dir / "results.json", json{{"trials", trials}, {"aggregates", cells}}.dump(2) + "\n");
  } else {
    io::write_file_atomic(dir / "results.csv", render([&](auto& os) {
      os << "row_type,n,k,ratio,trial,seed,status,mse_s,mse_a,rmse,rmse_position,iterations,converged,wall_time,"
            "success_rate\n";
      auto num = [](double x) { return io::format_double(x); };
      for (const auto& t : res.trials) {
        os << "trial," << t.n << ',' << t.k << ',' << num(t.ratio) << ',' << t.trial << ',' << t.seed << ','
           << to_string(t.status) << ',' << num(t.eval.mse_s) << ',' << num(t.eval.mse_a) << ','
           << num(t.eval.rmse) << ',' << num(t.eval.rmse_position) << ',' << t.eval.iterations << ','
           << (t.eval.converged ? 1 : 0) << ',' << num(t.eval.wall_time) << ",\n";
      }
      for (const auto& c : res.cells) {
        os << "aggregate," << c.n << ',' << c.k << ',' << num(c.ratio) << ",,,," << num(c.mean_mse_s) << ','
           << num(c.mean_mse_a) << ',' << num(c.mean_rmse) << ",," << num(c.mean_iterations) << ",,,"
           << num(c.success_rate) << '\n';
      }
    }));
  }
  if (grid.record_traces) {
    io::write_file_atomic(dir / "traces.csv", render([&](auto& os) {
      os << "n,k,ratio,trial,iter,f,mse_s,mse_a\n";
      for (const auto& t : res.trials)
        for (const auto& p : t.trace)
          os << t.n << ',' << t.k << ',' << io::format_double(t.ratio) << ',' << t.trial << ',' << p.iter << ','
             << io::format_double(p.f) << ',' << io::format_double(p.mse_s) << ',' << io::format_double(p.mse_a)
             << '\n';
    }));
  }
  json summary = json::array();
  for (const auto& c : res.cells) summary.push_back(to_json(c));
  std::cout << summary.dump() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Euclidean distance matrix completion for sensor localization"};
  app.require_subcommand(1);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Generate a sensor layout and sampled observations");
  generate->add_option("--n", gen.n, "Number of nodes")->check(CLI::PositiveNumber);
  generate->add_option("--k", gen.k, "Embedding dimension")->check(CLI::PositiveNumber);
  generate->add_option("--fixed", gen.fixed, "Use a fixed layout instead of a random one (fig1)");
  auto* ratio_opt = generate->add_option("--ratio", gen.ratio, "Fraction of node pairs observed");
  generate->add_option("--rho", gen.rho, "Observe all pairs within this radio range")->excludes(ratio_opt);
  generate->add_option("--noise", gen.noise, "Std. deviation of additive noise on squared distances");
  generate->add_option("--seed", gen.seed, "Random seed");
  generate->add_option("--out", gen.out, "Output directory")->required();

  CompleteArgs comp;
  auto* complete = app.add_subcommand("complete", "Complete an observed distance matrix");
  complete->add_option("--obs", comp.obs, "Observation file")->required()->check(CLI::ExistingFile);
  complete->add_option("--k", comp.k, "Embedding dimension (default: from file header)");
  complete->add_option("--max-iters", comp.max_iters, "Iteration limit")->check(CLI::NonNegativeNumber);
  complete->add_option("--eps", comp.eps, "Absolute residual tolerance (default: relative 1e-6)");
  complete->add_option("--beta", comp.beta, "Conjugate update rule: pr+, fr or sd");
  complete->add_option("--init", comp.init, "Initialization: spectral or random");
  complete->add_option("--seed", comp.seed, "Seed for random initialization");
  complete->add_option("--truth-edm", comp.truth_edm, "Ground-truth EDM CSV for the MSE_s trace")
      ->check(CLI::ExistingFile);
  complete->add_option("--out", comp.out, "Output directory")->required();
  complete->add_option("--format", comp.format, "Trace format")->check(CLI::IsMember({"csv", "json"}));

  EvaluateArgs ev;
  auto* evaluate_cmd = app.add_subcommand("evaluate", "Score a completed EDM against ground truth");
  evaluate_cmd->add_option("--estimate", ev.estimate, "Estimated EDM CSV")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--truth-coords", ev.truth_coords, "Ground-truth coordinates CSV")
      ->required()
      ->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--obs", ev.obs, "Observation file")->required()->check(CLI::ExistingFile);
  evaluate_cmd->add_option("--out", ev.out, "Output file (default: stdout)");
  evaluate_cmd->add_option("--format", ev.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Multi-trial sweep over n, k and sampling ratio");
  sweep->add_option("--n", sw.n, "Comma-separated node counts");
  sweep->add_option("--k", sw.k, "Comma-separated dimensions");
  sweep->add_option("--ratios", sw.ratios, "Comma-separated sampling ratios");
  sweep->add_option("--trials", sw.trials, "Trials per cell")->check(CLI::PositiveNumber);
  sweep->add_option("--beta", sw.beta, "Conjugate update rule: pr+, fr or sd");
  sweep->add_option("--max-iters", sw.max_iters, "Iteration limit per solve")->check(CLI::NonNegativeNumber);
  sweep->add_option("--noise", sw.noise, "Std. deviation of additive noise on squared distances");
  sweep->add_option("--seed", sw.seed, "Master seed");
  sweep->add_option("--jobs", sw.jobs, "Worker threads (0: all processors)");
  sweep->add_flag("--no-traces", sw.no_traces, "Skip per-iteration traces");
  sweep->add_option("--out", sw.out, "Output directory")->required();
  sweep->add_option("--format", sw.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (generate->parsed()) {
      if (gen.fixed.empty() && gen.n == 0) throw Error(ErrorKind::InvalidArgument, "--n is required");
      return cmd_generate(gen);
    }
    if (complete->parsed()) return cmd_complete(comp);
    if (evaluate_cmd->parsed()) return cmd_evaluate(ev);
    if (sweep->parsed()) return cmd_sweep(sw);
  } catch (const Error& e) {
    std::cerr << "edmc: " << e.what() << '\n';
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "edmc: " << e.what() << '\n';
    return kIo;
  }
  return kUsage;
}
