#include "edmc/harness.hpp"
#include "edmc/io.hpp"
#include "edmc/rng.hpp"

#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

using namespace edmc;
namespace fs = std::filesystem;

namespace {

const fs::path kWork = fs::temp_directory_path() / "edmc_cli_test";

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(const std::string& args) {
  const fs::path out = kWork / "stdout.txt";
  const fs::path err = kWork / "stderr.txt";
  const std::string cmd = std::string(EDMC_BINARY) + " " + args + " >" + out.string() + " 2>" + err.string();
  const int status = std::system(cmd.c_str());
  return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, io::read_file(out), io::read_file(err)};
}

std::string path(const std::string& rel) { return (kWork / rel).string(); }

int count_lines_starting(const std::string& text, const std::string& prefix) {
  std::istringstream ss(text);
  int n = 0;
  for (std::string line; std::getline(ss, line);) n += line.rfind(prefix, 0) == 0;
  return n;
}

struct Workdir {
  Workdir() {
    fs::remove_all(kWork);
    fs::create_directories(kWork);
  }
};

}  // namespace

TEST_CASE_FIXTURE(Workdir, "generate") {
  SUBCASE("five-sensor layout writes the printed distances") {
    const Run r = run("generate --fixed fig1 --ratio 1.0 --out " + path("g"));
    CHECK(r.code == 0);
    const std::string obs = io::read_file(path("g/observations.txt"));
    CHECK(obs.find("\n1 2 29\n") != std::string::npos);
    CHECK(fs::exists(path("g/coords.csv")));
    CHECK(fs::exists(path("g/edm.csv")));
  }
  SUBCASE("byte-identical reruns") {
    REQUIRE(run("generate --n 200 --k 2 --ratio 0.3 --seed 7 --out " + path("a")).code == 0);
    REQUIRE(run("generate --n 200 --k 2 --ratio 0.3 --seed 7 --out " + path("b")).code == 0);
    for (const char* f : {"observations.txt", "coords.csv", "edm.csv"}) {
      CHECK(io::read_file(path(std::string("a/") + f)) == io::read_file(path(std::string("b/") + f)));
    }
  }
  SUBCASE("file matches the in-memory observations exactly") {
    REQUIRE(run("generate --n 60 --k 2 --ratio 0.25 --seed 11 --out " + path("m")).code == 0);
    const Scenario s = generate_scenario(60, 2, 11);
    SamplingSpec spec;
    spec.ratio = 0.25;
    const ObservedDistances expected = sample_observations(s, spec, derive_seed(11, 2));
    const ObservedDistances loaded = io::load_observations(path("m/observations.txt"));
    CHECK(loaded.e.pairs() == expected.e.pairs());
    CHECK(loaded.values.mat() == expected.values.mat());
    CHECK(io::load_matrix_csv(path("m/coords.csv")) == s.coords);
  }
  SUBCASE("empty sample") {
    const Run r = run("generate --n 10 --ratio 0 --out " + path("z"));
    CHECK(r.code == 2);
    CHECK(r.err.find("EmptySample") != std::string::npos);
    CHECK_FALSE(fs::exists(path("z/observations.txt")));
  }
  SUBCASE("usage errors") {
    CHECK(run("").code == 2);
    CHECK(run("generate --n 10").code == 2);
    CHECK(run("bogus").code == 2);
  }
}

TEST_CASE_FIXTURE(Workdir, "complete") {
  REQUIRE(run("generate --fixed fig1 --ratio 1.0 --out " + path("g")).code == 0);
  SUBCASE("full observation reproduces the input") {
    const Run r = run("complete --obs " + path("g/observations.txt") + " --truth-edm " + path("g/edm.csv") +
                      " --out " + path("c"));
    CHECK(r.code == 0);
    const Matrix d_hat = io::load_matrix_csv(path("c/edm.csv"));
    const Matrix d = io::load_matrix_csv(path("g/edm.csv"));
    CHECK((d_hat - d).cwiseAbs().maxCoeff() < 1e-8);
    CHECK(io::load_matrix_csv(path("c/coords.csv")).rows() == 5);
    CHECK(io::read_file(path("c/trace.csv")).rfind("iter,f,mse_s,grad_norm,alpha,beta,backtracks", 0) == 0);
    CHECK(r.out.find("\"converged\":true") != std::string::npos);
  }
  SUBCASE("zero iterations writes the initialization") {
    const Run r = run("complete --obs " + path("g/observations.txt") + " --max-iters 0 --out " + path("c0"));
    CHECK(r.code == 0);  // the spectral start is already exact here
    CHECK(fs::exists(path("c0/edm.csv")));
    CHECK(r.out.find("\"iterations\":0") != std::string::npos);
  }
  SUBCASE("malformed observation line") {
    std::ofstream(path("bad.txt")) << "5 2 1 0\n1 2 29\n1 3\n";
    const Run r = run("complete --obs " + path("bad.txt") + " --out " + path("cb"));
    CHECK(r.code == 3);
    CHECK(r.err.find("line 3") != std::string::npos);
    CHECK_FALSE(fs::exists(path("cb/edm.csv")));
  }
  SUBCASE("non-convergence has its own exit code") {
    REQUIRE(run("generate --n 100 --k 2 --ratio 0.2 --seed 3 --out " + path("s")).code == 0);
    const Run r = run("complete --obs " + path("s/observations.txt") + " --max-iters 1 --out " + path("cs"));
    CHECK(r.code == 4);
    CHECK(fs::exists(path("cs/trace.csv")));
  }
  SUBCASE("json trace") {
    const Run r = run("complete --obs " + path("g/observations.txt") + " --format json --out " + path("cj"));
    CHECK(r.code == 0);
    CHECK(fs::exists(path("cj/trace.json")));
  }
  SUBCASE("unwritable output") {
    std::ofstream(path("plainfile")) << "x";
    const Run r = run("complete --obs " + path("g/observations.txt") + " --out " + path("plainfile/sub"));
    CHECK(r.code == 5);
  }
}

TEST_CASE_FIXTURE(Workdir, "evaluate") {
  REQUIRE(run("generate --n 20 --k 2 --ratio 0.5 --seed 4 --out " + path("g")).code == 0);
  const Run r = run("evaluate --estimate " + path("g/edm.csv") + " --truth-coords " + path("g/coords.csv") +
                    " --obs " + path("g/observations.txt") + " --format csv");
  CHECK(r.code == 0);
  std::istringstream ss(r.out);
  std::string header, row;
  std::getline(ss, header);
  std::getline(ss, row);
  CHECK(header == "mse_s,mse_a,rmse,rmse_position");
  std::istringstream cells(row);
  std::string cell;
  std::getline(cells, cell, ',');
  CHECK(std::stod(cell) == 0.0);
  std::getline(cells, cell, ',');
  CHECK(std::stod(cell) == 0.0);
  std::getline(cells, cell, ',');
  CHECK(std::stod(cell) == 0.0);
  std::getline(cells, cell, ',');
  CHECK(std::stod(cell) < 1e-10);
}

TEST_CASE_FIXTURE(Workdir, "sweep") {
  const Run r = run("sweep --n 40 --k 2 --ratios 0.5 --trials 2 --seed 9 --jobs 1 --out " + path("sw"));
  CHECK(r.code == 0);
  const std::string table = io::read_file(path("sw/results.csv"));
  CHECK(count_lines_starting(table, "trial,") == 2);
  CHECK(count_lines_starting(table, "aggregate,") == 1);
  CHECK(count_lines_starting(io::read_file(path("sw/traces.csv")), "40,2,0.5,") >= 2);

  const Run j = run("sweep --n 40 --k 2 --ratios 0.5 --trials 2 --seed 9 --format json --no-traces --out " +
                    path("swj"));
  CHECK(j.code == 0);
  CHECK(fs::exists(path("swj/results.json")));
  CHECK_FALSE(fs::exists(path("swj/traces.csv")));
}
