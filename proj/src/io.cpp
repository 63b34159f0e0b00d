#include "edmc/io.hpp"

#include "edmc/error.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

namespace edmc::io {

namespace fs = std::filesystem;

std::string format_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

namespace {

[[noreturn]] void parse_error(std::size_t line, const std::string& what) {
  throw Error(ErrorKind::Parse, "line " + std::to_string(line) + ": " + what);
}

std::vector<std::string> split_ws(const std::string& line) {
  std::istringstream ss(line);
  std::vector<std::string> out;
  for (std::string tok; ss >> tok;) out.push_back(tok);
  return out;
}

template <typename T>
bool parse_number(const std::string& tok, T& out) {
  const char* end = tok.data() + tok.size();
  auto [ptr, ec] = std::from_chars(tok.data(), end, out);
  return ec == std::errc() && ptr == end;
}

bool blank_or_comment(const std::string& line) {
  const auto pos = line.find_first_not_of(" \t\r");
  return pos == std::string::npos || line[pos] == '#';
}

}  // namespace

void write_observations(std::ostream& os, const ObservedDistances& obs) {
  os << obs.n() << ' ' << obs.k << ' ' << format_double(obs.sampling_ratio) << ' ' << obs.seed << '\n';
  for (auto [i, j] : obs.e.pairs()) {
    os << (i + 1) << ' ' << (j + 1) << ' ' << format_double(obs.values(i, j)) << '\n';
  }
}

ObservedDistances read_observations(std::istream& is) {
  std::string line;
  std::size_t lineno = 0;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    header = split_ws(line);
    break;
  }
  if (header.empty()) parse_error(lineno, "missing header 'n k ratio seed'");
  if (header.size() != 4) parse_error(lineno, "header must have 4 fields 'n k ratio seed'");
  long long n = 0, k = 0;
  double ratio = 0.0;
  unsigned long long seed = 0;
  if (!parse_number(header[0], n) || n < 1) parse_error(lineno, "invalid n '" + header[0] + "'");
  if (!parse_number(header[1], k) || k < 0) parse_error(lineno, "invalid k '" + header[1] + "'");
  if (!parse_number(header[2], ratio)) parse_error(lineno, "invalid ratio '" + header[2] + "'");
  if (!parse_number(header[3], seed)) parse_error(lineno, "invalid seed '" + header[3] + "'");

  std::vector<SampleSet::Pair> pairs;
  Matrix values = Matrix::Zero(n, n);
  while (std::getline(is, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    const auto tok = split_ws(line);
    long long i = 0, j = 0;
    double v = 0.0;
    if (tok.size() != 3 || !parse_number(tok[0], i) || !parse_number(tok[1], j) || !parse_number(tok[2], v)) {
      parse_error(lineno, "expected 'i j value', got '" + line + "'");
    }
    if (i < 1 || j < 1 || i > n || j > n) parse_error(lineno, "index out of range 1.." + std::to_string(n));
    if (i == j) parse_error(lineno, "diagonal entries cannot be observations");
    pairs.emplace_back(i - 1, j - 1);
    values(i - 1, j - 1) = values(j - 1, i - 1) = v;
  }

  ObservedDistances obs;
  obs.e = SampleSet(n, pairs);
  if (obs.e.pairs().size() != pairs.size()) parse_error(lineno, "duplicate pair in observation list");
  obs.values = SymmetricMatrix(values);
  obs.sampling_ratio = ratio;
  obs.k = k;
  obs.seed = seed;
  return obs;
}

void write_matrix_csv(std::ostream& os, const Matrix& m) {
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) os << ',';
      os << format_double(m(i, j));
    }
    os << '\n';
  }
}

Matrix read_matrix_csv(std::istream& is) {
  std::vector<std::vector<double>> rows;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    if (blank_or_comment(line)) continue;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<double> row;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) {
      const auto b = cell.find_first_not_of(" \t");
      const auto e = cell.find_last_not_of(" \t");
      cell = b == std::string::npos ? std::string() : cell.substr(b, e - b + 1);
      double v = 0.0;
      if (!parse_number(cell, v)) parse_error(lineno, "invalid number '" + cell + "'");
      row.push_back(v);
    }
    if (!rows.empty() && row.size() != rows.front().size()) parse_error(lineno, "ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) parse_error(lineno, "empty matrix");
  Matrix m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(static_cast<Index>(i), static_cast<Index>(j)) = rows[i][j];
  return m;
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Io, "cannot open '" + tmp.string() + "' for writing");
    out << contents;
    out.flush();
    if (!out) {
      std::error_code ignored;
      fs::remove(tmp, ignored);
      throw Error(ErrorKind::Io, "write failed for '" + tmp.string() + "'");
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw Error(ErrorKind::Io, "cannot move '" + tmp.string() + "' into place: " + ec.message());
  }
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

ObservedDistances load_observations(const fs::path& path) {
  std::istringstream ss(read_file(path));
  try {
    return read_observations(ss);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

Matrix load_matrix_csv(const fs::path& path) {
  std::istringstream ss(read_file(path));
  try {
    return read_matrix_csv(ss);
  } catch (const Error& e) {
    throw Error(e.kind(), path.string() + ": " + e.detail());
  }
}

}  // namespace edmc::io
