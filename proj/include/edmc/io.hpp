#pragma once

// Text formats. Numbers are written with 17 significant digits so that
// parsing a printed double returns the same bits.

#include "edmc/harness.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>

namespace edmc::io {

std::string format_double(double x);

/// Header "n k ratio seed", then "i j value" per unordered pair, 1-based,
/// i < j, pairs in ascending order.
void write_observations(std::ostream& os, const ObservedDistances& obs);
ObservedDistances read_observations(std::istream& is);

/// Row-major CSV without header.
void write_matrix_csv(std::ostream& os, const Matrix& m);
Matrix read_matrix_csv(std::istream& is);

/// Writes via a temporary sibling file and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);
std::string read_file(const std::filesystem::path& path);

ObservedDistances load_observations(const std::filesystem::path& path);
Matrix load_matrix_csv(const std::filesystem::path& path);

}  // namespace edmc::io
