#pragma once

// Plain-text dataset and coefficient files.
//
// Dataset file:
//   m q p model
//   y z_1 .. z_p X_11 X_12 .. X_mq      (one sample per line, X row-major)
//
// Coefficient file (truth sidecar or estimate):
//   m q p coefficients
//   gamma_1 .. gamma_p C_11 C_12 .. C_mq
//
// Reals are written with 17 significant digits, so a write/read round trip
// reproduces every double exactly.

#include <iosfwd>
#include <string>

#include "lrmr/models.hpp"

namespace lrmr {

/// Shortest "%.17g" rendering of a double.
std::string format_real(double v);

void write_dataset(std::ostream& out, const Dataset& data);
Dataset read_dataset(std::istream& in);

void write_coefficients(std::ostream& out, const Coefficients& coeff);
Coefficients read_coefficients(std::istream& in);

/// File variants; IoError when the file cannot be opened or written.
void save_dataset(const std::string& path, const Dataset& data);
Dataset load_dataset(const std::string& path);
void save_coefficients(const std::string& path, const Coefficients& coeff);
Coefficients load_coefficients(const std::string& path);

/// Writes `text` to `path` through a temporary file renamed into place, so a
/// failed run never leaves partial output behind.
void write_file_atomic(const std::string& path, const std::string& text);

}  // namespace lrmr
