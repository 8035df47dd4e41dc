#pragma once

#include <iosfwd>
#include <string>

#include "kexpfam/types.hpp"

namespace kexpfam {

// Loads a rectangular numeric CSV into an n x d matrix, preserving row
// order. A single header row is auto-detected (any non-numeric field in the
// first line) and skipped. Ragged rows, non-numeric or non-finite cells, and
// inputs without data rows raise ConfigError with the offending line number.
Mat load_samples_csv(const std::string& path);
Mat load_samples_csv(std::istream& in, const std::string& display_name);

// Full-precision writer (round-trips doubles exactly).
void save_samples_csv(const std::string& path, const Mat& samples);
void save_samples_csv(std::ostream& out, const Mat& samples);

// Shortest representation of a double that parses back to the same value.
std::string format_double(double value);

}  // namespace kexpfam
