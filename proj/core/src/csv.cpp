#include "kexpfam/csv.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <vector>

#include "kexpfam/errors.hpp"

namespace kexpfam {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front())))
    s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back())))
    s.remove_suffix(1);
  return s;
}

bool parse_double(std::string_view field, double& out) {
  field = trim(field);
  if (field.empty()) return false;
  // strtod accepts leading '+', exponents, inf/nan; require full consumption.
  std::string buf(field);
  char* end = nullptr;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size();
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      fields.push_back(line.substr(start));
      return fields;
    }
    fields.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

Mat load_samples_csv(std::istream& in, const std::string& display_name) {
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  int width = -1;
  bool first_content_line = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;  // skip blank lines
    const auto fields = split_fields(line);

    std::vector<double> row;
    row.reserve(fields.size());
    bool all_numeric = true;
    std::string_view bad_field;
    for (const auto& field : fields) {
      double value = 0.0;
      if (!parse_double(field, value)) {
        all_numeric = false;
        bad_field = field;
        break;
      }
      row.push_back(value);
    }

    if (!all_numeric) {
      if (first_content_line) {
        first_content_line = false;  // header row: skip
        continue;
      }
      throw ConfigError(display_name + ":" + std::to_string(line_no) +
                        ": cannot parse field '" + std::string(trim(bad_field)) +
                        "' as a number");
    }
    first_content_line = false;

    for (std::size_t k = 0; k < row.size(); ++k)
      if (!std::isfinite(row[k]))
        throw ConfigError(display_name + ":" + std::to_string(line_no) +
                          ": non-finite value in column " + std::to_string(k + 1));
    if (width < 0) {
      width = static_cast<int>(row.size());
    } else if (static_cast<int>(row.size()) != width) {
      throw ConfigError(display_name + ":" + std::to_string(line_no) +
                        ": expected " + std::to_string(width) +
                        " fields, got " + std::to_string(row.size()));
    }
    rows.push_back(std::move(row));
  }
  if (rows.empty())
    throw ConfigError(display_name + ": no data rows in input");

  Mat samples(static_cast<Eigen::Index>(rows.size()), width);
  for (std::size_t a = 0; a < rows.size(); ++a)
    for (int k = 0; k < width; ++k)
      samples(static_cast<Eigen::Index>(a), k) = rows[a][k];
  return samples;
}

Mat load_samples_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open samples file '" + path + "'");
  return load_samples_csv(in, path);
}

std::string format_double(double value) {
  char buf[64];
  const auto result = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, result.ptr);
}

void save_samples_csv(std::ostream& out, const Mat& samples) {
  for (Eigen::Index a = 0; a < samples.rows(); ++a) {
    for (Eigen::Index k = 0; k < samples.cols(); ++k) {
      if (k) out << ',';
      out << format_double(samples(a, k));
    }
    out << '\n';
  }
}

void save_samples_csv(const std::string& path, const Mat& samples) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open output file '" + path + "'");
  save_samples_csv(out, samples);
}

}  // namespace kexpfam
