#include "latentgeo/table_io.hpp"

#include "latentgeo/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

namespace latentgeo {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    fields.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return fields;
}

// Non-blank lines with their 1-based line numbers.
std::vector<std::pair<std::size_t, std::string>> read_lines(std::istream& in) {
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string line;
  std::size_t number = 0;
  while (std::getline(in, line)) {
    ++number;
    if (!trim(line).empty()) lines.emplace_back(number, line);
  }
  return lines;
}

double field_number(std::string_view text, std::size_t line) {
  try {
    return parse_number(text);
  } catch (const FormatError& e) {
    throw FormatError("line " + std::to_string(line) + ": " + e.what());
  }
}

// Expects names prefix_1..prefix_n at fields[first..first+n).
bool numbered_columns(const std::vector<std::string_view>& fields, std::size_t first,
                      std::size_t n, std::string_view prefix) {
  for (std::size_t k = 0; k < n; ++k) {
    const std::string expected = std::string(prefix) + "_" + std::to_string(k + 1);
    if (fields[first + k] != expected) return false;
  }
  return true;
}

std::ifstream open(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) throw IoError("cannot open " + file.string());
  return in;
}

}  // namespace

std::string format_number(double v) {
  char buf[64];
  const auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw std::runtime_error("number formatting failed");
  return std::string(buf, end);
}

double parse_number(std::string_view text) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto [end, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || ec != std::errc{} || end != text.data() + text.size()) {
    throw FormatError("not a number: \"" + std::string(text) + "\"");
  }
  if (!std::isfinite(v)) throw FormatError("non-finite number \"" + std::string(text) + "\"");
  return v;
}

Vector parse_vector(std::string_view text) {
  const auto fields = split(text);
  Vector v(static_cast<Index>(fields.size()));
  for (std::size_t k = 0; k < fields.size(); ++k) v(static_cast<Index>(k)) = parse_number(fields[k]);
  return v;
}

void write_path_csv(std::ostream& out, const DiscretePath& path) {
  out << 't';
  for (Index k = 0; k < path.dimension(); ++k) out << ",z_" << k + 1;
  out << '\n';
  for (std::size_t i = 0; i < path.size(); ++i) {
    out << format_number(static_cast<double>(i) * path.dt());
    for (Index k = 0; k < path.dimension(); ++k) out << ',' << format_number(path[i](k));
    out << '\n';
  }
}

DiscretePath read_path_csv(std::istream& in) {
  const auto lines = read_lines(in);
  if (lines.empty()) throw FormatError("path file is empty");
  const auto header = split(lines[0].second);
  if (header.size() < 2 || header[0] != "t" || !numbered_columns(header, 1, header.size() - 1, "z")) {
    throw FormatError("path header must be t,z_1,...,z_d");
  }
  const std::size_t dim = header.size() - 1;
  std::vector<LatentPoint> points;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split(lines[r].second);
    if (fields.size() != header.size()) {
      throw FormatError("line " + std::to_string(lines[r].first) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    field_number(fields[0], lines[r].first);
    LatentPoint z(static_cast<Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
      z(static_cast<Index>(k)) = field_number(fields[k + 1], lines[r].first);
    }
    points.push_back(std::move(z));
  }
  if (points.size() < 2) throw FormatError("path needs at least two rows");
  return DiscretePath(std::move(points));
}

void write_points_csv(std::ostream& out, const std::vector<Vector>& points,
                      const std::vector<std::string>& labels, std::string_view prefix) {
  if (points.empty()) throw std::invalid_argument("no points to write");
  if (!labels.empty() && labels.size() != points.size()) {
    throw DimensionError("label count does not match point count");
  }
  const Index dim = points.front().size();
  for (Index k = 0; k < dim; ++k) out << (k ? "," : "") << prefix << '_' << k + 1;
  if (!labels.empty()) out << ",label";
  out << '\n';
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i].size() != dim) throw DimensionError("points differ in dimension");
    for (Index k = 0; k < dim; ++k) out << (k ? "," : "") << format_number(points[i](k));
    if (!labels.empty()) out << ',' << labels[i];
    out << '\n';
  }
}

PointTable read_points_csv(std::istream& in) {
  const auto lines = read_lines(in);
  if (lines.empty()) throw FormatError("point file is empty");
  const auto header = split(lines[0].second);
  const bool labelled = header.back() == "label";
  const std::size_t dim = header.size() - (labelled ? 1 : 0);
  if (dim == 0 || (!numbered_columns(header, 0, dim, "x") && !numbered_columns(header, 0, dim, "z"))) {
    throw FormatError("point header must be x_1,...,x_D with an optional label column");
  }
  PointTable table;
  for (std::size_t r = 1; r < lines.size(); ++r) {
    const auto fields = split(lines[r].second);
    if (fields.size() != header.size()) {
      throw FormatError("line " + std::to_string(lines[r].first) + ": expected " +
                        std::to_string(header.size()) + " fields");
    }
    Vector x(static_cast<Index>(dim));
    for (std::size_t k = 0; k < dim; ++k) {
      x(static_cast<Index>(k)) = field_number(fields[k], lines[r].first);
    }
    table.points.push_back(std::move(x));
    if (labelled) table.labels.emplace_back(fields.back());
  }
  if (table.points.empty()) throw FormatError("point file has no rows");
  return table;
}

void write_matrix_csv(std::ostream& out, const Matrix& m) {
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << format_number(m(r, c));
    out << '\n';
  }
}

Matrix read_matrix_csv(std::istream& in) {
  const auto lines = read_lines(in);
  if (lines.empty()) throw FormatError("matrix file is empty");
  const std::size_t cols = split(lines[0].second).size();
  Matrix m(static_cast<Index>(lines.size()), static_cast<Index>(cols));
  for (std::size_t r = 0; r < lines.size(); ++r) {
    const auto fields = split(lines[r].second);
    if (fields.size() != cols) {
      throw FormatError("line " + std::to_string(lines[r].first) + ": ragged matrix row");
    }
    for (std::size_t c = 0; c < cols; ++c) {
      m(static_cast<Index>(r), static_cast<Index>(c)) = field_number(fields[c], lines[r].first);
    }
  }
  return m;
}

DiscretePath load_path_csv(const std::filesystem::path& file) {
  auto in = open(file);
  return read_path_csv(in);
}

PointTable load_points_csv(const std::filesystem::path& file) {
  auto in = open(file);
  return read_points_csv(in);
}

Matrix load_matrix_csv(const std::filesystem::path& file) {
  auto in = open(file);
  return read_matrix_csv(in);
}

void save_text(const std::filesystem::path& file, const std::string& contents) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary);
  if (!out) throw IoError("cannot open " + file.string() + " for writing");
  out << contents;
}

}  // namespace latentgeo
