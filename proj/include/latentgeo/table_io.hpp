#pragma once

// CSV tables: paths (header t,z_1..z_d), point sets (x_1..x_D[,label])
// and headerless square matrices. Numbers are written in shortest
// round-trip form so files reload bit-exactly.

#include "latentgeo/manifold.hpp"

#include <filesystem>
#include <iosfwd>
#include <string>
#include <string_view>
#include <vector>

namespace latentgeo {

std::string format_number(double v);
double parse_number(std::string_view text);
/// "1.5,-2,0" -> vector. Throws FormatError.
Vector parse_vector(std::string_view text);

void write_path_csv(std::ostream& out, const DiscretePath& path);
DiscretePath read_path_csv(std::istream& in);

struct PointTable {
  std::vector<Vector> points;
  std::vector<std::string> labels;  // empty when the file has no label column
};

/// Column names are prefix_1..prefix_n, plus "label" when labels are given.
void write_points_csv(std::ostream& out, const std::vector<Vector>& points,
                      const std::vector<std::string>& labels = {},
                      std::string_view prefix = "x");
/// Accepts x_ or z_ column prefixes and an optional trailing label column.
PointTable read_points_csv(std::istream& in);

void write_matrix_csv(std::ostream& out, const Matrix& m);
Matrix read_matrix_csv(std::istream& in);

// File convenience wrappers; open failures throw IoError.
DiscretePath load_path_csv(const std::filesystem::path& file);
PointTable load_points_csv(const std::filesystem::path& file);
Matrix load_matrix_csv(const std::filesystem::path& file);
void save_text(const std::filesystem::path& file, const std::string& contents);

}  // namespace latentgeo
