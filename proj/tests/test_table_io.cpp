#include "latentgeo/errors.hpp"
#include "latentgeo/table_io.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

using namespace latentgeo;

TEST(Numbers, ShortestFormRoundTrips) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> normal(0.0, 100.0);
  for (int i = 0; i < 1000; ++i) {
    const double v = normal(rng) * std::pow(10.0, i % 40 - 20);
    EXPECT_EQ(parse_number(format_number(v)), v);
  }
  EXPECT_EQ(format_number(0.1), "0.1");
  EXPECT_EQ(format_number(-3.0), "-3");
}

TEST(Numbers, ParseVariants) {
  EXPECT_EQ(parse_number(" +2.5 "), 2.5);
  EXPECT_EQ(parse_number("1e-3"), 1e-3);
  for (const char* bad : {"", "abc", "1.5x", "nan", "inf", "1,2"}) {
    EXPECT_THROW(parse_number(bad), FormatError) << bad;
  }
}

TEST(Numbers, ParseVector) {
  EXPECT_EQ(parse_vector("-3,-3"), (Vector{{-3.0, -3.0}}));
  EXPECT_EQ(parse_vector("1.5, 0 ,2"), (Vector{{1.5, 0.0, 2.0}}));
  EXPECT_THROW(parse_vector("1,,2"), FormatError);
}

TEST(PathCsv, RoundTripIsBitExact) {
  const DiscretePath path = DiscretePath::linear(Vector{{-3.0, 1.0 / 3.0}}, Vector{{2.0, 0.7}}, 7);
  std::stringstream buf;
  write_path_csv(buf, path);
  const DiscretePath back = read_path_csv(buf);
  ASSERT_EQ(back.size(), path.size());
  for (std::size_t i = 0; i < path.size(); ++i) EXPECT_EQ(back[i], path[i]);
}

TEST(PathCsv, Header) {
  std::stringstream buf;
  write_path_csv(buf, DiscretePath::linear(Vector{{0.0, 0.0}}, Vector{{1.0, 1.0}}, 2));
  std::string first;
  std::getline(buf, first);
  EXPECT_EQ(first, "t,z_1,z_2");
}

TEST(PathCsv, Malformed) {
  const char* docs[] = {
      "",
      "x,y\n0,1\n1,2\n",
      "t,z_1\n0,1\n",
      "t,z_1,z_2\n0,1\n1,2,3\n",
      "t,z_1\n0,1\n1,oops\n",
  };
  for (const char* doc : docs) {
    std::istringstream in(doc);
    EXPECT_THROW(read_path_csv(in), FormatError) << doc;
  }
}

TEST(PointsCsv, RoundTripWithLabels) {
  const std::vector<Vector> pts{Vector{{0.1, 0.2, 0.3}}, Vector{{-1e-17, 5.0, 1e300}}};
  const std::vector<std::string> labels{"cat", "dog"};
  std::stringstream buf;
  write_points_csv(buf, pts, labels);
  const PointTable back = read_points_csv(buf);
  ASSERT_EQ(back.points.size(), 2u);
  EXPECT_EQ(back.points[0], pts[0]);
  EXPECT_EQ(back.points[1], pts[1]);
  EXPECT_EQ(back.labels, labels);
}

TEST(PointsCsv, LatentPrefixWithoutLabels) {
  std::istringstream in("z_1,z_2\n1,2\n3,4\n");
  const PointTable t = read_points_csv(in);
  EXPECT_TRUE(t.labels.empty());
  EXPECT_EQ(t.points[1], (Vector{{3.0, 4.0}}));
}

TEST(PointsCsv, Malformed) {
  const char* docs[] = {
      "",
      "x_1,x_2\n",
      "a,b\n1,2\n",
      "x_1,x_2\n1\n",
      "x_2,x_1\n1,2\n",
      "x_1,label\n1\n",
  };
  for (const char* doc : docs) {
    std::istringstream in(doc);
    EXPECT_THROW(read_points_csv(in), FormatError) << doc;
  }
  std::ostringstream out;
  EXPECT_THROW(write_points_csv(out, {Vector::Zero(2)}, {"a", "b"}), DimensionError);
}

TEST(MatrixCsv, RoundTrip) {
  const Matrix m{{0, 1.25, 3}, {1.25, 0, 1e-9}, {3, 1e-9, 0}};
  std::stringstream buf;
  write_matrix_csv(buf, m);
  EXPECT_EQ(read_matrix_csv(buf), m);
  std::istringstream ragged("0,1\n1\n");
  EXPECT_THROW(read_matrix_csv(ragged), FormatError);
}

TEST(Files, MissingFileIsIoError) {
  EXPECT_THROW(load_path_csv("/nonexistent/path.csv"), IoError);
  EXPECT_THROW(load_points_csv("/nonexistent/points.csv"), IoError);
  EXPECT_THROW(load_matrix_csv("/nonexistent/m.csv"), IoError);
}
