#include "latentgeo/manifold.hpp"

#include "latentgeo/errors.hpp"

#include <cmath>
#include <string>

namespace latentgeo {

namespace {

std::string dims(Index expected, Index got) {
  return "expected " + std::to_string(expected) + ", got " +
         std::to_string(got);
}

}  // namespace

void DifferentiableMap::check_input(const Vector& z) const {
  if (z.size() != input_dim()) {
    throw DimensionError("map input dimension: " + dims(input_dim(), z.size()));
  }
  if (!z.allFinite()) throw NumericalError("map input has non-finite entries");
}

Vector DifferentiableMap::evaluate(const Vector& z) const {
  check_input(z);
  Vector x = do_evaluate(z);
  if (x.size() != output_dim()) {
    throw DimensionError("map output dimension: " + dims(output_dim(), x.size()));
  }
  if (!x.allFinite()) throw NumericalError("map produced non-finite output");
  return x;
}

Matrix DifferentiableMap::jacobian(const Vector& z) const {
  check_input(z);
  Matrix j = do_jacobian(z);
  if (j.rows() != output_dim() || j.cols() != input_dim()) {
    throw DimensionError("jacobian shape does not match map dimensions");
  }
  if (!j.allFinite()) throw NumericalError("jacobian has non-finite entries");
  return j;
}

TangentVector::TangentVector(Vector base_point, Vector comps, Space where)
    : base(std::move(base_point)), components(std::move(comps)), space(where) {
  if (base.size() != components.size()) {
    throw DimensionError("tangent vector: " + dims(base.size(), components.size()));
  }
  if (!base.allFinite() || !components.allFinite()) {
    throw NumericalError("tangent vector has non-finite entries");
  }
}

DiscretePath::DiscretePath(std::vector<LatentPoint> points)
    : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw std::invalid_argument("a discrete path needs at least two points");
  }
  const Index d = points_.front().size();
  if (d < 1) throw DimensionError("path points must have dimension >= 1");
  for (const auto& p : points_) {
    if (p.size() != d) throw DimensionError("path points differ in dimension");
    if (!p.allFinite()) throw NumericalError("path has non-finite coordinates");
  }
}

DiscretePath DiscretePath::linear(const LatentPoint& z0, const LatentPoint& zT,
                                  int steps) {
  if (steps < 1) throw std::invalid_argument("path needs at least one step");
  if (z0.size() != zT.size()) throw DimensionError("endpoints differ in dimension");
  std::vector<LatentPoint> pts;
  pts.reserve(steps + 1);
  pts.push_back(z0);
  const Vector delta = zT - z0;
  for (int i = 1; i < steps; ++i) {
    pts.push_back(z0 + (static_cast<double>(i) / steps) * delta);
  }
  pts.push_back(zT);
  return DiscretePath(std::move(pts));
}

DiscretePath DiscretePath::constant(const LatentPoint& z, int steps) {
  if (steps < 1) throw std::invalid_argument("path needs at least one step");
  return DiscretePath(std::vector<LatentPoint>(steps + 1, z));
}

MetricTensor pullback_metric(const DifferentiableMap& map, const LatentPoint& z) {
  const Matrix j = map.jacobian(z);
  Matrix g = j.transpose() * j;
  // Force exact symmetry; the product is symmetric up to summation order.
  g = 0.5 * (g + g.transpose()).eval();
  return {std::move(g)};
}

double inner_product(const MetricTensor& metric, const TangentVector& u,
                     const TangentVector& v) {
  if (u.space != Space::latent || v.space != Space::latent) {
    throw std::invalid_argument("inner_product expects latent tangent vectors");
  }
  const Index d = metric.dimension();
  if (u.dimension() != d || v.dimension() != d) {
    throw DimensionError("inner_product: " + dims(d, u.dimension() != d
                                                         ? u.dimension()
                                                         : v.dimension()));
  }
  if (u.base != v.base) {
    throw std::invalid_argument("inner_product: vectors at different base points");
  }
  return u.components.dot(metric.matrix * v.components);
}

TangentFrame tangent_frame_of(const Matrix& jacobian) {
  if (jacobian.rows() < jacobian.cols()) {
    throw RankDeficiencyError("jacobian has fewer rows than columns");
  }
  Eigen::JacobiSVD<Matrix> svd(jacobian, Eigen::ComputeThinU);
  const Vector& s = svd.singularValues();
  const double largest = s.size() > 0 ? s(0) : 0.0;
  const double smallest = s.size() > 0 ? s(s.size() - 1) : 0.0;
  if (!(largest > 0.0) || smallest < kRankTolerance * largest) {
    throw RankDeficiencyError("jacobian is rank deficient (sigma_min/sigma_max = " +
                              std::to_string(largest > 0 ? smallest / largest : 0.0) +
                              ")");
  }
  return {svd.matrixU(), s};
}

TangentFrame tangent_frame(const DifferentiableMap& map, const LatentPoint& z) {
  return tangent_frame_of(map.jacobian(z));
}

Vector project_to_tangent(const TangentFrame& frame, const Vector& w) {
  if (w.size() != frame.basis.rows()) {
    throw DimensionError("project_to_tangent: " + dims(frame.basis.rows(), w.size()));
  }
  return frame.basis * (frame.basis.transpose() * w);
}

TangentVector project_to_tangent(const TangentFrame& frame,
                                 const TangentVector& w) {
  if (w.space != Space::ambient) {
    throw std::invalid_argument("project_to_tangent expects an ambient vector");
  }
  return TangentVector::ambient(w.base, project_to_tangent(frame, w.components));
}

std::vector<AmbientPoint> map_path(const DifferentiableMap& map,
                                   const DiscretePath& path) {
  std::vector<AmbientPoint> image;
  image.reserve(path.size());
  for (const auto& z : path.points()) image.push_back(map.evaluate(z));
  return image;
}

double image_energy(std::span<const AmbientPoint> image) {
  if (image.size() < 2) throw std::invalid_argument("energy needs T >= 1");
  const double steps = static_cast<double>(image.size() - 1);
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < image.size(); ++i) {
    sum += (image[i + 1] - image[i]).squaredNorm();
  }
  return 0.5 * steps * sum;
}

double image_arc_length(std::span<const AmbientPoint> image) {
  double sum = 0.0;
  for (std::size_t i = 0; i + 1 < image.size(); ++i) {
    sum += (image[i + 1] - image[i]).norm();
  }
  return sum;
}

double discrete_energy(const DifferentiableMap& map, const DiscretePath& path) {
  const auto image = map_path(map, path);
  return image_energy(image);
}

double discrete_arc_length(const DifferentiableMap& map,
                           const DiscretePath& path) {
  const auto image = map_path(map, path);
  return image_arc_length(image);
}

Index numerical_rank(const Matrix& m, double relative_tolerance) {
  if (m.size() == 0) return 0;
  Eigen::JacobiSVD<Matrix> svd(m);
  const Vector& s = svd.singularValues();
  if (!(s(0) > 0.0)) return 0;
  Index rank = 0;
  for (Index i = 0; i < s.size(); ++i) {
    if (s(i) > relative_tolerance * s(0)) ++rank;
  }
  return rank;
}

}  // namespace latentgeo
