#pragma once

// Core abstractions for manifolds given as images of smooth maps g: Z -> X.
// Everything lives in latent coordinates; the ambient counterparts are
// reached through g and its Jacobian.

#include <Eigen/Dense>

#include <span>
#include <utility>
#include <vector>

namespace latentgeo {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using Index = Eigen::Index;

using LatentPoint = Vector;
using AmbientPoint = Vector;

// Relative singular-value tolerance for numerical rank decisions.
inline constexpr double kRankTolerance = 1e-8;

/// A map with an exact Jacobian. Public calls validate dimensions and
/// finiteness; subclasses implement the unchecked hooks.
class DifferentiableMap {
 public:
  virtual ~DifferentiableMap() = default;

  virtual Index input_dim() const = 0;
  virtual Index output_dim() const = 0;

  Vector evaluate(const Vector& z) const;
  /// output_dim x input_dim matrix, column k holds dg/dz_k.
  Matrix jacobian(const Vector& z) const;

 protected:
  virtual Vector do_evaluate(const Vector& z) const = 0;
  virtual Matrix do_jacobian(const Vector& z) const = 0;

 private:
  void check_input(const Vector& z) const;
};

enum class Space { latent, ambient };

struct TangentVector {
  Vector base;
  Vector components;
  Space space = Space::latent;

  TangentVector(Vector base_point, Vector comps, Space where);

  static TangentVector latent(Vector base_point, Vector comps) {
    return {std::move(base_point), std::move(comps), Space::latent};
  }
  static TangentVector ambient(Vector base_point, Vector comps) {
    return {std::move(base_point), std::move(comps), Space::ambient};
  }

  Index dimension() const { return components.size(); }
};

struct MetricTensor {
  Matrix matrix;

  Index dimension() const { return matrix.rows(); }
};

/// Ordered latent points z_0..z_T approximating a curve on [0, 1].
class DiscretePath {
 public:
  explicit DiscretePath(std::vector<LatentPoint> points);

  /// z_i = z0 + (i/T)(zT - z0), endpoints copied exactly.
  static DiscretePath linear(const LatentPoint& z0, const LatentPoint& zT,
                             int steps);
  static DiscretePath constant(const LatentPoint& z, int steps);

  int steps() const { return static_cast<int>(points_.size()) - 1; }
  double dt() const { return 1.0 / steps(); }
  Index dimension() const { return points_.front().size(); }

  const LatentPoint& operator[](std::size_t i) const { return points_[i]; }
  LatentPoint& operator[](std::size_t i) { return points_[i]; }
  const LatentPoint& front() const { return points_.front(); }
  const LatentPoint& back() const { return points_.back(); }
  const std::vector<LatentPoint>& points() const { return points_; }
  std::size_t size() const { return points_.size(); }

 private:
  std::vector<LatentPoint> points_;
};

/// Orthonormal basis of the tangent space at g(z) (left singular vectors
/// of the Jacobian) and the matching singular values, descending.
struct TangentFrame {
  Matrix basis;
  Vector singular_values;
};

MetricTensor pullback_metric(const DifferentiableMap& map, const LatentPoint& z);

/// u^T G v for latent vectors sharing a base point.
double inner_product(const MetricTensor& metric, const TangentVector& u,
                     const TangentVector& v);

/// Throws RankDeficiencyError when the smallest singular value is below
/// kRankTolerance times the largest.
TangentFrame tangent_frame(const DifferentiableMap& map, const LatentPoint& z);
TangentFrame tangent_frame_of(const Matrix& jacobian);

/// Orthogonal projection U U^T w onto the frame's column span.
Vector project_to_tangent(const TangentFrame& frame, const Vector& w);
TangentVector project_to_tangent(const TangentFrame& frame,
                                 const TangentVector& w);

std::vector<AmbientPoint> map_path(const DifferentiableMap& map,
                                   const DiscretePath& path);

// Curve functionals on an already-mapped sequence x_i = g(z_i).
double image_energy(std::span<const AmbientPoint> image);
double image_arc_length(std::span<const AmbientPoint> image);

/// E = 1/2 sum_{i<T} |g(z_{i+1}) - g(z_i)|^2 / dt.
double discrete_energy(const DifferentiableMap& map, const DiscretePath& path);
/// L = sum_{i<T} |g(z_{i+1}) - g(z_i)|.
double discrete_arc_length(const DifferentiableMap& map,
                           const DiscretePath& path);

Index numerical_rank(const Matrix& m, double relative_tolerance = kRankTolerance);

}  // namespace latentgeo
