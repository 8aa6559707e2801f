#pragma once

// Closed-form reference surfaces used as verification fixtures, plus the
// encoders that invert them.

#include "latentgeo/manifold.hpp"

#include <cstdint>
#include <vector>

namespace latentgeo {

/// A chart with closed-form value, Jacobian, metric and second derivatives.
class AnalyticSurface : public DifferentiableMap {
 public:
  virtual MetricTensor closed_form_metric(const LatentPoint& z) const = 0;
  /// One input_dim x input_dim Hessian per output coordinate.
  virtual std::vector<Matrix> hessians(const LatentPoint& z) const = 0;
  /// Starting point for the nearest-point search from an ambient x.
  virtual LatentPoint chart_guess(const AmbientPoint& x) const = 0;
};

/// (z1, z2) -> (z1, z2, z1^2 - z2^2).
class HyperbolicParaboloid final : public AnalyticSurface {
 public:
  Index input_dim() const override { return 2; }
  Index output_dim() const override { return 3; }

  MetricTensor closed_form_metric(const LatentPoint& z) const override;
  std::vector<Matrix> hessians(const LatentPoint& z) const override;
  LatentPoint chart_guess(const AmbientPoint& x) const override;

 protected:
  Vector do_evaluate(const Vector& z) const override;
  Matrix do_jacobian(const Vector& z) const override;
};

/// z -> W z + offset with W of full column rank. Zero curvature.
class FlatEmbedding final : public AnalyticSurface {
 public:
  FlatEmbedding(Matrix weights, Vector offset);
  /// The first d coordinates of R^D, i.e. W = [I; 0], zero offset.
  static FlatEmbedding padded_identity(Index latent_dim, Index ambient_dim);

  Index input_dim() const override { return weights_.cols(); }
  Index output_dim() const override { return weights_.rows(); }

  const Matrix& weights() const { return weights_; }
  const Vector& offset() const { return offset_; }

  MetricTensor closed_form_metric(const LatentPoint& z) const override;
  std::vector<Matrix> hessians(const LatentPoint& z) const override;
  LatentPoint chart_guess(const AmbientPoint& x) const override;

 protected:
  Vector do_evaluate(const Vector& z) const override;
  Matrix do_jacobian(const Vector& z) const override;

 private:
  Matrix weights_;
  Vector offset_;
  Matrix pseudo_inverse_;
};

/// Orthographic chart of the upper hemisphere of radius r:
/// z -> (z1, z2, sqrt(r^2 - |z|^2)), restricted to |z| < 0.9 r.
class SphereChart final : public AnalyticSurface {
 public:
  explicit SphereChart(double radius);

  Index input_dim() const override { return 2; }
  Index output_dim() const override { return 3; }
  double radius() const { return radius_; }
  double domain_radius() const { return 0.9 * radius_; }

  MetricTensor closed_form_metric(const LatentPoint& z) const override;
  std::vector<Matrix> hessians(const LatentPoint& z) const override;
  LatentPoint chart_guess(const AmbientPoint& x) const override;

 protected:
  Vector do_evaluate(const Vector& z) const override;
  Matrix do_jacobian(const Vector& z) const override;

 private:
  double height(const Vector& z) const;

  double radius_;
};

/// x -> A x + c.
class AffineMap final : public DifferentiableMap {
 public:
  AffineMap(Matrix linear, Vector offset);

  Index input_dim() const override { return linear_.cols(); }
  Index output_dim() const override { return linear_.rows(); }

 protected:
  Vector do_evaluate(const Vector& x) const override { return linear_ * x + offset_; }
  Matrix do_jacobian(const Vector&) const override { return linear_; }

 private:
  Matrix linear_;
  Vector offset_;
};

/// Encoder h(x) = argmin_z |g(z) - x| for an analytic surface, found by
/// Gauss-Newton from the surface's chart guess. On the surface its
/// Jacobian is G^-1 J_g^T, so h(g(z)) = z and normal directions vanish.
/// Holds a reference; the surface must outlive the encoder.
class NearestPointEncoder final : public DifferentiableMap {
 public:
  explicit NearestPointEncoder(const AnalyticSurface& surface) : surface_(surface) {}

  Index input_dim() const override { return surface_.output_dim(); }
  Index output_dim() const override { return surface_.input_dim(); }

 protected:
  Vector do_evaluate(const Vector& x) const override;
  Matrix do_jacobian(const Vector& x) const override;

 private:
  const AnalyticSurface& surface_;
};

/// n points (z1, z2, z1^2 - z2^2) with z1, z2 ~ N(0, 1).
std::vector<AmbientPoint> sample_paraboloid(std::size_t n, std::uint64_t seed);

}  // namespace latentgeo
