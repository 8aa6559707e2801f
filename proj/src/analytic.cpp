#include "latentgeo/analytic.hpp"

#include "latentgeo/errors.hpp"

#include <cmath>
#include <random>

namespace latentgeo {

Vector HyperbolicParaboloid::do_evaluate(const Vector& z) const {
  return Vector{{z(0), z(1), z(0) * z(0) - z(1) * z(1)}};
}

Matrix HyperbolicParaboloid::do_jacobian(const Vector& z) const {
  Matrix j(3, 2);
  j << 1.0, 0.0,
       0.0, 1.0,
       2.0 * z(0), -2.0 * z(1);
  return j;
}

MetricTensor HyperbolicParaboloid::closed_form_metric(const LatentPoint& z) const {
  if (z.size() != 2) throw DimensionError("paraboloid metric expects a 2-D point");
  Matrix g(2, 2);
  g << 1.0 + 4.0 * z(0) * z(0), -4.0 * z(0) * z(1),
       -4.0 * z(0) * z(1), 1.0 + 4.0 * z(1) * z(1);
  return {std::move(g)};
}

std::vector<Matrix> HyperbolicParaboloid::hessians(const LatentPoint&) const {
  Matrix h3(2, 2);
  h3 << 2.0, 0.0,
        0.0, -2.0;
  return {Matrix::Zero(2, 2), Matrix::Zero(2, 2), std::move(h3)};
}

LatentPoint HyperbolicParaboloid::chart_guess(const AmbientPoint& x) const {
  return x.head(2);
}

FlatEmbedding::FlatEmbedding(Matrix weights, Vector offset)
    : weights_(std::move(weights)), offset_(std::move(offset)) {
  if (offset_.size() != weights_.rows()) {
    throw DimensionError("flat embedding offset does not match weight rows");
  }
  if (weights_.cols() < 1 || weights_.rows() < weights_.cols() ||
      numerical_rank(weights_) != weights_.cols()) {
    throw RankDeficiencyError("flat embedding needs a full column rank matrix");
  }
  pseudo_inverse_ = weights_.completeOrthogonalDecomposition().pseudoInverse();
}

FlatEmbedding FlatEmbedding::padded_identity(Index latent_dim, Index ambient_dim) {
  Matrix w = Matrix::Zero(ambient_dim, latent_dim);
  w.topRows(latent_dim).setIdentity();
  return FlatEmbedding(std::move(w), Vector::Zero(ambient_dim));
}

Vector FlatEmbedding::do_evaluate(const Vector& z) const { return weights_ * z + offset_; }

Matrix FlatEmbedding::do_jacobian(const Vector&) const { return weights_; }

MetricTensor FlatEmbedding::closed_form_metric(const LatentPoint&) const {
  return {weights_.transpose() * weights_};
}

std::vector<Matrix> FlatEmbedding::hessians(const LatentPoint&) const {
  return std::vector<Matrix>(weights_.rows(), Matrix::Zero(input_dim(), input_dim()));
}

LatentPoint FlatEmbedding::chart_guess(const AmbientPoint& x) const {
  return pseudo_inverse_ * (x - offset_);
}

SphereChart::SphereChart(double radius) : radius_(radius) {
  if (!(radius > 0.0) || !std::isfinite(radius)) {
    throw std::invalid_argument("sphere radius must be positive");
  }
}

double SphereChart::height(const Vector& z) const {
  const double r = z.norm();
  if (!(r < domain_radius())) {
    throw DomainError("point outside the hemisphere chart (|z| = " + std::to_string(r) +
                      ", limit " + std::to_string(domain_radius()) + ")");
  }
  return std::sqrt(radius_ * radius_ - z.squaredNorm());
}

Vector SphereChart::do_evaluate(const Vector& z) const {
  return Vector{{z(0), z(1), height(z)}};
}

Matrix SphereChart::do_jacobian(const Vector& z) const {
  const double s = height(z);
  Matrix j(3, 2);
  j << 1.0, 0.0,
       0.0, 1.0,
       -z(0) / s, -z(1) / s;
  return j;
}

MetricTensor SphereChart::closed_form_metric(const LatentPoint& z) const {
  if (z.size() != 2) throw DimensionError("sphere metric expects a 2-D point");
  const double s = height(z);
  return {Matrix::Identity(2, 2) + z * z.transpose() / (s * s)};
}

std::vector<Matrix> SphereChart::hessians(const LatentPoint& z) const {
  const double s = height(z);
  Matrix h3 = -Matrix::Identity(2, 2) / s - z * z.transpose() / (s * s * s);
  return {Matrix::Zero(2, 2), Matrix::Zero(2, 2), std::move(h3)};
}

LatentPoint SphereChart::chart_guess(const AmbientPoint& x) const {
  const double n = x.norm();
  if (!(n > 0.0)) throw DomainError("cannot project the sphere centre");
  return (radius_ / n) * x.head(2);
}

AffineMap::AffineMap(Matrix linear, Vector offset)
    : linear_(std::move(linear)), offset_(std::move(offset)) {
  if (offset_.size() != linear_.rows()) {
    throw DimensionError("affine map offset does not match rows");
  }
}

Vector NearestPointEncoder::do_evaluate(const Vector& x) const {
  Vector z = surface_.chart_guess(x);
  for (int iter = 0; iter < 100; ++iter) {
    const Matrix j = surface_.jacobian(z);
    const Vector residual = surface_.evaluate(z) - x;
    const Vector step = (j.transpose() * j).ldlt().solve(j.transpose() * residual);
    z -= step;
    if (step.norm() <= 1e-15 * (1.0 + z.norm())) break;
  }
  return z;
}

Matrix NearestPointEncoder::do_jacobian(const Vector& x) const {
  // Implicit differentiation of J(z)^T (g(z) - x) = 0.
  const Vector z = do_evaluate(x);
  const Matrix j = surface_.jacobian(z);
  const Vector residual = surface_.evaluate(z) - x;
  const auto second = surface_.hessians(z);
  Matrix a = j.transpose() * j;
  for (Index k = 0; k < residual.size(); ++k) a += residual(k) * second[k];
  return a.partialPivLu().solve(j.transpose());
}

std::vector<AmbientPoint> sample_paraboloid(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<AmbientPoint> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = normal(rng);
    const double b = normal(rng);
    points.push_back(Vector{{a, b, a * a - b * b}});
  }
  return points;
}

}  // namespace latentgeo
