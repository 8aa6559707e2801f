#include "latentgeo/transport.hpp"

#include "latentgeo/errors.hpp"

#include <algorithm>
#include <string>

namespace latentgeo {

namespace {

constexpr double kDegenerateProjection = 1e-12;

// Project onto the frame and rescale to the incoming length.
Vector project_and_rescale(const TangentFrame& frame, const Vector& u, std::size_t step) {
  const Vector p = project_to_tangent(frame, u);
  const double length = u.norm();
  if (length == 0.0) return p;
  const double projected = p.norm();
  if (projected < kDegenerateProjection * length) {
    throw DegenerateTransportError(
        "transported vector is normal to the manifold at step " + std::to_string(step),
        step);
  }
  return (length / projected) * p;
}

}  // namespace

TangentVector initial_velocity(const DifferentiableMap& generator, const DiscretePath& path) {
  const AmbientPoint x0 = generator.evaluate(path[0]);
  const AmbientPoint x1 = generator.evaluate(path[1]);
  return TangentVector::ambient(x0, (x1 - x0) * static_cast<double>(path.steps()));
}

TranslationResult parallel_translate_ambient(const DifferentiableMap& generator,
                                             const DifferentiableMap& encoder,
                                             const DiscretePath& path, const Vector& u0) {
  if (u0.size() != generator.output_dim()) {
    throw DimensionError("translated vector does not match the ambient dimension");
  }
  std::vector<Vector> steps;
  steps.reserve(path.size());
  steps.push_back(project_to_tangent(tangent_frame(generator, path[0]), u0));
  for (std::size_t i = 0; i + 1 < path.size(); ++i) {
    const TangentFrame frame = tangent_frame(generator, path[i + 1]);
    steps.push_back(project_and_rescale(frame, steps.back(), i));
  }
  const AmbientPoint x_end = generator.evaluate(path.back());
  const Vector v_end = encoder.jacobian(x_end) * steps.back();
  return {TangentVector::latent(path.back(), v_end),
          TangentVector::ambient(x_end, steps.back()), std::move(steps)};
}

TranslationResult parallel_translate(const DifferentiableMap& generator,
                                     const DifferentiableMap& encoder,
                                     const DiscretePath& path, const TangentVector& v0) {
  if (v0.space != Space::latent) {
    throw std::invalid_argument("parallel_translate expects a latent tangent vector");
  }
  if (v0.dimension() != path.dimension()) {
    throw DimensionError("tangent vector does not match the path dimension");
  }
  const Vector u0 = generator.jacobian(path[0]) * v0.components;
  return parallel_translate_ambient(generator, encoder, path, u0);
}

ShootResult geodesic_shoot(const DifferentiableMap& generator,
                           const DifferentiableMap& encoder, const LatentPoint& z0,
                           const TangentVector& u0, int steps,
                           const ShootOptions& options) {
  if (steps < 1) throw std::invalid_argument("shooting needs at least one step");
  if (u0.space != Space::ambient) {
    throw std::invalid_argument("geodesic_shoot expects an ambient velocity");
  }
  if (u0.dimension() != generator.output_dim()) {
    throw DimensionError("shooting velocity does not match the ambient dimension");
  }
  const double dt = 1.0 / steps;
  AmbientPoint x = generator.evaluate(z0);
  Vector u = project_to_tangent(tangent_frame(generator, z0), u0.components);

  std::vector<LatentPoint> points{z0};
  std::vector<Vector> velocities{u};
  points.reserve(steps + 1);
  velocities.reserve(steps + 1);
  double worst = 0.0;
  for (int i = 0; i < steps; ++i) {
    const AmbientPoint stepped = x + dt * u;
    LatentPoint z = encoder.evaluate(stepped);
    AmbientPoint on_manifold = generator.evaluate(z);
    const double round_trip = (on_manifold - stepped).norm();
    worst = std::max(worst, round_trip);
    if (round_trip > options.round_trip_budget) {
      throw EncoderDivergenceError("encoder round trip error " + std::to_string(round_trip) +
                                       " exceeds budget at step " + std::to_string(i),
                                   static_cast<std::size_t>(i), round_trip);
    }
    u = project_and_rescale(tangent_frame(generator, z), u, static_cast<std::size_t>(i));
    x = std::move(on_manifold);
    points.push_back(std::move(z));
    velocities.push_back(u);
  }
  return {DiscretePath(std::move(points)), std::move(velocities), worst};
}

AnalogyResult geodesic_analogy(const DifferentiableMap& generator,
                               const DifferentiableMap& encoder, const LatentPoint& a,
                               const LatentPoint& b, const LatentPoint& c,
                               const GeodesicConfig& config,
                               const ShootOptions& shoot_options) {
  GeodesicResult ab = geodesic_path(generator, &encoder, a, b, config);
  GeodesicResult ac = geodesic_path(generator, &encoder, a, c, config);
  const double length_ab = discrete_arc_length(generator, ab.path);

  const TangentVector velocity = initial_velocity(generator, ab.path);
  TranslationResult moved =
      parallel_translate_ambient(generator, encoder, ac.path, velocity.components);
  Vector u = moved.ambient.components;
  const double norm = u.norm();
  if (norm > 0.0) u *= length_ab / norm;

  TangentVector start = TangentVector::ambient(moved.ambient.base, u);
  ShootResult shot = geodesic_shoot(generator, encoder, c, start, config.steps, shoot_options);
  const double shoot_length = discrete_arc_length(generator, shot.path);
  LatentPoint answer = shot.path.back();

  return {std::move(answer),
          std::move(ab.path),
          std::move(ac.path),
          std::move(start),
          std::move(shot.path),
          length_ab,
          shoot_length,
          ab.converged && ac.converged};
}

LatentPoint linear_analogy(const LatentPoint& a, const LatentPoint& b, const LatentPoint& c) {
  if (a.size() != b.size() || a.size() != c.size()) {
    throw DimensionError("analogy points differ in dimension");
  }
  return b - a + c;
}

}  // namespace latentgeo
