#include "latentgeo/geodesic.hpp"

#include "latentgeo/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace latentgeo {

namespace {

// Armijo fraction for the per-point backtracking test (exact mode).
constexpr double kSufficientDecrease = 0.5;
// Per-point trial steps may grow to at most alpha * kMaxGrowth.
constexpr double kMaxGrowth = 1024.0;

void check_interior(const DiscretePath& path, std::size_t i) {
  if (i < 1 || static_cast<int>(i) > path.steps() - 1) {
    throw std::out_of_range("gradient index " + std::to_string(i) +
                            " is not an interior point of a path with T = " +
                            std::to_string(path.steps()));
  }
}

Vector second_difference(const std::vector<AmbientPoint>& x, std::size_t i) {
  return x[i + 1] - 2.0 * x[i] + x[i - 1];
}

}  // namespace

void GeodesicConfig::validate() const {
  if (steps < 2) throw std::invalid_argument("geodesic needs T >= 2");
  if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
  if (epsilon && !(*epsilon > 0.0)) throw std::invalid_argument("epsilon must be positive");
  if (max_iters < 0) throw std::invalid_argument("max_iters must be non-negative");
  if (max_halvings < 0) throw std::invalid_argument("max_halvings must be non-negative");
}

TangentVector energy_gradient(const DifferentiableMap& generator,
                              const DiscretePath& path, std::size_t i) {
  check_interior(path, i);
  const AmbientPoint prev = generator.evaluate(path[i - 1]);
  const AmbientPoint here = generator.evaluate(path[i]);
  const AmbientPoint next = generator.evaluate(path[i + 1]);
  const Vector grad = -static_cast<double>(path.steps()) *
                      (generator.jacobian(path[i]).transpose() * (next - 2.0 * here + prev));
  return TangentVector::latent(path[i], grad);
}

TangentVector modified_gradient(const DifferentiableMap& generator,
                                const DifferentiableMap& encoder,
                                const DiscretePath& path, std::size_t i) {
  check_interior(path, i);
  const AmbientPoint prev = generator.evaluate(path[i - 1]);
  const AmbientPoint here = generator.evaluate(path[i]);
  const AmbientPoint next = generator.evaluate(path[i + 1]);
  const Vector eta = -static_cast<double>(path.steps()) *
                     (encoder.jacobian(here) * (next - 2.0 * here + prev));
  return TangentVector::latent(path[i], eta);
}

GeodesicResult geodesic_path(const DifferentiableMap& generator,
                             const DifferentiableMap* encoder,
                             const LatentPoint& z0, const LatentPoint& zT,
                             const GeodesicConfig& config) {
  config.validate();
  const bool use_encoder = config.gradient_mode == GradientMode::encoder;
  if (use_encoder && encoder == nullptr) {
    throw std::invalid_argument("encoder gradient mode requires an encoder");
  }
  if (z0.size() != generator.input_dim() || zT.size() != generator.input_dim()) {
    throw DimensionError("geodesic endpoints do not match the generator input dimension");
  }

  const int steps = config.steps;
  const double inv_dt = steps;
  GeodesicResult result{DiscretePath::linear(z0, zT, steps), 0, 0.0, {}, false};
  if (z0 == zT) {
    result.path = DiscretePath::constant(z0, steps);
    result.energy_history.push_back(0.0);
    result.converged = true;
    return result;
  }

  DiscretePath& path = result.path;
  std::vector<AmbientPoint> image = map_path(generator, path);

  auto direction = [&](std::size_t i) -> Vector {
    const Vector second = second_difference(image, i);
    if (use_encoder) return -inv_dt * (encoder->jacobian(image[i]) * second);
    return -inv_dt * (generator.jacobian(path[i]).transpose() * second);
  };
  auto gradient_sum = [&] {
    double sum = 0.0;
    for (int i = 1; i < steps; ++i) sum += direction(i).squaredNorm();
    return sum;
  };
  auto local_energy = [&](std::size_t i, const AmbientPoint& xi) {
    return 0.5 * inv_dt *
           ((image[i + 1] - xi).squaredNorm() + (xi - image[i - 1]).squaredNorm());
  };

  double energy = image_energy(image);
  result.energy_history.push_back(energy);
  result.gradient_norm_sq = gradient_sum();

  // Fixed-step descent is not monotone; keep the lowest-energy path.
  DiscretePath best_path = path;
  double best_energy = energy;
  double best_gradient = result.gradient_norm_sq;

  std::vector<double> trial(steps + 1, config.alpha);
  const double tolerance = config.tolerance();

  try {
    while (result.gradient_norm_sq > tolerance && result.iterations < config.max_iters) {
      bool moved = false;
      for (int i = 1; i < steps; ++i) {
        const Vector dir = direction(i);
        if (!config.backtracking) {
          path[i] -= config.alpha * dir;
          image[i] = generator.evaluate(path[i]);
          moved = true;
          continue;
        }
        const double before = local_energy(i, image[i]);
        double step = trial[i];
        for (int halving = 0; halving <= config.max_halvings; ++halving, step *= 0.5) {
          const LatentPoint candidate = path[i] - step * dir;
          AmbientPoint x_candidate;
          try {
            x_candidate = generator.evaluate(candidate);
          } catch (const DomainError&) {
            continue;
          }
          const double after = local_energy(i, x_candidate);
          // The encoder direction need not be a descent direction for a
          // learned h, so there only plain decrease is asked for.
          const double required =
              use_encoder ? 0.0 : kSufficientDecrease * step * dir.squaredNorm();
          if (after <= before - required && after < before) {
            path[i] = candidate;
            image[i] = std::move(x_candidate);
            moved = true;
            trial[i] = halving == 0 ? std::min(2.0 * step, kMaxGrowth * config.alpha) : step;
            break;
          }
        }
      }
      ++result.iterations;
      energy = image_energy(image);
      result.energy_history.push_back(energy);
      result.gradient_norm_sq = gradient_sum();
      if (energy < best_energy) {
        best_energy = energy;
        best_path = path;
        best_gradient = result.gradient_norm_sq;
      }
      if (!moved) break;
    }
  } catch (const NumericalError&) {
    // Fixed-step descent blew up; fall back to the best path seen.
    result.path = best_path;
    result.gradient_norm_sq = best_gradient;
    result.converged = false;
    return result;
  }

  result.converged = result.gradient_norm_sq <= tolerance;
  if (!config.backtracking && !result.converged && best_energy < energy) {
    result.path = best_path;
    result.gradient_norm_sq = best_gradient;
  }
  return result;
}

double geodesic_distance(const DifferentiableMap& generator,
                         const DifferentiableMap* encoder, const LatentPoint& z0,
                         const LatentPoint& zT, const GeodesicConfig& config) {
  const GeodesicResult result = geodesic_path(generator, encoder, z0, zT, config);
  return discrete_arc_length(generator, result.path);
}

}  // namespace latentgeo
