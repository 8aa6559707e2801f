#pragma once

// Parallel translation by repeated projection onto the tangent space,
// geodesic shooting built on it, and the three-step analogy a:b::c:?.

#include "latentgeo/geodesic.hpp"
#include "latentgeo/manifold.hpp"

#include <limits>
#include <vector>

namespace latentgeo {

/// Forward-difference ambient velocity (g(z_1) - g(z_0)) / dt at g(z_0).
TangentVector initial_velocity(const DifferentiableMap& generator, const DiscretePath& path);

struct TranslationResult {
  TangentVector latent;   // J_h(x_T) u_T at z_T
  TangentVector ambient;  // u_T at x_T = g(z_T)
  /// u_0 .. u_T; u_0 is the input projected onto the tangent space at g(z_0).
  std::vector<Vector> ambient_steps;
};

/// Translate a latent tangent vector at z_0 along the path. Each step
/// projects onto the next tangent space (U U^T) and restores the length.
/// Throws DegenerateTransportError if a projection all but vanishes.
TranslationResult parallel_translate(const DifferentiableMap& generator,
                                     const DifferentiableMap& encoder,
                                     const DiscretePath& path, const TangentVector& v0);

/// Same, starting from an ambient vector at g(z_0).
TranslationResult parallel_translate_ambient(const DifferentiableMap& generator,
                                             const DifferentiableMap& encoder,
                                             const DiscretePath& path, const Vector& u0);

struct ShootOptions {
  /// Abort when |g(h(x)) - x| exceeds this after an Euler step.
  double round_trip_budget = std::numeric_limits<double>::infinity();
};

struct ShootResult {
  DiscretePath path;
  std::vector<Vector> velocities;
  double max_round_trip_error = 0.0;
};

/// Discrete exponential map from z0 with ambient velocity u0 over t in [0, 1].
ShootResult geodesic_shoot(const DifferentiableMap& generator,
                           const DifferentiableMap& encoder, const LatentPoint& z0,
                           const TangentVector& u0, int steps,
                           const ShootOptions& options = {});

struct AnalogyResult {
  LatentPoint answer;
  DiscretePath geodesic_ab;
  DiscretePath geodesic_ac;
  TangentVector translated_velocity;  // ambient, at g(c), length = arc_length_ab
  DiscretePath shoot_path;
  double arc_length_ab = 0.0;
  double shoot_arc_length = 0.0;
  bool geodesics_converged = false;
};

/// a:b::c:? by (1) the initial velocity of the a->b geodesic, (2) parallel
/// translation along the a->c geodesic, (3) shooting from c with length
/// equal to the a->b arc length. All legs use config.steps.
AnalogyResult geodesic_analogy(const DifferentiableMap& generator,
                               const DifferentiableMap& encoder, const LatentPoint& a,
                               const LatentPoint& b, const LatentPoint& c,
                               const GeodesicConfig& config = {},
                               const ShootOptions& shoot_options = {});

/// z_b - z_a + z_c.
LatentPoint linear_analogy(const LatentPoint& a, const LatentPoint& b, const LatentPoint& c);

}  // namespace latentgeo
