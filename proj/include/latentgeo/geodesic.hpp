#pragma once

// Discrete geodesics by gradient descent on the discrete curve energy,
// with the exact energy gradient or the encoder-based surrogate.

#include "latentgeo/manifold.hpp"

#include <optional>
#include <vector>

namespace latentgeo {

enum class GradientMode {
  exact,    // -(1/dt) J_g(z_i)^T (x_{i+1} - 2 x_i + x_{i-1})
  encoder,  // -(1/dt) J_h(x_i)   (x_{i+1} - 2 x_i + x_{i-1})
};

struct GeodesicConfig {
  int steps = 10;
  double alpha = 0.05;
  /// Stop once the summed squared gradient norm drops to this value.
  /// Unset means 1e-6 * steps.
  std::optional<double> epsilon;
  int max_iters = 5000;
  GradientMode gradient_mode = GradientMode::exact;
  /// Halve the per-point step until the energy shows sufficient decrease.
  /// With backtracking off every point moves by exactly alpha * gradient.
  bool backtracking = true;
  int max_halvings = 30;

  double tolerance() const { return epsilon ? *epsilon : 1e-6 * steps; }
  void validate() const;
};

struct GeodesicResult {
  DiscretePath path;
  int iterations = 0;
  /// Sum over interior points of the squared (mode-specific) gradient norm
  /// at the returned path.
  double gradient_norm_sq = 0.0;
  /// Energy of the initial path followed by the energy after every sweep.
  std::vector<double> energy_history;
  bool converged = false;
};

/// Gradient of the discrete energy with respect to interior point i.
TangentVector energy_gradient(const DifferentiableMap& generator,
                              const DiscretePath& path, std::size_t i);

/// Encoder-mapped second difference; shares its zeros with the exact
/// gradient when J_h annihilates normal directions.
TangentVector modified_gradient(const DifferentiableMap& generator,
                                const DifferentiableMap& encoder,
                                const DiscretePath& path, std::size_t i);

/// Discrete geodesic between z0 and zT starting from linear interpolation
/// and updating interior points in place, one sweep per iteration.
/// `encoder` may be null unless config.gradient_mode is encoder.
GeodesicResult geodesic_path(const DifferentiableMap& generator,
                             const DifferentiableMap* encoder,
                             const LatentPoint& z0, const LatentPoint& zT,
                             const GeodesicConfig& config = {});

/// Arc length of the geodesic_path result.
double geodesic_distance(const DifferentiableMap& generator,
                         const DifferentiableMap* encoder, const LatentPoint& z0,
                         const LatentPoint& zT, const GeodesicConfig& config = {});

}  // namespace latentgeo
