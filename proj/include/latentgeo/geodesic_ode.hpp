#pragma once

// Continuous geodesic equation d2z/dt2 = -Gamma(dz/dt, dz/dt) integrated
// with RK4. Needs second derivatives of g and a metric inverse, so it is
// used only as an independent reference for the discrete solvers.

#include "latentgeo/manifold.hpp"

#include <vector>

namespace latentgeo {

/// Gamma^i_jk stored densely, symmetric in (j, k).
class ChristoffelSymbols {
 public:
  explicit ChristoffelSymbols(Index dim);

  Index dimension() const { return dim_; }
  double operator()(Index i, Index j, Index k) const { return data_[offset(i, j, k)]; }
  double& operator()(Index i, Index j, Index k) { return data_[offset(i, j, k)]; }

  /// c^i = Gamma^i_jk a^j b^k.
  Vector contract(const Vector& a, const Vector& b) const;
  double max_abs() const;

 private:
  std::size_t offset(Index i, Index j, Index k) const {
    return static_cast<std::size_t>((i * dim_ + j) * dim_ + k);
  }

  Index dim_;
  std::vector<double> data_;
};

/// Christoffel symbols of the pullback metric from central differences of
/// G with step fd_step. Throws SingularMetricError if G is not invertible.
ChristoffelSymbols christoffel(const DifferentiableMap& generator, const LatentPoint& z,
                               double fd_step = 1e-4);

struct OdeSolution {
  DiscretePath path;
  std::vector<Vector> velocities;
};

/// RK4 from (z0, v0) for `steps` steps of size step_size.
OdeSolution integrate_geodesic_ode(const DifferentiableMap& generator,
                                   const LatentPoint& z0, const Vector& v0, int steps,
                                   double step_size);

struct BvpOptions {
  int steps = 1024;
  int max_iters = 60;
  double tolerance = 1e-10;
  double fd_step = 1e-6;
};

struct BvpSolution {
  OdeSolution trajectory;
  Vector initial_velocity;
  double residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

/// Two-point geodesic on t in [0, 1] by shooting on the initial velocity
/// with damped Gauss-Newton on the endpoint residual.
BvpSolution solve_geodesic_bvp(const DifferentiableMap& generator, const LatentPoint& z0,
                               const LatentPoint& zT, const BvpOptions& options = {});

}  // namespace latentgeo
