#include "latentgeo/geodesic_ode.hpp"

#include "latentgeo/errors.hpp"

#include <cmath>

namespace latentgeo {

ChristoffelSymbols::ChristoffelSymbols(Index dim)
    : dim_(dim), data_(static_cast<std::size_t>(dim * dim * dim), 0.0) {}

Vector ChristoffelSymbols::contract(const Vector& a, const Vector& b) const {
  Vector c = Vector::Zero(dim_);
  for (Index i = 0; i < dim_; ++i) {
    for (Index j = 0; j < dim_; ++j) {
      for (Index k = 0; k < dim_; ++k) c(i) += (*this)(i, j, k) * a(j) * b(k);
    }
  }
  return c;
}

double ChristoffelSymbols::max_abs() const {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

ChristoffelSymbols christoffel(const DifferentiableMap& generator, const LatentPoint& z,
                               double fd_step) {
  if (!(fd_step > 0.0)) throw std::invalid_argument("fd_step must be positive");
  const Index d = generator.input_dim();
  const Matrix g = pullback_metric(generator, z).matrix;

  Eigen::SelfAdjointEigenSolver<Matrix> eig(g, Eigen::EigenvaluesOnly);
  const double lo = eig.eigenvalues()(0);
  const double hi = eig.eigenvalues()(d - 1);
  if (!(hi > 0.0) || lo <= 1e-14 * hi) {
    throw SingularMetricError("pullback metric is singular at the requested point");
  }
  const Matrix g_inv = g.inverse();

  // dg[k] = dG/dz_k
  std::vector<Matrix> dg;
  dg.reserve(d);
  for (Index k = 0; k < d; ++k) {
    Vector plus = z, minus = z;
    plus(k) += fd_step;
    minus(k) -= fd_step;
    dg.push_back((pullback_metric(generator, plus).matrix -
                  pullback_metric(generator, minus).matrix) /
                 (2.0 * fd_step));
  }

  ChristoffelSymbols gamma(d);
  for (Index i = 0; i < d; ++i) {
    for (Index j = 0; j < d; ++j) {
      for (Index k = j; k < d; ++k) {
        double sum = 0.0;
        for (Index l = 0; l < d; ++l) {
          sum += g_inv(i, l) * (dg[k](l, j) + dg[j](l, k) - dg[l](j, k));
        }
        gamma(i, j, k) = 0.5 * sum;
        gamma(i, k, j) = 0.5 * sum;
      }
    }
  }
  return gamma;
}

OdeSolution integrate_geodesic_ode(const DifferentiableMap& generator,
                                   const LatentPoint& z0, const Vector& v0, int steps,
                                   double step_size) {
  if (steps < 1) throw std::invalid_argument("ODE integration needs at least one step");
  if (z0.size() != generator.input_dim() || v0.size() != z0.size()) {
    throw DimensionError("ODE initial state does not match the generator input");
  }
  auto accel = [&](const Vector& z, const Vector& v) -> Vector {
    return -christoffel(generator, z).contract(v, v);
  };

  std::vector<Vector> positions{z0};
  std::vector<Vector> velocities{v0};
  positions.reserve(steps + 1);
  velocities.reserve(steps + 1);
  Vector z = z0, v = v0;
  const double h = step_size;
  for (int s = 0; s < steps; ++s) {
    const Vector k1z = v;
    const Vector k1v = accel(z, v);
    const Vector k2z = v + 0.5 * h * k1v;
    const Vector k2v = accel(z + 0.5 * h * k1z, k2z);
    const Vector k3z = v + 0.5 * h * k2v;
    const Vector k3v = accel(z + 0.5 * h * k2z, k3z);
    const Vector k4z = v + h * k3v;
    const Vector k4v = accel(z + h * k3z, k4z);
    z += (h / 6.0) * (k1z + 2.0 * k2z + 2.0 * k3z + k4z);
    v += (h / 6.0) * (k1v + 2.0 * k2v + 2.0 * k3v + k4v);
    if (!z.allFinite() || !v.allFinite()) {
      throw NumericalError("geodesic ODE blew up at step " + std::to_string(s));
    }
    positions.push_back(z);
    velocities.push_back(v);
  }
  return {DiscretePath(std::move(positions)), std::move(velocities)};
}

BvpSolution solve_geodesic_bvp(const DifferentiableMap& generator, const LatentPoint& z0,
                               const LatentPoint& zT, const BvpOptions& options) {
  const Index d = z0.size();
  const double h = 1.0 / options.steps;
  auto endpoint = [&](const Vector& v) {
    return integrate_geodesic_ode(generator, z0, v, options.steps, h);
  };

  BvpSolution out{endpoint(zT - z0), zT - z0, 0.0, 0, false};
  Vector residual = out.trajectory.path.back() - zT;
  out.residual = residual.norm();
  const double scale = 1.0 + (zT - z0).norm();

  while (out.iterations < options.max_iters && out.residual > options.tolerance * scale) {
    ++out.iterations;
    Matrix jac(d, d);
    for (Index k = 0; k < d; ++k) {
      Vector plus = out.initial_velocity, minus = out.initial_velocity;
      plus(k) += options.fd_step;
      minus(k) -= options.fd_step;
      jac.col(k) = (endpoint(plus).path.back() - endpoint(minus).path.back()) /
                   (2.0 * options.fd_step);
    }
    const Vector delta = jac.fullPivLu().solve(residual);
    double damping = 1.0;
    bool improved = false;
    for (int tries = 0; tries < 30; ++tries, damping *= 0.5) {
      const Vector candidate = out.initial_velocity - damping * delta;
      try {
        OdeSolution trial = endpoint(candidate);
        const Vector trial_residual = trial.path.back() - zT;
        if (trial_residual.norm() < out.residual) {
          out.initial_velocity = candidate;
          out.trajectory = std::move(trial);
          residual = trial_residual;
          out.residual = trial_residual.norm();
          improved = true;
          break;
        }
      } catch (const Error&) {
        // Overshot into a singular or non-finite region; shrink.
      }
    }
    if (!improved) break;
  }
  out.converged = out.residual <= options.tolerance * scale;
  return out;
}

}  // namespace latentgeo
