#pragma once

// Distance matrices, Frechet means, R^2 grouping scores and classical MDS
// with the negative-eigenvalue curvature diagnostic.

#include "latentgeo/errors.hpp"
#include "latentgeo/geodesic.hpp"
#include "latentgeo/manifold.hpp"

#include <span>
#include <string>
#include <vector>

namespace latentgeo {

enum class DistanceMode { linear, geodesic };

struct DistanceMatrix {
  Matrix values;
  DistanceMode mode = DistanceMode::linear;
  /// Geodesic mode: ordered pairs whose solver hit max_iters.
  int unconverged_pairs = 0;

  Index size() const { return values.rows(); }
};

/// Wrap a matrix read from disk. Checks square, finite, non-negative, zero
/// diagonal and symmetric to a relative 1e-9.
DistanceMatrix make_distance_matrix(Matrix values, DistanceMode mode);

struct LabeledSet {
  std::vector<LatentPoint> points;
  std::vector<std::string> labels;

  LabeledSet(std::vector<LatentPoint> pts, std::vector<std::string> groups);
};

/// A geodesic solve failed for the ordered pair (i, j).
class PairFailureError : public Error {
 public:
  PairFailureError(const std::string& what, std::size_t i, std::size_t j)
      : Error(what), i_(i), j_(j) {}
  const char* kind() const noexcept override { return "pair_failure"; }
  std::size_t first() const noexcept { return i_; }
  std::size_t second() const noexcept { return j_; }

 private:
  std::size_t i_, j_;
};

/// Linear mode: Euclidean distance in Z. Geodesic mode: arc length of the
/// discrete geodesic for both orders of every pair, averaged. Pairs are
/// spread over `jobs` threads; the result does not depend on it.
DistanceMatrix distance_matrix(const DifferentiableMap& generator,
                               const DifferentiableMap* encoder,
                               std::span<const LatentPoint> points, DistanceMode mode,
                               const GeodesicConfig& config = {}, int jobs = 1);

LatentPoint linear_mean(std::span<const LatentPoint> points);

struct FrechetOptions {
  double step = 0.5;
  int max_iters = 100;
  int max_backtracks = 20;
  /// Converged once the ambient length of the mean log map is below this.
  double tolerance = 1e-6;
};

struct FrechetResult {
  LatentPoint mean;
  /// Sum of squared geodesic distances at every accepted iterate.
  std::vector<double> objective_history;
  int iterations = 0;
  bool converged = false;
};

/// Karcher iteration mu <- mu + step * mean_i log_mu(z_i), where log_mu(z_i)
/// is the initial latent velocity of the geodesic mu -> z_i (second-order
/// one-sided difference) rescaled so its ambient length equals the geodesic
/// distance. Starts at the linear mean; the step is halved whenever the
/// objective would not decrease, and the iteration stops unconverged when
/// no halving helps.
FrechetResult frechet_mean(const DifferentiableMap& generator,
                           const DifferentiableMap* encoder,
                           std::span<const LatentPoint> points,
                           const GeodesicConfig& config = {},
                           const FrechetOptions& options = {});

/// 1 - sum_{l_i = l_j} d_ij^2 / sum_{i,j} d_ij^2 over ordered pairs.
double r2_score(const DistanceMatrix& distances, std::span<const std::string> labels);

struct MdsResult {
  Vector eigenvalues;  // descending
  Matrix embedding;    // N x k', k' = min(k, positive_count)
  Index positive_count = 0;
  Index zero_count = 0;
  Index negative_count = 0;
  /// sum |negative eigenvalues| / sum |eigenvalues|.
  double negative_mass_ratio = 0.0;
  bool truncated = false;
};

/// |lambda| below this times the largest |lambda| counts as zero.
inline constexpr double kMdsZeroTolerance = 1e-8;

/// Eigendecomposition of B = -1/2 J (D o D) J, J the centring matrix;
/// embedding from the top-k positive eigenpairs scaled by sqrt(lambda).
MdsResult classical_mds(const DistanceMatrix& distances, Index k);

}  // namespace latentgeo
