#include "latentgeo/statistics.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <optional>
#include <thread>

namespace latentgeo {

DistanceMatrix make_distance_matrix(Matrix values, DistanceMode mode) {
  if (values.rows() != values.cols() || values.rows() == 0) {
    throw FormatError("distance matrix must be square and non-empty");
  }
  if (!values.allFinite()) throw FormatError("distance matrix has non-finite entries");
  const double scale = std::max(1.0, values.cwiseAbs().maxCoeff());
  for (Index i = 0; i < values.rows(); ++i) {
    if (values(i, i) != 0.0) throw FormatError("distance matrix diagonal must be zero");
    for (Index j = 0; j < values.cols(); ++j) {
      if (values(i, j) < 0.0) throw FormatError("distance matrix has negative entries");
      if (std::abs(values(i, j) - values(j, i)) > 1e-9 * scale) {
        throw FormatError("distance matrix is not symmetric");
      }
    }
  }
  return {std::move(values), mode, 0};
}

LabeledSet::LabeledSet(std::vector<LatentPoint> pts, std::vector<std::string> groups)
    : points(std::move(pts)), labels(std::move(groups)) {
  if (points.size() != labels.size()) {
    throw DimensionError("labeled set: " + std::to_string(points.size()) + " points but " +
                         std::to_string(labels.size()) + " labels");
  }
}

namespace {

void check_same_dimension(std::span<const LatentPoint> points) {
  for (const auto& p : points) {
    if (p.size() != points.front().size()) {
      throw DimensionError("point set has mixed dimensions");
    }
  }
}

}  // namespace

DistanceMatrix distance_matrix(const DifferentiableMap& generator,
                               const DifferentiableMap* encoder,
                               std::span<const LatentPoint> points, DistanceMode mode,
                               const GeodesicConfig& config, int jobs) {
  check_same_dimension(points);
  const auto n = static_cast<Index>(points.size());
  DistanceMatrix out{Matrix::Zero(n, n), mode, 0};
  if (mode == DistanceMode::linear) {
    for (Index i = 0; i < n; ++i) {
      for (Index j = i + 1; j < n; ++j) {
        out.values(i, j) = out.values(j, i) = (points[i] - points[j]).norm();
      }
    }
    return out;
  }

  std::vector<std::pair<Index, Index>> pairs;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i != j) pairs.emplace_back(i, j);
    }
  }
  Matrix raw = Matrix::Zero(n, n);
  std::atomic<std::size_t> next{0};
  std::atomic<int> unconverged{0};
  std::mutex failure_mutex;
  std::optional<std::pair<std::size_t, std::exception_ptr>> failure;

  auto worker = [&] {
    for (std::size_t k = next++; k < pairs.size(); k = next++) {
      const auto [i, j] = pairs[k];
      try {
        const GeodesicResult r = geodesic_path(generator, encoder, points[i], points[j], config);
        raw(i, j) = discrete_arc_length(generator, r.path);
        if (!r.converged) ++unconverged;
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure || k < failure->first) failure.emplace(k, std::current_exception());
      }
    }
  };
  const int threads = std::max(1, jobs);
  if (threads == 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(worker);
  }
  if (failure) {
    const auto [i, j] = pairs[failure->first];
    try {
      std::rethrow_exception(failure->second);
    } catch (const std::exception& e) {
      throw PairFailureError("geodesic solve failed for pair (" + std::to_string(i) + ", " +
                                 std::to_string(j) + "): " + e.what(),
                             static_cast<std::size_t>(i), static_cast<std::size_t>(j));
    }
  }
  out.values = 0.5 * (raw + raw.transpose());
  out.unconverged_pairs = unconverged.load();
  return out;
}

LatentPoint linear_mean(std::span<const LatentPoint> points) {
  if (points.empty()) throw std::invalid_argument("mean of an empty point set");
  check_same_dimension(points);
  Vector sum = Vector::Zero(points.front().size());
  for (const auto& p : points) sum += p;
  return sum / static_cast<double>(points.size());
}

namespace {

struct KarcherTerms {
  double objective = 0.0;
  Vector mean_log;
};

KarcherTerms karcher_terms(const DifferentiableMap& generator,
                           const DifferentiableMap* encoder,
                           std::span<const LatentPoint> points, const LatentPoint& mu,
                           const GeodesicConfig& config) {
  KarcherTerms terms{0.0, Vector::Zero(mu.size())};
  const Matrix jac = generator.jacobian(mu);
  for (const auto& z : points) {
    if (z == mu) continue;
    const GeodesicResult r = geodesic_path(generator, encoder, mu, z, config);
    const double distance = discrete_arc_length(generator, r.path);
    // One-sided second-order difference; the first step alone biases the
    // mean by O(1/T).
    const auto t = static_cast<double>(r.path.steps());
    Vector log = r.path.steps() >= 2
                     ? Vector(0.5 * t * (4.0 * r.path[1] - 3.0 * mu - r.path[2]))
                     : Vector(t * (r.path[1] - mu));
    const double ambient = (jac * log).norm();
    if (ambient > 0.0) log *= distance / ambient;
    terms.objective += distance * distance;
    terms.mean_log += log;
  }
  terms.mean_log /= static_cast<double>(points.size());
  return terms;
}

}  // namespace

FrechetResult frechet_mean(const DifferentiableMap& generator,
                           const DifferentiableMap* encoder,
                           std::span<const LatentPoint> points,
                           const GeodesicConfig& config, const FrechetOptions& options) {
  FrechetResult result{linear_mean(points), {}, 0, false};
  if (points.size() == 1) {
    result.objective_history.push_back(0.0);
    result.converged = true;
    return result;
  }
  KarcherTerms current = karcher_terms(generator, encoder, points, result.mean, config);
  result.objective_history.push_back(current.objective);

  while (result.iterations < options.max_iters) {
    const double gradient = (generator.jacobian(result.mean) * current.mean_log).norm();
    if (gradient <= options.tolerance) {
      result.converged = true;
      break;
    }
    double step = options.step;
    bool accepted = false;
    for (int bt = 0; bt <= options.max_backtracks; ++bt, step *= 0.5) {
      const LatentPoint candidate = result.mean + step * current.mean_log;
      try {
        KarcherTerms trial = karcher_terms(generator, encoder, points, candidate, config);
        if (trial.objective < current.objective) {
          result.mean = candidate;
          current = std::move(trial);
          accepted = true;
          break;
        }
      } catch (const DomainError&) {
        // Candidate left the chart; shrink the step.
      }
    }
    if (!accepted) break;
    ++result.iterations;
    result.objective_history.push_back(current.objective);
  }
  return result;
}

double r2_score(const DistanceMatrix& distances, std::span<const std::string> labels) {
  const Index n = distances.size();
  if (static_cast<Index>(labels.size()) != n) {
    throw DimensionError("r2_score: label count does not match the matrix size");
  }
  double intra = 0.0, total = 0.0;
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      const double sq = distances.values(i, j) * distances.values(i, j);
      total += sq;
      if (labels[i] == labels[j]) intra += sq;
    }
  }
  if (!(total > 0.0)) throw std::domain_error("r2_score undefined for an all-zero matrix");
  return 1.0 - intra / total;
}

MdsResult classical_mds(const DistanceMatrix& distances, Index k) {
  const Index n = distances.size();
  if (n < 2) throw std::invalid_argument("MDS needs at least two points");
  if (k < 0) throw std::invalid_argument("MDS target dimension must be non-negative");

  const Matrix squared = distances.values.cwiseAbs2();
  const Matrix centring =
      Matrix::Identity(n, n) - Matrix::Constant(n, n, 1.0 / static_cast<double>(n));
  Matrix gram = -0.5 * centring * squared * centring;
  gram = 0.5 * (gram + gram.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Matrix> eig(gram);
  const Vector ascending = eig.eigenvalues();
  MdsResult result;
  result.eigenvalues = ascending.reverse();
  const Matrix vectors = eig.eigenvectors().rowwise().reverse();

  const double largest = result.eigenvalues.cwiseAbs().maxCoeff();
  const double threshold = kMdsZeroTolerance * largest;
  double negative = 0.0, all = 0.0;
  for (Index i = 0; i < n; ++i) {
    const double lambda = result.eigenvalues(i);
    all += std::abs(lambda);
    if (lambda > threshold) {
      ++result.positive_count;
    } else if (lambda < -threshold) {
      ++result.negative_count;
      negative += -lambda;
    } else {
      ++result.zero_count;
    }
  }
  result.negative_mass_ratio = all > 0.0 ? negative / all : 0.0;

  const Index dims = std::min(k, result.positive_count);
  result.truncated = dims < k;
  result.embedding.resize(n, dims);
  for (Index c = 0; c < dims; ++c) {
    result.embedding.col(c) = vectors.col(c) * std::sqrt(result.eigenvalues(c));
  }
  return result;
}

}  // namespace latentgeo
