#pragma once

// Fully connected networks y = phi(W x + b), stacked, with exact
// Jacobians. Used as generator g and encoder h.

#include "latentgeo/manifold.hpp"

#include <filesystem>
#include <iosfwd>
#include <random>
#include <string>
#include <string_view>
#include <vector>

namespace latentgeo {

enum class ActivationKind { elu, tanh, identity, sigmoid };

struct Activation {
  ActivationKind kind = ActivationKind::identity;
  double alpha = 1.0;  // ELU only

  static Activation elu(double alpha = 1.0);
  static Activation tanh() { return {ActivationKind::tanh, 1.0}; }
  static Activation identity() { return {ActivationKind::identity, 1.0}; }
  static Activation sigmoid() { return {ActivationKind::sigmoid, 1.0}; }

  double apply(double x) const;
  double derivative(double x) const;

  std::string_view name() const;
  static Activation from_name(std::string_view name, double alpha = 1.0);

  friend bool operator==(const Activation&, const Activation&) = default;
};

struct DenseLayer {
  Matrix weights;  // out x in
  Vector bias;     // out
  Activation activation;

  DenseLayer(Matrix w, Vector b, Activation act);

  Index input_dim() const { return weights.cols(); }
  Index output_dim() const { return weights.rows(); }

  Vector forward(const Vector& x) const;

  friend bool operator==(const DenseLayer& a, const DenseLayer& b) {
    return a.activation == b.activation && a.weights == b.weights &&
           a.bias == b.bias;
  }
};

/// Intermediate values of one forward pass. inputs[l] feeds layer l,
/// pre_activations[l] = W_l inputs[l] + b_l.
struct ForwardTrace {
  std::vector<Vector> inputs;
  std::vector<Vector> pre_activations;
  Vector output;
};

class MlpModel final : public DifferentiableMap {
 public:
  explicit MlpModel(std::vector<DenseLayer> layers);

  Index input_dim() const override { return layers_.front().input_dim(); }
  Index output_dim() const override { return layers_.back().output_dim(); }

  const std::vector<DenseLayer>& layers() const { return layers_; }
  std::vector<DenseLayer>& mutable_layers() { return layers_; }

  Vector forward(const Vector& x) const { return evaluate(x); }
  ForwardTrace trace(const Vector& x) const;

  friend bool operator==(const MlpModel& a, const MlpModel& b) {
    return a.layers_ == b.layers_;
  }

 protected:
  Vector do_evaluate(const Vector& x) const override;
  Matrix do_jacobian(const Vector& x) const override;

 private:
  std::vector<DenseLayer> layers_;
};

/// Zero-mean Gaussian weights with std 1/sqrt(fan_in), zero bias.
DenseLayer random_layer(Index in, Index out, Activation act, std::mt19937_64& rng);

struct ImmersionReport {
  std::vector<Index> weight_ranks;
  std::vector<bool> weight_rank_ok;
  std::vector<Index> jacobian_ranks;
  std::vector<bool> jacobian_rank_ok;

  bool all_ok() const;
};

/// Numerical ranks of every weight matrix (maximal = min(out, in)) and of
/// the Jacobian at each sample (must equal the input dimension).
ImmersionReport check_immersion(const MlpModel& model,
                                std::span<const LatentPoint> samples);

// Model documents:
//   {"layers": [{"weights": [[...], ...], "bias": [...],
//                "activation": "elu"|"tanh"|"identity"|"sigmoid",
//                "alpha": 1.0}]}
// "alpha" is optional and defaults to 1.0. Shapes are inferred.
void write_model(const MlpModel& model, std::ostream& out);
MlpModel read_model(std::istream& in);
void save_model(const MlpModel& model, const std::filesystem::path& path);
MlpModel load_model(const std::filesystem::path& path);

}  // namespace latentgeo
