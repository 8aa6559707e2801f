#pragma once

// A small fully connected VAE: ELU trunk, Gaussian posterior with a mean
// head and a sigmoid std-dev head, ELU decoder. The decoder is the
// generator g, trunk + mean head is the encoder h.

#include "latentgeo/manifold.hpp"
#include "latentgeo/mlp.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace latentgeo {

struct VaeModel {
  MlpModel encoder_trunk;  // D -> hidden
  DenseLayer mean_head;    // hidden -> d, identity
  DenseLayer stddev_head;  // hidden -> d, sigmoid
  MlpModel decoder;        // d -> D

  Index ambient_dim() const { return encoder_trunk.input_dim(); }
  Index latent_dim() const { return mean_head.output_dim(); }

  /// The posterior-mean map h as a standalone network.
  MlpModel encoder() const;
};

/// FC-hidden ELU trunk, FC-d heads, decoder FC-hidden ELU then FC-D.
/// Weights ~ N(0, 1/fan_in), biases zero.
VaeModel make_vae(Index ambient_dim, Index latent_dim, Index hidden, std::uint64_t seed);

Index parameter_count(const VaeModel& model);
/// Trunk layers, mean head, std-dev head, decoder layers; per layer the
/// weights (column-major) followed by the bias.
Vector parameter_vector(const VaeModel& model);
void set_parameter_vector(VaeModel& model, const Vector& params);

/// Sums over the batch of the negative ELBO and its two parts.
struct ElboTerms {
  double loss = 0.0;
  double reconstruction = 0.0;  // 1/2 |x - g(z)|^2 / s2 + D/2 log(2 pi s2)
  double kl = 0.0;              // KL(N(mu, sigma^2) || N(0, I))
  Vector gradient;              // d loss / d parameter_vector
};

/// Negative ELBO for a batch (columns of `batch`) with the
/// reparameterised sample z = mu + sigma * noise (columns of `noise`).
ElboTerms elbo_loss(const VaeModel& model, const Matrix& batch, const Matrix& noise,
                    double likelihood_variance = 1.0);

struct TrainConfig {
  int batch_size = 100;
  double learning_rate = 1e-4;
  int iterations = 20000;
  std::uint64_t seed = 0;
  double likelihood_variance = 1.0;
  Index hidden = 100;
  Index latent_dim = 2;

  /// Batch 100, learning rate 1e-4, 100k iterations.
  static TrainConfig full();
  /// 20k iterations at learning rate 1e-7 with likelihood variance 1e-3.
  /// The loss is a batch sum, so the step on the reconstruction term is
  /// lr * batch / variance = 1e-2 per sample; larger steps diverge on the
  /// heavy-tailed third coordinate.
  static TrainConfig desk();
  void validate() const;
};

struct TrainResult {
  VaeModel model;
  /// Mean per-sample loss of every minibatch.
  std::vector<double> loss_history;
};

/// Minibatch SGD; batches drawn uniformly with replacement. Deterministic
/// for a fixed seed. Throws TrainingDivergedError on a non-finite loss.
TrainResult train_vae(std::span<const AmbientPoint> data, const TrainConfig& config);

LatentPoint encode_mean(const VaeModel& model, const AmbientPoint& x);

// A saved model is a directory holding encoder.json (h), decoder.json (g),
// stddev_head.json and manifest.json naming them.
void save_vae(const VaeModel& model, const std::filesystem::path& directory);
VaeModel load_vae(const std::filesystem::path& directory);

}  // namespace latentgeo
