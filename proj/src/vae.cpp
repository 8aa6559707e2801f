#include "latentgeo/vae.hpp"

#include "latentgeo/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <numbers>
#include <random>

namespace latentgeo {

namespace {

struct BatchTrace {
  std::vector<Matrix> inputs;
  std::vector<Matrix> pre_activations;
  Matrix output;
};

Matrix activate(const Activation& act, const Matrix& a) {
  return a.unaryExpr([&](double v) { return act.apply(v); });
}

Matrix slope(const Activation& act, const Matrix& a) {
  return a.unaryExpr([&](double v) { return act.derivative(v); });
}

Matrix affine(const DenseLayer& layer, const Matrix& x) {
  return (layer.weights * x).colwise() + layer.bias;
}

BatchTrace forward_batch(const std::vector<DenseLayer>& layers, const Matrix& x) {
  BatchTrace t;
  Matrix y = x;
  for (const auto& layer : layers) {
    Matrix a = affine(layer, y);
    t.inputs.push_back(std::move(y));
    y = activate(layer.activation, a);
    t.pre_activations.push_back(std::move(a));
  }
  t.output = std::move(y);
  return t;
}

Index layer_size(const DenseLayer& layer) { return layer.weights.size() + layer.bias.size(); }

// Writes d loss / d (W, b) for one layer at grad[offset...] given d loss / d
// pre-activation.
void store_layer_gradient(const Matrix& d_pre, const Matrix& input, Vector& grad,
                          Index offset, const DenseLayer& layer) {
  const Matrix d_w = d_pre * input.transpose();
  grad.segment(offset, layer.weights.size()) =
      Eigen::Map<const Vector>(d_w.data(), d_w.size());
  grad.segment(offset + layer.weights.size(), layer.bias.size()) = d_pre.rowwise().sum();
}

// Returns d loss / d input; parameter gradients go to grad starting at offset.
Matrix backward_batch(const std::vector<DenseLayer>& layers, const BatchTrace& t,
                      Matrix d_out, Vector& grad, Index offset) {
  std::vector<Index> offsets(layers.size());
  for (std::size_t l = 0; l < layers.size(); ++l) {
    offsets[l] = offset;
    offset += layer_size(layers[l]);
  }
  for (std::size_t l = layers.size(); l-- > 0;) {
    const Matrix d_pre =
        d_out.cwiseProduct(slope(layers[l].activation, t.pre_activations[l]));
    store_layer_gradient(d_pre, t.inputs[l], grad, offsets[l], layers[l]);
    d_out = layers[l].weights.transpose() * d_pre;
  }
  return d_out;
}

// log(sigmoid(a)) without overflow.
double log_sigmoid(double a) {
  return a >= 0.0 ? -std::log1p(std::exp(-a)) : a - std::log1p(std::exp(a));
}

template <typename Visit>
void for_each_layer(VaeModel& model, Visit&& visit) {
  for (auto& layer : model.encoder_trunk.mutable_layers()) visit(layer);
  visit(model.mean_head);
  visit(model.stddev_head);
  for (auto& layer : model.decoder.mutable_layers()) visit(layer);
}

}  // namespace

MlpModel VaeModel::encoder() const {
  std::vector<DenseLayer> layers = encoder_trunk.layers();
  layers.push_back(mean_head);
  return MlpModel(std::move(layers));
}

VaeModel make_vae(Index ambient_dim, Index latent_dim, Index hidden, std::uint64_t seed) {
  if (ambient_dim < 1 || latent_dim < 1 || hidden < 1) {
    throw std::invalid_argument("VAE dimensions must be positive");
  }
  std::mt19937_64 rng(seed);
  MlpModel trunk({random_layer(ambient_dim, hidden, Activation::elu(), rng)});
  DenseLayer mean = random_layer(hidden, latent_dim, Activation::identity(), rng);
  DenseLayer stddev = random_layer(hidden, latent_dim, Activation::sigmoid(), rng);
  MlpModel decoder({random_layer(latent_dim, hidden, Activation::elu(), rng),
                    random_layer(hidden, ambient_dim, Activation::identity(), rng)});
  return {std::move(trunk), std::move(mean), std::move(stddev), std::move(decoder)};
}

Index parameter_count(const VaeModel& model) {
  Index n = 0;
  for_each_layer(const_cast<VaeModel&>(model), [&](const DenseLayer& l) { n += layer_size(l); });
  return n;
}

Vector parameter_vector(const VaeModel& model) {
  Vector params(parameter_count(model));
  Index at = 0;
  for_each_layer(const_cast<VaeModel&>(model), [&](const DenseLayer& l) {
    params.segment(at, l.weights.size()) = Eigen::Map<const Vector>(l.weights.data(), l.weights.size());
    at += l.weights.size();
    params.segment(at, l.bias.size()) = l.bias;
    at += l.bias.size();
  });
  return params;
}

void set_parameter_vector(VaeModel& model, const Vector& params) {
  if (params.size() != parameter_count(model)) {
    throw DimensionError("parameter vector length does not match the model");
  }
  if (!params.allFinite()) throw NumericalError("non-finite parameters");
  Index at = 0;
  for_each_layer(model, [&](DenseLayer& l) {
    Eigen::Map<Vector>(l.weights.data(), l.weights.size()) = params.segment(at, l.weights.size());
    at += l.weights.size();
    l.bias = params.segment(at, l.bias.size());
    at += l.bias.size();
  });
}

ElboTerms elbo_loss(const VaeModel& model, const Matrix& batch, const Matrix& noise,
                    double likelihood_variance) {
  if (!(likelihood_variance > 0.0)) {
    throw std::invalid_argument("likelihood variance must be positive");
  }
  const Index dim = model.ambient_dim();
  const Index latent = model.latent_dim();
  const Index n = batch.cols();
  if (batch.rows() != dim || noise.rows() != latent || noise.cols() != n) {
    throw DimensionError("batch or noise shape does not match the model");
  }

  const BatchTrace trunk = forward_batch(model.encoder_trunk.layers(), batch);
  const Matrix& hidden = trunk.output;
  const Matrix mu = affine(model.mean_head, hidden);
  const Matrix s_pre = affine(model.stddev_head, hidden);
  const Matrix sigma = activate(model.stddev_head.activation, s_pre);
  const Matrix z = mu + sigma.cwiseProduct(noise);
  const BatchTrace dec = forward_batch(model.decoder.layers(), z);
  const Matrix residual = dec.output - batch;

  ElboTerms out;
  out.reconstruction = 0.5 * residual.squaredNorm() / likelihood_variance +
                       0.5 * static_cast<double>(n * dim) *
                           std::log(2.0 * std::numbers::pi * likelihood_variance);
  const double log_sigma_sum = s_pre.unaryExpr([](double a) { return log_sigmoid(a); }).sum();
  out.kl = 0.5 * (mu.squaredNorm() + sigma.squaredNorm() - static_cast<double>(n * latent)) -
           log_sigma_sum;
  out.loss = out.reconstruction + out.kl;
  if (!std::isfinite(out.loss)) throw NumericalError("non-finite ELBO");

  out.gradient = Vector::Zero(parameter_count(model));
  const auto& trunk_layers = model.encoder_trunk.layers();
  Index trunk_size = 0;
  for (const auto& l : trunk_layers) trunk_size += layer_size(l);
  const Index mean_offset = trunk_size;
  const Index stddev_offset = mean_offset + layer_size(model.mean_head);
  const Index decoder_offset = stddev_offset + layer_size(model.stddev_head);

  const Matrix d_z = backward_batch(model.decoder.layers(), dec, residual / likelihood_variance,
                                    out.gradient, decoder_offset);
  const Matrix d_mu = d_z + mu;
  // d/ds_pre of [d_z . noise * sigma + sigma^2/2 - log sigma], sigma = sigmoid(s_pre).
  const Matrix one_minus = Matrix::Ones(latent, n) - sigma;
  const Matrix d_s_pre =
      (d_z.cwiseProduct(noise) + sigma).cwiseProduct(sigma).cwiseProduct(one_minus) - one_minus;
  store_layer_gradient(d_mu, hidden, out.gradient, mean_offset, model.mean_head);
  store_layer_gradient(d_s_pre, hidden, out.gradient, stddev_offset, model.stddev_head);
  const Matrix d_hidden = model.mean_head.weights.transpose() * d_mu +
                          model.stddev_head.weights.transpose() * d_s_pre;
  backward_batch(trunk_layers, trunk, d_hidden, out.gradient, 0);
  return out;
}

TrainConfig TrainConfig::full() {
  TrainConfig c;
  c.batch_size = 100;
  c.learning_rate = 1e-4;
  c.iterations = 100000;
  return c;
}

TrainConfig TrainConfig::desk() {
  TrainConfig c;
  c.learning_rate = 1e-7;
  c.likelihood_variance = 1e-3;
  c.iterations = 20000;
  return c;
}

void TrainConfig::validate() const {
  if (batch_size < 1 || iterations < 0 || hidden < 1 || latent_dim < 1) {
    throw std::invalid_argument("training sizes must be positive");
  }
  if (!(learning_rate > 0.0) || !(likelihood_variance > 0.0)) {
    throw std::invalid_argument("learning rate and likelihood variance must be positive");
  }
}

TrainResult train_vae(std::span<const AmbientPoint> data, const TrainConfig& config) {
  config.validate();
  if (data.empty()) throw std::invalid_argument("training set is empty");
  const Index dim = data.front().size();
  Matrix samples(dim, static_cast<Index>(data.size()));
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (data[i].size() != dim) throw DimensionError("training points differ in dimension");
    samples.col(static_cast<Index>(i)) = data[i];
  }

  TrainResult result{make_vae(dim, config.latent_dim, config.hidden, config.seed), {}};
  result.loss_history.reserve(config.iterations);
  std::mt19937_64 rng(config.seed + 1);
  std::uniform_int_distribution<Index> pick(0, samples.cols() - 1);
  std::normal_distribution<double> normal(0.0, 1.0);

  Vector params = parameter_vector(result.model);
  Matrix batch(dim, config.batch_size);
  Matrix noise(config.latent_dim, config.batch_size);
  for (int it = 0; it < config.iterations; ++it) {
    for (Index c = 0; c < config.batch_size; ++c) batch.col(c) = samples.col(pick(rng));
    for (Index c = 0; c < noise.size(); ++c) noise(c) = normal(rng);
    ElboTerms terms;
    try {
      terms = elbo_loss(result.model, batch, noise, config.likelihood_variance);
    } catch (const NumericalError&) {
      throw TrainingDivergedError("loss became non-finite at iteration " + std::to_string(it));
    }
    params -= config.learning_rate * terms.gradient;
    if (!params.allFinite()) {
      throw TrainingDivergedError("parameters became non-finite at iteration " +
                                  std::to_string(it));
    }
    set_parameter_vector(result.model, params);
    result.loss_history.push_back(terms.loss / static_cast<double>(config.batch_size));
  }
  return result;
}

LatentPoint encode_mean(const VaeModel& model, const AmbientPoint& x) {
  if (x.size() != model.ambient_dim()) {
    throw DimensionError("encode_mean: point does not match the ambient dimension");
  }
  return model.mean_head.forward(model.encoder_trunk.evaluate(x));
}

void save_vae(const VaeModel& model, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  save_model(model.encoder(), directory / "encoder.json");
  save_model(model.decoder, directory / "decoder.json");
  save_model(MlpModel({model.stddev_head}), directory / "stddev_head.json");
  const nlohmann::json manifest = {{"format", "latentgeo-vae"},
                                   {"ambient_dim", model.ambient_dim()},
                                   {"latent_dim", model.latent_dim()},
                                   {"encoder", "encoder.json"},
                                   {"decoder", "decoder.json"},
                                   {"stddev_head", "stddev_head.json"}};
  std::ofstream out(directory / "manifest.json");
  if (!out) throw IoError("cannot write VAE manifest in " + directory.string());
  out << manifest.dump(2) << '\n';
}

VaeModel load_vae(const std::filesystem::path& directory) {
  std::ifstream in(directory / "manifest.json");
  if (!in) throw IoError("no VAE manifest in " + directory.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("VAE manifest is not valid JSON: ") + e.what());
  }
  auto file = [&](const char* key) {
    if (!manifest.contains(key) || !manifest[key].is_string()) {
      throw FormatError(std::string("VAE manifest lacks \"") + key + "\"");
    }
    return directory / manifest[key].get<std::string>();
  };
  MlpModel encoder = load_model(file("encoder"));
  MlpModel decoder = load_model(file("decoder"));
  MlpModel stddev = load_model(file("stddev_head"));
  if (encoder.layers().size() < 2 || stddev.layers().size() != 1) {
    throw FormatError("VAE encoder needs a trunk and a mean head");
  }
  std::vector<DenseLayer> trunk(encoder.layers().begin(), encoder.layers().end() - 1);
  VaeModel model{MlpModel(std::move(trunk)), encoder.layers().back(), stddev.layers().front(),
                 std::move(decoder)};
  if (model.stddev_head.input_dim() != model.mean_head.input_dim() ||
      model.stddev_head.output_dim() != model.latent_dim() ||
      model.decoder.input_dim() != model.latent_dim() ||
      model.decoder.output_dim() != model.ambient_dim()) {
    throw DimensionError("VAE parts do not fit together");
  }
  return model;
}

}  // namespace latentgeo
