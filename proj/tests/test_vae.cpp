#include "latentgeo/analytic.hpp"
#include "latentgeo/errors.hpp"
#include "latentgeo/vae.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <random>

using namespace latentgeo;

namespace {

Matrix random_matrix(Index rows, Index cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Matrix m(rows, cols);
  for (Index i = 0; i < m.size(); ++i) m(i) = normal(rng);
  return m;
}

std::filesystem::path scratch(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("latentgeo_vae_" + name);
  std::filesystem::remove_all(dir);
  return dir;
}

}  // namespace

TEST(VaeShape, MakeVae) {
  const VaeModel m = make_vae(3, 2, 100, 0);
  EXPECT_EQ(m.ambient_dim(), 3);
  EXPECT_EQ(m.latent_dim(), 2);
  EXPECT_EQ(m.decoder.input_dim(), 2);
  EXPECT_EQ(m.decoder.output_dim(), 3);
  EXPECT_EQ(m.stddev_head.activation.kind, ActivationKind::sigmoid);
  EXPECT_EQ(m.mean_head.activation.kind, ActivationKind::identity);
  // 3*100+100, 100*2+2 twice, 2*100+100, 100*3+3.
  EXPECT_EQ(parameter_count(m), 400 + 202 + 202 + 300 + 303);
  EXPECT_THROW(make_vae(0, 2, 10, 0), std::invalid_argument);
}

TEST(VaeShape, ParameterVectorRoundTrip) {
  VaeModel m = make_vae(3, 2, 7, 4);
  const Vector p = parameter_vector(m);
  const Vector shifted = p + Vector::Constant(p.size(), 0.25);
  set_parameter_vector(m, shifted);
  EXPECT_EQ(parameter_vector(m), shifted);
  EXPECT_EQ(m.encoder_trunk.layers()[0].weights(0, 0), p(0) + 0.25);
  EXPECT_THROW(set_parameter_vector(m, Vector::Zero(3)), DimensionError);
}

TEST(Elbo, KlVanishesAtThePrior) {
  VaeModel m = make_vae(3, 2, 5, 1);
  m.mean_head.weights.setZero();
  m.mean_head.bias.setZero();
  m.stddev_head.weights.setZero();
  m.stddev_head.bias.setConstant(40.0);
  const Matrix x = random_matrix(3, 4, 2);
  const ElboTerms t = elbo_loss(m, x, random_matrix(2, 4, 3));
  EXPECT_NEAR(t.kl, 0.0, 1e-12);
}

TEST(Elbo, KlClosedForm) {
  VaeModel m = make_vae(2, 1, 3, 1);
  m.mean_head.weights.setZero();
  m.mean_head.bias.setConstant(0.5);
  m.stddev_head.weights.setZero();
  m.stddev_head.bias.setZero();  // sigma = 1/2
  const ElboTerms t = elbo_loss(m, random_matrix(2, 1, 5), Matrix::Zero(1, 1));
  const double s = 0.5;
  EXPECT_NEAR(t.kl, 0.5 * (0.25 + s * s - 1.0) - std::log(s), 1e-14);
}

TEST(Elbo, PerfectReconstructionLeavesTheConstant) {
  VaeModel m = make_vae(3, 2, 4, 2);
  // Constant decoder output.
  std::vector<DenseLayer> layers = m.decoder.layers();
  for (auto& l : layers) {
    l.weights.setZero();
    l.bias.setZero();
  }
  layers.back().bias = Vector{{1.0, -2.0, 0.5}};
  m.decoder = MlpModel(std::move(layers));
  Matrix x(3, 5);
  x.colwise() = Vector{{1.0, -2.0, 0.5}};
  const double variance = 0.3;
  const ElboTerms t = elbo_loss(m, x, random_matrix(2, 5, 1), variance);
  EXPECT_NEAR(t.reconstruction, 0.5 * 5 * 3 * std::log(2 * std::numbers::pi * variance), 1e-12);
}

TEST(Elbo, GradientMatchesFiniteDifferences) {
  VaeModel m = make_vae(3, 2, 6, 7);
  Vector p = parameter_vector(m);
  // Non-zero biases so every branch is exercised.
  std::mt19937_64 rng(8);
  std::normal_distribution<double> normal(0.0, 0.3);
  for (Index i = 0; i < p.size(); ++i) p(i) += normal(rng);
  set_parameter_vector(m, p);
  const Matrix x = random_matrix(3, 2, 9);
  const Matrix noise = random_matrix(2, 2, 10);
  const double variance = 0.5;
  const Vector grad = elbo_loss(m, x, noise, variance).gradient;
  Vector fd(p.size());
  const double h = 1e-6;
  for (Index i = 0; i < p.size(); ++i) {
    Vector up = p, down = p;
    up(i) += h;
    down(i) -= h;
    set_parameter_vector(m, up);
    const double lu = elbo_loss(m, x, noise, variance).loss;
    set_parameter_vector(m, down);
    const double ld = elbo_loss(m, x, noise, variance).loss;
    fd(i) = (lu - ld) / (2 * h);
  }
  EXPECT_LT((grad - fd).norm() / fd.norm(), 1e-4);
}

TEST(Elbo, RejectsBadShapes) {
  const VaeModel m = make_vae(3, 2, 4, 0);
  EXPECT_THROW(elbo_loss(m, Matrix::Zero(2, 4), Matrix::Zero(2, 4)), DimensionError);
  EXPECT_THROW(elbo_loss(m, Matrix::Zero(3, 4), Matrix::Zero(2, 3)), DimensionError);
  EXPECT_THROW(elbo_loss(m, Matrix::Zero(3, 4), Matrix::Zero(2, 4), 0.0), std::invalid_argument);
}

TEST(Training, ShortRunLowersTheLoss) {
  const auto data = sample_paraboloid(2000, 3);
  TrainConfig c = TrainConfig::desk();
  c.iterations = 500;
  c.hidden = 32;
  const TrainResult r = train_vae(data, c);
  ASSERT_EQ(r.loss_history.size(), 500u);
  double first = 0.0, last = 0.0;
  for (int i = 0; i < 50; ++i) {
    first += r.loss_history[static_cast<std::size_t>(i)];
    last += r.loss_history[r.loss_history.size() - 1 - static_cast<std::size_t>(i)];
  }
  EXPECT_LT(last, first);
}

TEST(Training, DeterministicPerSeed) {
  const auto data = sample_paraboloid(500, 1);
  TrainConfig c;
  c.iterations = 30;
  c.hidden = 8;
  c.learning_rate = 1e-5;
  const TrainResult a = train_vae(data, c);
  const TrainResult b = train_vae(data, c);
  EXPECT_EQ(parameter_vector(a.model), parameter_vector(b.model));
  EXPECT_EQ(a.loss_history, b.loss_history);
  c.seed = 1;
  EXPECT_NE(parameter_vector(train_vae(data, c).model), parameter_vector(a.model));
}

TEST(Training, DivergenceIsReported) {
  const auto data = sample_paraboloid(500, 1);
  TrainConfig c;
  c.iterations = 2000;
  c.hidden = 8;
  c.learning_rate = 10.0;
  c.likelihood_variance = 1e-3;
  EXPECT_THROW(train_vae(data, c), TrainingDivergedError);
}

TEST(Training, ConfigValidation) {
  TrainConfig c;
  c.batch_size = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = TrainConfig{};
  c.learning_rate = -1.0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  const TrainConfig p = TrainConfig::full();
  EXPECT_EQ(p.batch_size, 100);
  EXPECT_EQ(p.learning_rate, 1e-4);
  EXPECT_EQ(p.iterations, 100000);
  EXPECT_THROW(train_vae(std::vector<AmbientPoint>{}, TrainConfig{}), std::invalid_argument);
}

TEST(EncodeMean, ZeroWeightsGiveTheBias) {
  VaeModel m = make_vae(3, 2, 4, 0);
  m.mean_head.weights.setZero();
  m.mean_head.bias = Vector{{0.3, -0.7}};
  EXPECT_EQ(encode_mean(m, Vector{{1.0, 2.0, 3.0}}), m.mean_head.bias);
  EXPECT_EQ(encode_mean(m, Vector{{1.0, 2.0, 3.0}}), m.encoder().forward(Vector{{1.0, 2.0, 3.0}}));
  EXPECT_THROW(encode_mean(m, Vector::Zero(2)), DimensionError);
}

TEST(VaeIo, SaveLoadRoundTrip) {
  const VaeModel m = make_vae(3, 2, 9, 5);
  const auto dir = scratch("roundtrip");
  save_vae(m, dir);
  EXPECT_TRUE(std::filesystem::exists(dir / "encoder.json"));
  EXPECT_TRUE(std::filesystem::exists(dir / "decoder.json"));
  const VaeModel back = load_vae(dir);
  EXPECT_EQ(parameter_vector(back), parameter_vector(m));
  std::filesystem::remove_all(dir);
}

TEST(VaeIo, MissingDirectory) {
  EXPECT_THROW(load_vae(scratch("missing")), IoError);
}
