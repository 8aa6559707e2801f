#include "latentgeo/errors.hpp"
#include "latentgeo/mlp.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace latentgeo;

TEST(Forward, IdentityLayer) {
  MlpModel net({DenseLayer(Matrix::Identity(2, 2), Vector::Zero(2), Activation::identity())});
  EXPECT_EQ(net.forward(Vector{{1.0, 2.0}}), (Vector{{1.0, 2.0}}));
}

TEST(Forward, EluValues) {
  const Activation elu = Activation::elu();
  EXPECT_EQ(elu.apply(0.0), 0.0);
  EXPECT_NEAR(elu.apply(-1.0), std::exp(-1.0) - 1.0, 1e-15);
  EXPECT_NEAR(elu.apply(-1.0), -0.632121, 1e-6);
  EXPECT_EQ(elu.apply(2.5), 2.5);
  EXPECT_NEAR(Activation::elu(2.0).apply(-1.0), 2.0 * (std::exp(-1.0) - 1.0), 1e-15);
}

TEST(Forward, EluDerivativeContinuousAtZero) {
  const Activation elu = Activation::elu();
  EXPECT_EQ(elu.derivative(0.0), 1.0);
  EXPECT_EQ(elu.derivative(1e-300), 1.0);
  EXPECT_EQ(elu.derivative(-1e-300), 1.0);
}

TEST(Forward, ActivationDerivativesMatchFiniteDifferences) {
  for (const Activation act : {Activation::elu(), Activation::elu(0.5), Activation::tanh(),
                               Activation::sigmoid(), Activation::identity()}) {
    for (double x : {-3.0, -0.4, 0.3, 2.0}) {
      const double fd = (act.apply(x + 1e-6) - act.apply(x - 1e-6)) / 2e-6;
      EXPECT_NEAR(act.derivative(x), fd, 1e-8) << act.name() << " at " << x;
    }
  }
}

TEST(Forward, SigmoidStableAtExtremes) {
  const Activation s = Activation::sigmoid();
  EXPECT_EQ(s.apply(-1000.0), 0.0);
  EXPECT_EQ(s.apply(1000.0), 1.0);
  EXPECT_EQ(s.apply(0.0), 0.5);
}

TEST(Forward, RejectsBadInput) {
  const MlpModel net = fixture::random_mlp({2, 3, 2}, Activation::elu(), 1);
  EXPECT_THROW(net.forward(Vector::Zero(3)), DimensionError);
  MlpModel huge({DenseLayer(Matrix::Constant(1, 1, 1e300), Vector::Zero(1), Activation::identity()),
                 DenseLayer(Matrix::Constant(1, 1, 1e300), Vector::Zero(1), Activation::identity())});
  EXPECT_THROW(huge.forward(Vector::Ones(1)), NumericalError);
}

TEST(DenseLayerType, ValidatesShapes) {
  EXPECT_THROW(DenseLayer(Matrix::Zero(2, 3), Vector::Zero(3), Activation::identity()),
               DimensionError);
  EXPECT_THROW(DenseLayer(Matrix(0, 0), Vector(0), Activation::identity()), DimensionError);
  EXPECT_THROW(DenseLayer(Matrix::Constant(1, 1, NAN), Vector::Zero(1), Activation::identity()),
               NumericalError);
  EXPECT_THROW(Activation::elu(0.0), std::invalid_argument);
}

TEST(MlpModelType, ChainMismatch) {
  EXPECT_THROW(MlpModel({DenseLayer(Matrix::Zero(3, 2), Vector::Zero(3), Activation::tanh()),
                         DenseLayer(Matrix::Zero(2, 4), Vector::Zero(2), Activation::tanh())}),
               DimensionError);
  EXPECT_THROW(MlpModel(std::vector<DenseLayer>{}), DimensionError);
}

TEST(ModelJacobian, LinearModelIsW) {
  const Matrix w{{1, 2}, {3, 4}, {5, 6}};
  MlpModel net({DenseLayer(w, Vector::Ones(3), Activation::identity())});
  EXPECT_EQ(net.jacobian(Vector{{-1.0, 2.0}}), w);
}

TEST(ModelJacobian, EluWithPositivePreActivationIsExactlyW) {
  const Matrix w{{1, 0.5}, {0.25, 2}};
  MlpModel net({DenseLayer(w, Vector::Constant(2, 10.0), Activation::elu())});
  EXPECT_EQ(net.jacobian(Vector{{0.1, 0.2}}), w);
}

TEST(ModelJacobian, ThreeLayerNetMatchesFiniteDifferences) {
  const MlpModel net = fixture::random_mlp({3, 7, 6, 4}, Activation::elu(), 4);
  std::mt19937_64 rng(99);
  for (int trial = 0; trial < 25; ++trial) {
    const Vector z = oracle::random_vector(3, rng);
    EXPECT_LT(oracle::relative_error(net.jacobian(z), oracle::fd_jacobian(net, z)), 1e-5);
  }
}

TEST(ModelJacobian, EqualsProductOfLayerJacobians) {
  const MlpModel net = fixture::random_mlp({2, 5, 4, 3}, Activation::tanh(), 8);
  const Vector z{{0.3, -0.2}};
  Matrix product = Matrix::Identity(2, 2);
  Vector y = z;
  for (const auto& layer : net.layers()) {
    MlpModel single({layer});
    product = single.jacobian(y) * product;
    y = single.forward(y);
  }
  EXPECT_LT((product - net.jacobian(z)).norm(), 1e-13);
}

TEST(CheckImmersion, DuplicatedRowFailsWeightRank) {
  Matrix w{{1, 2}, {1, 2}, {0, 0}};
  MlpModel net({DenseLayer(w, Vector::Zero(3), Activation::elu())});
  const std::vector<LatentPoint> probes{Vector{{0.1, 0.1}}};
  const ImmersionReport report = check_immersion(net, probes);
  ASSERT_EQ(report.weight_rank_ok.size(), 1u);
  EXPECT_FALSE(report.weight_rank_ok[0]);
  EXPECT_EQ(report.weight_ranks[0], 1);
  EXPECT_FALSE(report.jacobian_rank_ok[0]);
  EXPECT_FALSE(report.all_ok());
}

TEST(CheckImmersion, RandomGaussianWeightsAreMaximalRank) {
  const MlpModel net = fixture::random_mlp({2, 100, 3}, Activation::elu(), 10);
  std::mt19937_64 rng(1);
  std::vector<LatentPoint> probes;
  for (int i = 0; i < 100; ++i) probes.push_back(oracle::random_vector(2, rng));
  EXPECT_TRUE(check_immersion(net, probes).all_ok());
}

TEST(CheckImmersion, IdentityNetwork) {
  MlpModel net({DenseLayer(Matrix::Identity(2, 2), Vector::Zero(2), Activation::identity())});
  const std::vector<LatentPoint> probes{Vector::Zero(2), Vector::Ones(2)};
  EXPECT_TRUE(check_immersion(net, probes).all_ok());
}

TEST(ModelIo, RoundTripIsBitExact) {
  std::mt19937_64 rng(3);
  std::vector<DenseLayer> layers{
      random_layer(2, 9, Activation::elu(0.7), rng), random_layer(9, 4, Activation::tanh(), rng),
      random_layer(4, 4, Activation::sigmoid(), rng), random_layer(4, 3, Activation::identity(), rng)};
  for (auto& l : layers) l.bias = Vector::Random(l.bias.size()) / 3.0;
  const MlpModel net(std::move(layers));
  std::stringstream buf;
  write_model(net, buf);
  const MlpModel back = read_model(buf);
  EXPECT_TRUE(back == net);
}

TEST(ModelIo, ChainMismatchInFile) {
  std::istringstream in(R"({"layers": [
    {"weights": [[1, 0], [0, 1], [1, 1]], "bias": [0, 0, 0], "activation": "elu"},
    {"weights": [[1, 0]], "bias": [0], "activation": "identity"}]})");
  EXPECT_THROW(read_model(in), DimensionError);
}

TEST(ModelIo, EluAlphaDefaultsToOne) {
  std::istringstream in(R"({"layers": [{"weights": [[2]], "bias": [0.5], "activation": "elu"}]})");
  const MlpModel net = read_model(in);
  EXPECT_EQ(net.layers()[0].activation.kind, ActivationKind::elu);
  EXPECT_EQ(net.layers()[0].activation.alpha, 1.0);
}

TEST(ModelIo, MalformedDocuments) {
  const char* docs[] = {
      "not json",
      "{}",
      R"({"layers": []})",
      R"({"layers": [{"weights": [[1]], "bias": [0], "activation": "relu"}]})",
      R"({"layers": [{"weights": [[1, 2], [3]], "bias": [0, 0], "activation": "tanh"}]})",
      R"({"layers": [{"weights": [["a"]], "bias": [0], "activation": "tanh"}]})",
      R"({"layers": [{"bias": [0], "activation": "tanh"}]})",
  };
  for (const char* doc : docs) {
    std::istringstream in(doc);
    EXPECT_THROW(read_model(in), FormatError) << doc;
  }
  std::istringstream wrong_bias(R"({"layers": [{"weights": [[1]], "bias": [0, 1], "activation": "tanh"}]})");
  EXPECT_THROW(read_model(wrong_bias), DimensionError);
}

TEST(ModelIo, MissingFile) {
  EXPECT_THROW(load_model("/nonexistent/model.json"), IoError);
}
