#include "latentgeo/mlp.hpp"

#include "latentgeo/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>

namespace latentgeo {

using nlohmann::json;

Activation Activation::elu(double alpha) {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    throw std::invalid_argument("ELU alpha must be positive");
  }
  return {ActivationKind::elu, alpha};
}

double Activation::apply(double x) const {
  switch (kind) {
    case ActivationKind::elu:
      return x > 0.0 ? x : alpha * std::expm1(x);
    case ActivationKind::tanh:
      return std::tanh(x);
    case ActivationKind::sigmoid:
      if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
      return std::exp(x) / (1.0 + std::exp(x));
    case ActivationKind::identity:
      break;
  }
  return x;
}

double Activation::derivative(double x) const {
  switch (kind) {
    case ActivationKind::elu:
      // Left branch alpha*e^x meets the right branch value 1 at x = 0
      // exactly when alpha = 1.
      return x > 0.0 ? 1.0 : alpha * std::exp(x);
    case ActivationKind::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case ActivationKind::sigmoid: {
      const double s = apply(x);
      return s * (1.0 - s);
    }
    case ActivationKind::identity:
      break;
  }
  return 1.0;
}

std::string_view Activation::name() const {
  switch (kind) {
    case ActivationKind::elu:
      return "elu";
    case ActivationKind::tanh:
      return "tanh";
    case ActivationKind::sigmoid:
      return "sigmoid";
    case ActivationKind::identity:
      break;
  }
  return "identity";
}

Activation Activation::from_name(std::string_view name, double alpha) {
  if (name == "elu") return elu(alpha);
  if (name == "tanh") return tanh();
  if (name == "sigmoid") return sigmoid();
  if (name == "identity") return identity();
  throw FormatError("unknown activation \"" + std::string(name) + "\"");
}

DenseLayer::DenseLayer(Matrix w, Vector b, Activation act)
    : weights(std::move(w)), bias(std::move(b)), activation(act) {
  if (weights.rows() == 0 || weights.cols() == 0) {
    throw DimensionError("dense layer with an empty weight matrix");
  }
  if (bias.size() != weights.rows()) {
    throw DimensionError("dense layer bias length " + std::to_string(bias.size()) +
                         " does not match " + std::to_string(weights.rows()) +
                         " weight rows");
  }
  if (!weights.allFinite() || !bias.allFinite()) {
    throw NumericalError("dense layer has non-finite parameters");
  }
}

Vector DenseLayer::forward(const Vector& x) const {
  Vector a = weights * x + bias;
  if (!a.allFinite()) throw NumericalError("non-finite activation input");
  return a.unaryExpr([this](double v) { return activation.apply(v); });
}

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw DimensionError("model needs at least one layer");
  for (std::size_t l = 1; l < layers_.size(); ++l) {
    if (layers_[l].input_dim() != layers_[l - 1].output_dim()) {
      throw DimensionError("layer dimension chain mismatch at layer " +
                           std::to_string(l) + ": expects " +
                           std::to_string(layers_[l].input_dim()) +
                           " inputs, previous layer emits " +
                           std::to_string(layers_[l - 1].output_dim()));
    }
  }
}

ForwardTrace MlpModel::trace(const Vector& x) const {
  if (x.size() != input_dim()) {
    throw DimensionError("model input dimension mismatch");
  }
  ForwardTrace t;
  t.inputs.reserve(layers_.size());
  t.pre_activations.reserve(layers_.size());
  Vector y = x;
  for (const auto& layer : layers_) {
    Vector a = layer.weights * y + layer.bias;
    if (!a.allFinite()) throw NumericalError("non-finite activation input");
    t.inputs.push_back(std::move(y));
    y = a.unaryExpr([&](double v) { return layer.activation.apply(v); });
    t.pre_activations.push_back(std::move(a));
  }
  t.output = std::move(y);
  return t;
}

Vector MlpModel::do_evaluate(const Vector& x) const {
  Vector y = x;
  for (const auto& layer : layers_) y = layer.forward(y);
  return y;
}

Matrix MlpModel::do_jacobian(const Vector& x) const {
  const ForwardTrace t = trace(x);
  Matrix j;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const auto& layer = layers_[l];
    const Vector slope = t.pre_activations[l].unaryExpr(
        [&](double v) { return layer.activation.derivative(v); });
    Matrix local = slope.asDiagonal() * layer.weights;
    j = (l == 0) ? std::move(local) : Matrix(local * j);
  }
  return j;
}

DenseLayer random_layer(Index in, Index out, Activation act, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0 / std::sqrt(static_cast<double>(in)));
  Matrix w(out, in);
  for (Index r = 0; r < out; ++r) {
    for (Index c = 0; c < in; ++c) w(r, c) = normal(rng);
  }
  return DenseLayer(std::move(w), Vector::Zero(out), act);
}

bool ImmersionReport::all_ok() const {
  for (bool ok : weight_rank_ok) {
    if (!ok) return false;
  }
  for (bool ok : jacobian_rank_ok) {
    if (!ok) return false;
  }
  return true;
}

ImmersionReport check_immersion(const MlpModel& model,
                                std::span<const LatentPoint> samples) {
  ImmersionReport report;
  for (const auto& layer : model.layers()) {
    const Index rank = numerical_rank(layer.weights);
    report.weight_ranks.push_back(rank);
    report.weight_rank_ok.push_back(
        rank == std::min(layer.weights.rows(), layer.weights.cols()));
  }
  for (const auto& z : samples) {
    const Index rank = numerical_rank(model.jacobian(z));
    report.jacobian_ranks.push_back(rank);
    report.jacobian_rank_ok.push_back(rank == model.input_dim());
  }
  return report;
}

namespace {

json layer_to_json(const DenseLayer& layer) {
  json rows = json::array();
  for (Index r = 0; r < layer.weights.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < layer.weights.cols(); ++c) row.push_back(layer.weights(r, c));
    rows.push_back(std::move(row));
  }
  json bias = json::array();
  for (Index r = 0; r < layer.bias.size(); ++r) bias.push_back(layer.bias(r));
  json out = {{"weights", std::move(rows)},
              {"bias", std::move(bias)},
              {"activation", std::string(layer.activation.name())}};
  if (layer.activation.kind == ActivationKind::elu) out["alpha"] = layer.activation.alpha;
  return out;
}

double number(const json& v, const char* what) {
  if (!v.is_number()) throw FormatError(std::string(what) + " must be a number");
  return v.get<double>();
}

DenseLayer layer_from_json(const json& doc, std::size_t index) {
  const std::string where = "layer " + std::to_string(index) + ": ";
  if (!doc.is_object()) throw FormatError(where + "expected an object");
  if (!doc.contains("weights") || !doc["weights"].is_array() || doc["weights"].empty()) {
    throw FormatError(where + "missing or empty \"weights\"");
  }
  if (!doc.contains("bias") || !doc["bias"].is_array()) {
    throw FormatError(where + "missing \"bias\"");
  }
  if (!doc.contains("activation") || !doc["activation"].is_string()) {
    throw FormatError(where + "missing \"activation\"");
  }
  const json& rows = doc["weights"];
  if (!rows[0].is_array() || rows[0].empty()) {
    throw FormatError(where + "weights must be a non-empty array of rows");
  }
  const auto n_rows = static_cast<Index>(rows.size());
  const auto n_cols = static_cast<Index>(rows[0].size());
  Matrix w(n_rows, n_cols);
  for (Index r = 0; r < n_rows; ++r) {
    const json& row = rows[r];
    if (!row.is_array() || static_cast<Index>(row.size()) != n_cols) {
      throw FormatError(where + "ragged weight rows");
    }
    for (Index c = 0; c < n_cols; ++c) w(r, c) = number(row[c], "weight");
  }
  const json& bias_doc = doc["bias"];
  Vector b(static_cast<Index>(bias_doc.size()));
  for (Index r = 0; r < b.size(); ++r) b(r) = number(bias_doc[r], "bias");

  double alpha = 1.0;
  if (doc.contains("alpha")) alpha = number(doc["alpha"], "alpha");
  const Activation act = Activation::from_name(doc["activation"].get<std::string>(), alpha);
  return DenseLayer(std::move(w), std::move(b), act);
}

}  // namespace

void write_model(const MlpModel& model, std::ostream& out) {
  json layers = json::array();
  for (const auto& layer : model.layers()) layers.push_back(layer_to_json(layer));
  out << json{{"layers", std::move(layers)}}.dump(1) << '\n';
}

MlpModel read_model(std::istream& in) {
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw FormatError(std::string("model document is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("layers") || !doc["layers"].is_array() ||
      doc["layers"].empty()) {
    throw FormatError("model document needs a non-empty \"layers\" array");
  }
  std::vector<DenseLayer> layers;
  for (std::size_t i = 0; i < doc["layers"].size(); ++i) {
    layers.push_back(layer_from_json(doc["layers"][i], i));
  }
  return MlpModel(std::move(layers));
}

void save_model(const MlpModel& model, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  write_model(model, out);
}

MlpModel load_model(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return read_model(in);
}

}  // namespace latentgeo
