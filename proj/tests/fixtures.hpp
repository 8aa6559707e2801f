#pragma once

#include "latentgeo/mlp.hpp"

#include <random>
#include <vector>

namespace fixture {

// Hidden layers use `hidden`, the last layer is linear.
inline latentgeo::MlpModel random_mlp(const std::vector<latentgeo::Index>& widths,
                                      latentgeo::Activation hidden, std::uint64_t seed,
                                      double bias_scale = 0.3) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, bias_scale);
  std::vector<latentgeo::DenseLayer> layers;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    const bool last = l + 2 == widths.size();
    auto layer = latentgeo::random_layer(widths[l], widths[l + 1],
                                         last ? latentgeo::Activation::identity() : hidden, rng);
    for (latentgeo::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = normal(rng);
    layers.push_back(std::move(layer));
  }
  return latentgeo::MlpModel(std::move(layers));
}

}  // namespace fixture
