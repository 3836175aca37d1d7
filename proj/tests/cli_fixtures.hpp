#pragma once

// Synthetic archives shared by the CLI and acceptance tests.

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "bandfit/archive.hpp"
#include "bandfit/core_math.hpp"

namespace fixtures {

inline bandfit::GaborParams random_gabor(std::mt19937_64& rng, std::size_t k) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const double pi = 3.141592653589793;
  const double magnitude = pi / 8.0 + unit(rng) * (3.0 * pi / 4.0 - pi / 8.0);
  const double angle = 2.0 * pi * unit(rng);
  return {0.2 + unit(rng), -pi + 2.0 * pi * unit(rng), {magnitude * std::cos(angle), magnitude * std::sin(angle)},
          1.0 + unit(rng) * (k / 2.0 - 1.0)};
}

/// Tensor [out, in, k, k] whose every slice is an independent random Gabor.
inline bandfit::NamedTensor gabor_tensor(std::mt19937_64& rng, std::string name, std::size_t out, std::size_t in,
                                         std::size_t k) {
  bandfit::NamedTensor t{std::move(name), {out, in, k, k}, {}};
  for (std::size_t s = 0; s < out * in; ++s) {
    const auto g = bandfit::gabor_kernel(k, random_gabor(rng, k));
    for (double v : g.values()) t.values.push_back(static_cast<float>(v));
  }
  return t;
}

/// Two pseudo-layers of Gabor slices; `slices_per_layer` = out * in.
inline std::filesystem::path two_layer_archive(const std::filesystem::path& dir, std::size_t out, std::size_t in,
                                               std::uint64_t seed, bool with_zero_tensor = false) {
  std::mt19937_64 rng(seed);
  std::vector<bandfit::NamedTensor> tensors = {gabor_tensor(rng, "block1.conv.weight", out, in, 7),
                                               gabor_tensor(rng, "block2.conv.weight", out, in, 5)};
  nlohmann::json order = {"block1", "block2"};
  if (with_zero_tensor) {
    tensors.push_back({"block3.conv.weight", {2, 1, 3, 3}, std::vector<float>(18, 0.0f)});
    order.push_back("block3");
  }
  const auto path = dir / "synthetic.safetensors";
  bandfit::write_archive(path, tensors, {{"model_id", "synthetic"}, {"layer_order", order}});
  return path;
}

}  // namespace fixtures
