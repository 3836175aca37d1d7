#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "bandfit/field.hpp"

namespace bandfit {

enum class Dtype { f32 };

struct TensorEntry {
  Dtype dtype = Dtype::f32;
  std::vector<std::size_t> shape;
  /// Byte range [begin, end) within the payload.
  std::uint64_t begin = 0;
  std::uint64_t end = 0;

  std::size_t element_count() const;

  friend bool operator==(const TensorEntry&, const TensorEntry&) = default;
};

/// Parsed tensor container: an 8-byte little-endian header length, a JSON
/// header describing each tensor, then the raw little-endian payload.
struct TensorArchive {
  std::map<std::string, TensorEntry> entries;
  /// Contents of the optional "__metadata__" header object (null if absent).
  nlohmann::json metadata;
  std::vector<std::uint8_t> payload;

  /// Decoded row-major values of one tensor. Throws std::out_of_range for
  /// unknown names.
  std::vector<float> values(const std::string& name) const;

  friend bool operator==(const TensorArchive&, const TensorArchive&) = default;
};

/// A tensor to be written, values row-major.
struct NamedTensor {
  std::string name;
  std::vector<std::size_t> shape;
  std::vector<float> values;
};

TensorArchive parse_archive(std::span<const std::uint8_t> bytes);
TensorArchive load_archive(const std::filesystem::path& path);

/// Serializes tensors in the given order, payload packed without gaps.
std::vector<std::uint8_t> serialize_archive(std::span<const NamedTensor> tensors,
                                            const nlohmann::json& metadata = nullptr);
void write_archive(const std::filesystem::path& path, std::span<const NamedTensor> tensors,
                   const nlohmann::json& metadata = nullptr);

/// One 2D slice of a convolution weight tensor laid out [out, in, k, k].
struct KernelSlice {
  std::string model_id;
  std::string layer_name;
  std::size_t layer_index = 0;
  std::size_t filter_index = 0;
  std::size_t channel_index = 0;
  Field2 values;
};

struct LayerRef {
  std::size_t index = 0;
  std::string name;

  friend bool operator==(const LayerRef&, const LayerRef&) = default;
};

struct SliceExtraction {
  std::vector<KernelSlice> slices;
  /// One line per selected tensor that was skipped.
  std::vector<std::string> warnings;
  /// Layers that contributed at least one slice, in layer_index order.
  std::vector<LayerRef> layers;
};

/// Shell-style glob match (`*`, `?`, `[...]`) against a tensor name.
bool glob_match(std::string_view pattern, std::string_view name);

/// Explodes every selected 4-axis square tensor into out x in slices, ordered
/// by (layer_index, filter_index, channel_index). Layers follow the
/// "layer_order" metadata list of name prefixes (longest prefix wins);
/// without it, or for names under no listed prefix, each tensor is its own
/// layer ordered by name after the listed ones. Tensors sharing a layer are
/// emitted in name order.
SliceExtraction extract_conv_slices(const TensorArchive& archive, std::string_view selection,
                                    const std::string& model_id);

}  // namespace bandfit
