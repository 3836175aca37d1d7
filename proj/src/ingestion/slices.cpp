#include <fnmatch.h>

#include <algorithm>
#include <cmath>
#include <optional>
#include <sstream>

#include "bandfit/archive.hpp"

namespace bandfit {
namespace {

std::string shape_string(const std::vector<std::size_t>& shape) {
  std::ostringstream os;
  os << '[';
  for (std::size_t i = 0; i < shape.size(); ++i) os << (i ? ", " : "") << shape[i];
  os << ']';
  return os.str();
}

std::vector<std::string> layer_order(const nlohmann::json& metadata) {
  std::vector<std::string> order;
  if (!metadata.is_object() || !metadata.contains("layer_order")) return order;
  const auto& list = metadata["layer_order"];
  if (!list.is_array()) return order;
  for (const auto& item : list) {
    if (item.is_string()) order.push_back(item.get<std::string>());
  }
  return order;
}

}  // namespace

bool glob_match(std::string_view pattern, std::string_view name) {
  return ::fnmatch(std::string(pattern).c_str(), std::string(name).c_str(), 0) == 0;
}

SliceExtraction extract_conv_slices(const TensorArchive& archive, std::string_view selection,
                                    const std::string& model_id) {
  const std::vector<std::string> order = layer_order(archive.metadata);

  struct Selected {
    LayerRef layer;
    const std::string* name;
    const TensorEntry* entry;
  };
  std::vector<Selected> selected;
  std::vector<std::string> unlisted;
  SliceExtraction result;

  for (const auto& [name, entry] : archive.entries) {
    if (!glob_match(selection, name)) continue;
    const auto& shape = entry.shape;
    if (shape.size() != 4 || shape[2] != shape[3] || shape[2] == 0) {
      result.warnings.push_back("skipped '" + name + "' with shape " + shape_string(shape) +
                                ": not a [out, in, k, k] square kernel");
      continue;
    }
    std::optional<std::size_t> best;
    for (std::size_t i = 0; i < order.size(); ++i) {
      if (name.starts_with(order[i]) && (!best || order[i].size() > order[*best].size())) best = i;
    }
    if (best) {
      selected.push_back({{*best, order[*best]}, &name, &entry});
    } else {
      // Entries iterate in name order, so unlisted layers are already sorted.
      selected.push_back({{order.size() + unlisted.size(), name}, &name, &entry});
      unlisted.push_back(name);
    }
  }

  std::stable_sort(selected.begin(), selected.end(), [](const Selected& a, const Selected& b) {
    return a.layer.index < b.layer.index;
  });

  for (const Selected& s : selected) {
    if (result.layers.empty() || result.layers.back().index != s.layer.index) {
      result.layers.push_back(s.layer);
    }
    const std::size_t out_channels = s.entry->shape[0];
    const std::size_t in_channels = s.entry->shape[1];
    const std::size_t k = s.entry->shape[2];
    const std::vector<float> values = archive.values(*s.name);
    for (std::size_t f = 0; f < out_channels; ++f) {
      for (std::size_t c = 0; c < in_channels; ++c) {
        const auto first = values.begin() + static_cast<std::ptrdiff_t>((f * in_channels + c) * k * k);
        std::vector<double> kernel(first, first + static_cast<std::ptrdiff_t>(k * k));
        if (!std::all_of(kernel.begin(), kernel.end(), [](double v) { return std::isfinite(v); })) {
          result.warnings.push_back("skipped '" + *s.name + "' filter " + std::to_string(f) +
                                    " channel " + std::to_string(c) + ": non-finite values");
          continue;
        }
        result.slices.push_back(
            {model_id, s.layer.name, s.layer.index, f, c, Field2(k, k, std::move(kernel))});
      }
    }
  }
  return result;
}

}  // namespace bandfit
