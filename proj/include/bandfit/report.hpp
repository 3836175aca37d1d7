#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "bandfit/fitting.hpp"
#include "bandfit/stats.hpp"

namespace bandfit {

/// Fit of one kernel slice together with its provenance.
struct SliceFit {
  std::string layer_name;
  std::size_t layer_index = 0;
  std::size_t filter_index = 0;
  std::size_t channel_index = 0;
  FitResult fit;
};

struct Report {
  std::string model_id;
  std::vector<LayerSummary> layers;
  std::optional<LayerSummary> all_layers;
  std::vector<SliceFit> slices;
  std::optional<Histogram> histogram;
};

enum class ReportFormat { json, csv };

/// Column order of the CSV report.
inline constexpr const char* kCsvHeader =
    "layer_index,layer,filter,channel,rms,amplitude,phase,u1,u2,sigma,scale,degenerate,"
    "iterations,init_rank";

nlohmann::ordered_json report_json(const Report& report);

/// RFC 4180: CRLF line endings, fields quoted only when needed.
std::string report_csv(const Report& report);

void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& path);

}  // namespace bandfit
