#include "bandfit/report.hpp"

#include <cstdio>
#include <fstream>

#include "bandfit/error.hpp"

namespace bandfit {
namespace {

nlohmann::ordered_json summary_json(const LayerSummary& s) {
  nlohmann::ordered_json j;
  j["layer_name"] = s.layer_name;
  j["count"] = s.count;
  j["degenerate_count"] = s.degenerate_count;
  for (const char* key : {"median", "q1", "q3", "p5", "p95"}) j[key] = nullptr;
  if (s.stats) {
    j["median"] = s.stats->median;
    j["q1"] = s.stats->q1;
    j["q3"] = s.stats->q3;
    j["p5"] = s.stats->p5;
    j["p95"] = s.stats->p95;
  }
  return j;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace

nlohmann::ordered_json report_json(const Report& report) {
  nlohmann::ordered_json j;
  j["model_id"] = report.model_id;
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& s : report.layers) j["layers"].push_back(summary_json(s));
  if (report.all_layers) j["all_layers"] = summary_json(*report.all_layers);
  j["slices"] = nlohmann::ordered_json::array();
  for (const SliceFit& s : report.slices) {
    const GaborParams& p = s.fit.params;
    nlohmann::ordered_json row;
    row["layer"] = s.layer_name;
    row["layer_index"] = s.layer_index;
    row["filter"] = s.filter_index;
    row["channel"] = s.channel_index;
    row["rms"] = s.fit.rms;
    row["params"] = {{"amplitude", p.amplitude}, {"phase", p.phase}, {"u1", p.u_c.u1},
                     {"u2", p.u_c.u2},           {"sigma", p.sigma}};
    row["scale"] = s.fit.scale;
    row["degenerate"] = s.fit.degenerate;
    row["iterations"] = s.fit.iterations;
    row["init_rank"] = s.fit.init_rank;
    j["slices"].push_back(std::move(row));
  }
  if (report.histogram) {
    j["histogram"] = {{"edges", report.histogram->edges},
                      {"counts", report.histogram->counts},
                      {"underflow", report.histogram->underflow},
                      {"overflow", report.histogram->overflow}};
  }
  return j;
}

std::string report_csv(const Report& report) {
  std::string out = std::string(kCsvHeader) + "\r\n";
  for (const SliceFit& s : report.slices) {
    const GaborParams& p = s.fit.params;
    out += std::to_string(s.layer_index) + "," + csv_field(s.layer_name) + "," +
           std::to_string(s.filter_index) + "," + std::to_string(s.channel_index) + "," +
           exact(s.fit.rms) + "," + exact(p.amplitude) + "," + exact(p.phase) + "," +
           exact(p.u_c.u1) + "," + exact(p.u_c.u2) + "," + exact(p.sigma) + "," +
           exact(s.fit.scale) + "," + (s.fit.degenerate ? "true" : "false") + "," +
           std::to_string(s.fit.iterations) + "," + std::to_string(s.fit.init_rank) + "\r\n";
  }
  return out;
}

void emit_report(const Report& report, ReportFormat format, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open report '" + path.string() + "' for writing");
  if (format == ReportFormat::json) {
    out << report_json(report).dump(2) << '\n';
  } else {
    out << report_csv(report);
  }
  if (!out) throw IoError("failed writing report '" + path.string() + "'");
}

}  // namespace bandfit
