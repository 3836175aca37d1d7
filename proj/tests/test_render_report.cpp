#include <doctest.h>

#include <cmath>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <sstream>

#include "bandfit/error.hpp"
#include "bandfit/render.hpp"
#include "bandfit/report.hpp"
#include "oracles.hpp"
#include "xml_check.hpp"

using namespace bandfit;

namespace {

const std::filesystem::path kGoldenDir = BANDFIT_GOLDEN_DIR;

std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

// Compares against tests/golden/<name>; BANDFIT_UPDATE_GOLDEN=1 rewrites it.
void check_golden(const std::string& name, const std::string& actual) {
  const auto path = kGoldenDir / name;
  if (std::getenv("BANDFIT_UPDATE_GOLDEN")) {
    std::ofstream(path, std::ios::binary) << actual;
    return;
  }
  REQUIRE_MESSAGE(std::filesystem::exists(path), "missing golden file " << path);
  CHECK_MESSAGE(read_file(path) == actual, "golden mismatch: " << name);
}

LayerSummary summary(std::string name, BoxStats s, std::size_t count = 10) {
  return {std::move(name), count, 0, s};
}

Report sample_report() {
  Report r;
  r.model_id = "toy,net";
  FitResult a;
  a.params = {0.5, -1.25, {0.75, 0.5}, 2.0};
  a.rms = 0.1 + 0.2;  // not exactly representable in short decimal
  a.scale = 0.037;
  a.iterations = 12;
  a.init_rank = 2;
  FitResult b;
  b.degenerate = true;
  b.params = {0.0, 0.0, {0.0, 0.0}, 1.5};
  r.slices = {{"conv1", 0, 0, 0, a}, {"conv \"2\"", 1, 3, 1, b}};
  std::vector<FitResult> l0 = {a}, l1 = {b};
  r.layers = {layer_summary(l0, "conv1"), layer_summary(l1, "conv \"2\"")};
  std::vector<FitResult> all = {a, b};
  r.all_layers = layer_summary(all, "all");
  const std::vector<double> rms = {a.rms};
  r.histogram = histogram(rms, log_bin_edges(1e-3, 1.0, 3));
  return r;
}

}  // namespace

TEST_CASE("kernel image range mapping") {
  const Field2 checker(2, 2, {-1, 1, 1, -1});
  const GrayImage img = render_kernel_image(checker, 2);
  CHECK(img.pixels == std::vector<std::uint8_t>{0, 255, 255, 0});

  const GrayImage flat = render_kernel_image(Field2(3, 3, std::vector<double>(9, 0.7)), 6);
  for (auto p : flat.pixels) CHECK(p == 128);

  CHECK_THROWS_AS(render_kernel_image(Field2(3, 3), 2), InvalidSizeError);
}

TEST_CASE("kernel image nearest-neighbour replication") {
  Field2 k(3, 3);
  for (std::size_t i = 0; i < 9; ++i) k.values()[i] = static_cast<double>(i);
  const GrayImage img = render_kernel_image(k, 9);
  REQUIRE(img.width == 9);
  REQUIRE(img.height == 9);
  for (std::size_t r = 0; r < 9; ++r) {
    for (std::size_t c = 0; c < 9; ++c) {
      const double src = k(r / 3, c / 3);
      CHECK(img.pixels[r * 9 + c] == static_cast<std::uint8_t>(std::lround(src / 8.0 * 255.0)));
    }
  }
  const auto pgm = img.encode_pgm();
  const std::string header = "P5\n9 9\n255\n";
  REQUIRE(pgm.size() == header.size() + 81);
  CHECK(std::string(pgm.begin(), pgm.begin() + static_cast<std::ptrdiff_t>(header.size())) == header);
  check_golden("kernel_3x3.pgm", std::string(pgm.begin(), pgm.end()));

  const auto path = oracle::scratch_dir("render") / "k.pgm";
  write_pgm(path, img);
  CHECK(read_file(path) == std::string(pgm.begin(), pgm.end()));
}

TEST_CASE("box plot with zero spread collapses to a line") {
  const std::vector<LayerSummary> layers = {summary("only", {0.02, 0.02, 0.02, 0.02, 0.02})};
  const std::string svg = render_boxplot_svg(layers, layers[0]);
  const std::regex box(R"re(<rect class="box" x="[-0-9.]+" y="([-0-9.]+)" width="[-0-9.]+" height="([-0-9.]+)")re");
  const std::regex median(R"re(<line class="median" x1="[-0-9.]+" y1="([-0-9.]+)" x2="[-0-9.]+" y2="([-0-9.]+)")re");
  std::smatch m;
  auto it = svg.cbegin();
  int boxes = 0;
  std::vector<std::string> box_y;
  while (std::regex_search(it, svg.cend(), m, box)) {
    CHECK(std::stod(m[2]) == 0.0);
    box_y.push_back(m[1]);
    ++boxes;
    it = m.suffix().first;
  }
  CHECK(boxes == 2);
  it = svg.cbegin();
  std::size_t i = 0;
  while (std::regex_search(it, svg.cend(), m, median)) {
    REQUIRE(i < box_y.size());
    CHECK(m[1] == box_y[i]);
    CHECK(m[2] == box_y[i]);
    ++i;
    it = m.suffix().first;
  }
  CHECK(i == 2);
}

TEST_CASE("box plot columns and validity") {
  const std::vector<LayerSummary> layers = {summary("conv1", {0.01, 0.02, 0.03, 0.05, 0.08}),
                                            summary("conv<2>&", {0.02, 0.03, 0.04, 0.06, 0.1})};
  LayerSummary flat{"flat", 4, 4, std::nullopt};
  const LayerSummary all = summary("all", {0.01, 0.02, 0.035, 0.055, 0.09}, 20);
  const std::string svg = render_boxplot_svg(layers, all);

  std::size_t groups = 0;
  for (std::size_t p = svg.find("<g class=\"column\""); p != std::string::npos; p = svg.find("<g class=\"column\"", p + 1)) ++groups;
  CHECK(groups == 3);
  const auto xml = xml_check::check(svg);
  CHECK_MESSAGE(xml.ok, xml.error);
  CHECK(svg.find("version=\"1.1\"") != std::string::npos);
  CHECK(render_boxplot_svg(layers, all) == svg);
  check_golden("boxplot.svg", svg);

  const std::vector<LayerSummary> with_flat = {layers[0], flat};
  const auto flat_svg = render_boxplot_svg(with_flat, all);
  CHECK(xml_check::check(flat_svg).ok);
  CHECK(flat_svg.find("n/a") != std::string::npos);

  CHECK_THROWS_AS(render_boxplot_svg(std::vector<LayerSummary>{}, all), EmptyDataError);
}

TEST_CASE("histogram and calibration charts") {
  const std::vector<double> rms = {1e-5, 2e-5, 3e-4, 0.02, 0.5, 2.0};
  const Histogram h = histogram(rms, default_residual_edges(10));
  const std::string hist_svg = render_histogram_svg(h);
  const auto hx = xml_check::check(hist_svg);
  CHECK_MESSAGE(hx.ok, hx.error);
  check_golden("histogram.svg", hist_svg);

  const std::vector<CalibrationPoint> pts = {{0.0, 0.0, 10}, {0.05, 0.057, 10}, {0.1, 0.115, 10}};
  const std::string cal_svg = render_calibration_svg(pts);
  const auto cx = xml_check::check(cal_svg);
  CHECK_MESSAGE(cx.ok, cx.error);
  check_golden("calibration.svg", cal_svg);
  CHECK_THROWS_AS(render_calibration_svg(std::vector<CalibrationPoint>{}), EmptyDataError);
}

TEST_CASE("xml checker rejects broken documents") {
  CHECK_FALSE(xml_check::check("<a><b></a></b>").ok);
  CHECK_FALSE(xml_check::check("<a x=1/>").ok);
  CHECK_FALSE(xml_check::check("<a>&bogus;</a>").ok);
  CHECK_FALSE(xml_check::check("<a/><b/>").ok);
  CHECK(xml_check::check("<?xml version=\"1.0\"?>\n<a x=\"&lt;\"><b/>t&amp;t</a>\n").ok);
}

TEST_CASE("empty report") {
  const Report r{"empty", {}, std::nullopt, {}, std::nullopt};
  const auto j = nlohmann::json::parse(report_json(r).dump());
  CHECK(j["model_id"] == "empty");
  CHECK(j["layers"].is_array());
  CHECK(j["layers"].empty());
  CHECK(j["slices"].empty());
  CHECK(report_csv(r) == std::string(kCsvHeader) + "\r\n");
}

TEST_CASE("report serialization") {
  Report r = sample_report();
  Report one = r;
  one.slices.resize(1);
  const std::string csv1 = report_csv(one);
  std::size_t lines = 0;
  for (std::size_t p = csv1.find("\r\n"); p != std::string::npos; p = csv1.find("\r\n", p + 2)) ++lines;
  CHECK(lines == 2);

  const auto dir = oracle::scratch_dir("report");
  emit_report(r, ReportFormat::json, dir / "report.json");
  emit_report(r, ReportFormat::csv, dir / "report.csv");
  const std::string json_text = read_file(dir / "report.json");
  const std::string csv_text = read_file(dir / "report.csv");
  check_golden("report.json", json_text);
  check_golden("report.csv", csv_text);
  CHECK(csv_text == report_csv(r));

  const auto j = nlohmann::json::parse(json_text);
  REQUIRE(j["slices"].size() == 2);
  CHECK(j["slices"][0]["rms"].get<double>() == r.slices[0].fit.rms);
  CHECK(j["slices"][0]["params"]["phase"].get<double>() == -1.25);
  CHECK(j["slices"][1]["degenerate"] == true);
  CHECK(j["layers"][1]["median"].is_null());
  CHECK(j["all_layers"]["count"] == 2);
  // Field order is part of the format.
  std::vector<std::string> keys;
  const auto ordered = report_json(r);
  for (auto it = ordered.begin(); it != ordered.end(); ++it) keys.push_back(it.key());
  CHECK(keys == std::vector<std::string>{"model_id", "layers", "all_layers", "slices", "histogram"});

  // CSV quoting per RFC 4180.
  CHECK(csv_text.find("\"conv \"\"2\"\"\"") != std::string::npos);
  char rms_text[64];
  std::snprintf(rms_text, sizeof rms_text, "%.17g", r.slices[0].fit.rms);
  CHECK(std::strtod(rms_text, nullptr) == r.slices[0].fit.rms);
  CHECK(csv_text.find(rms_text) != std::string::npos);

  CHECK_THROWS_AS(emit_report(r, ReportFormat::json, dir / "missing" / "x.json"), IoError);
}
