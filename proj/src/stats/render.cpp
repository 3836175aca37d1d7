#include "bandfit/render.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "bandfit/error.hpp"

namespace bandfit {
namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string escape_xml(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}

// Minimal SVG 1.1 document builder; coordinates are emitted with fixed
// precision so identical inputs give identical bytes.
class SvgDocument {
 public:
  SvgDocument(double width, double height) : width_(width), height_(height) {}

  SvgDocument& line(double x1, double y1, double x2, double y2, const std::string& cls) {
    body_ << "<line class=\"" << cls << "\" x1=\"" << num(x1) << "\" y1=\"" << num(y1) << "\" x2=\""
          << num(x2) << "\" y2=\"" << num(y2) << "\"/>\n";
    return *this;
  }
  SvgDocument& rect(double x, double y, double w, double h, const std::string& cls) {
    body_ << "<rect class=\"" << cls << "\" x=\"" << num(x) << "\" y=\"" << num(y) << "\" width=\""
          << num(w) << "\" height=\"" << num(h) << "\"/>\n";
    return *this;
  }
  SvgDocument& circle(double cx, double cy, double r, const std::string& cls) {
    body_ << "<circle class=\"" << cls << "\" cx=\"" << num(cx) << "\" cy=\"" << num(cy)
          << "\" r=\"" << num(r) << "\"/>\n";
    return *this;
  }
  SvgDocument& text(double x, double y, const std::string& content, const std::string& anchor = "middle",
                    double rotate = 0.0) {
    body_ << "<text x=\"" << num(x) << "\" y=\"" << num(y) << "\" text-anchor=\"" << anchor << "\"";
    if (rotate != 0.0) body_ << " transform=\"rotate(" << num(rotate) << " " << num(x) << " " << num(y) << ")\"";
    body_ << ">" << escape_xml(content) << "</text>\n";
    return *this;
  }
  SvgDocument& polyline(const std::vector<std::pair<double, double>>& pts, const std::string& cls) {
    body_ << "<polyline class=\"" << cls << "\" points=\"";
    for (std::size_t i = 0; i < pts.size(); ++i) {
      body_ << (i ? " " : "") << num(pts[i].first) << "," << num(pts[i].second);
    }
    body_ << "\"/>\n";
    return *this;
  }
  SvgDocument& raw(const std::string& s) {
    body_ << s;
    return *this;
  }

  std::string str() const {
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\" standalone=\"no\"?>\n"
       << "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"" << num(width_)
       << "\" height=\"" << num(height_) << "\" viewBox=\"0 0 " << num(width_) << " " << num(height_)
       << "\">\n"
       << "<style>line,polyline{stroke:#000;stroke-width:1;fill:none}"
          "rect.box{fill:#9ecae1;stroke:#000}rect.bar{fill:#6baed6;stroke:none}"
          "line.median{stroke:#d62728;stroke-width:2}line.grid{stroke:#ccc}"
          "circle.point{fill:#1f77b4}text{font-family:sans-serif;font-size:11px}</style>\n"
       << "<rect class=\"background\" x=\"0\" y=\"0\" width=\"" << num(width_) << "\" height=\""
       << num(height_) << "\" fill=\"#fff\"/>\n"
       << body_.str() << "</svg>\n";
    return os.str();
  }

 private:
  double width_;
  double height_;
  std::ostringstream body_;
};

struct Frame {
  double left = 60, right = 20, top = 30, bottom = 90;
  double width, height;
  double plot_w() const { return width - left - right; }
  double plot_h() const { return height - top - bottom; }
};

void y_axis(SvgDocument& svg, const Frame& f, double y_max, const std::string& label) {
  svg.line(f.left, f.top, f.left, f.top + f.plot_h(), "axis");
  for (int t = 0; t <= 4; ++t) {
    const double v = y_max * t / 4.0;
    const double y = f.top + f.plot_h() * (1.0 - t / 4.0);
    svg.line(f.left - 4, y, f.left, y, "tick");
    svg.line(f.left, y, f.left + f.plot_w(), y, "grid");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    svg.text(f.left - 6, y + 4, buf, "end");
  }
  svg.text(14, f.top + f.plot_h() / 2, label, "middle", -90);
}

}  // namespace

std::vector<std::uint8_t> GrayImage::encode_pgm() const {
  const std::string header = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), pixels.begin(), pixels.end());
  return out;
}

GrayImage render_kernel_image(const Field2& kernel, std::size_t out_side) {
  if (kernel.empty()) throw InvalidSizeError("cannot render an empty kernel");
  if (out_side < kernel.height() || out_side < kernel.width()) {
    throw InvalidSizeError("output side " + std::to_string(out_side) + " is smaller than the kernel");
  }
  const auto [lo_it, hi_it] = std::minmax_element(kernel.values().begin(), kernel.values().end());
  const double lo = *lo_it;
  const double range = *hi_it - lo;

  GrayImage img{out_side, out_side, std::vector<std::uint8_t>(out_side * out_side)};
  for (std::size_t r = 0; r < out_side; ++r) {
    const std::size_t src_r = r * kernel.height() / out_side;
    for (std::size_t c = 0; c < out_side; ++c) {
      const std::size_t src_c = c * kernel.width() / out_side;
      std::uint8_t level = 128;
      if (range > 0.0) {
        level = static_cast<std::uint8_t>(std::lround((kernel(src_r, src_c) - lo) / range * 255.0));
      }
      img.pixels[r * out_side + c] = level;
    }
  }
  return img;
}

void write_pgm(const std::filesystem::path& path, const GrayImage& image) {
  const auto bytes = image.encode_pgm();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

std::string render_boxplot_svg(std::span<const LayerSummary> layers, const LayerSummary& all_layers) {
  if (layers.empty()) throw EmptyDataError("box plot needs at least one layer");

  std::vector<const LayerSummary*> columns;
  for (const auto& l : layers) columns.push_back(&l);
  columns.push_back(&all_layers);

  double y_max = 0.0;
  for (const auto* c : columns) {
    if (c->stats) y_max = std::max(y_max, c->stats->p95);
  }
  y_max = y_max > 0.0 ? y_max * 1.1 : 1.0;

  const double column_w = 50.0;
  Frame f;
  f.width = f.left + f.right + column_w * static_cast<double>(columns.size());
  f.height = 400.0;
  SvgDocument svg(f.width, f.height);
  y_axis(svg, f, y_max, "RMS residual");
  svg.line(f.left, f.top + f.plot_h(), f.left + f.plot_w(), f.top + f.plot_h(), "axis");

  const auto y_of = [&](double v) { return f.top + f.plot_h() * (1.0 - v / y_max); };
  for (std::size_t i = 0; i < columns.size(); ++i) {
    const LayerSummary& s = *columns[i];
    const double cx = f.left + column_w * (static_cast<double>(i) + 0.5);
    const bool aggregate = i + 1 == columns.size();
    svg.raw("<g class=\"column\" data-layer=\"" + escape_xml(s.layer_name) + "\" data-count=\"" +
            std::to_string(s.count) + "\">\n");
    if (s.stats) {
      const BoxStats& b = *s.stats;
      svg.line(cx, y_of(b.p95), cx, y_of(b.q3), "whisker");
      svg.line(cx, y_of(b.q1), cx, y_of(b.p5), "whisker");
      svg.line(cx - 8, y_of(b.p95), cx + 8, y_of(b.p95), "whisker-cap");
      svg.line(cx - 8, y_of(b.p5), cx + 8, y_of(b.p5), "whisker-cap");
      svg.rect(cx - 15, y_of(b.q3), 30, y_of(b.q1) - y_of(b.q3), "box");
      svg.line(cx - 15, y_of(b.median), cx + 15, y_of(b.median), "median");
    } else {
      svg.text(cx, f.top + f.plot_h() - 4, "n/a");
    }
    svg.text(cx, f.top + f.plot_h() + 12, aggregate ? "all" : s.layer_name, "end", -45);
    svg.raw("</g>\n");
  }
  return svg.str();
}

std::string render_histogram_svg(const Histogram& hist) {
  if (hist.edges.size() < 2) throw InvalidParameterError("histogram has no bins");
  const bool log_axis = hist.edges.front() > 0.0;
  const auto axis = [log_axis](double v) { return log_axis ? std::log10(v) : v; };
  const double x_lo = axis(hist.edges.front());
  const double x_hi = axis(hist.edges.back());
  const std::size_t peak = std::max<std::size_t>(
      1, hist.counts.empty() ? 1 : *std::max_element(hist.counts.begin(), hist.counts.end()));

  Frame f;
  f.width = 640;
  f.height = 360;
  f.bottom = 50;
  SvgDocument svg(f.width, f.height);
  y_axis(svg, f, static_cast<double>(peak), "count");
  svg.line(f.left, f.top + f.plot_h(), f.left + f.plot_w(), f.top + f.plot_h(), "axis");

  const auto x_of = [&](double v) { return f.left + f.plot_w() * (axis(v) - x_lo) / (x_hi - x_lo); };
  for (std::size_t i = 0; i < hist.counts.size(); ++i) {
    const double h = f.plot_h() * static_cast<double>(hist.counts[i]) / static_cast<double>(peak);
    const double x0 = x_of(hist.edges[i]);
    svg.rect(x0, f.top + f.plot_h() - h, x_of(hist.edges[i + 1]) - x0, h, "bar");
  }
  if (log_axis) {
    for (double d = std::ceil(x_lo); d <= x_hi; d += 1.0) {
      const double x = f.left + f.plot_w() * (d - x_lo) / (x_hi - x_lo);
      svg.line(x, f.top + f.plot_h(), x, f.top + f.plot_h() + 4, "tick");
      char buf[16];
      std::snprintf(buf, sizeof buf, "1e%d", static_cast<int>(d));
      svg.text(x, f.top + f.plot_h() + 16, buf);
    }
  }
  svg.text(f.left + f.plot_w() / 2, f.height - 8,
           "RMS residual (underflow " + std::to_string(hist.underflow) + ", overflow " +
               std::to_string(hist.overflow) + ")");
  return svg.str();
}

std::string render_calibration_svg(std::span<const CalibrationPoint> points) {
  if (points.empty()) throw EmptyDataError("calibration curve has no points");
  double x_max = 0.0;
  double y_max = 0.0;
  for (const auto& p : points) {
    x_max = std::max(x_max, p.noise_fraction);
    y_max = std::max(y_max, p.mean_rms);
  }
  x_max = x_max > 0.0 ? x_max : 1.0;
  y_max = y_max > 0.0 ? y_max * 1.1 : 1.0;

  Frame f;
  f.width = 560;
  f.height = 360;
  f.bottom = 50;
  SvgDocument svg(f.width, f.height);
  y_axis(svg, f, y_max, "mean RMS residual");
  svg.line(f.left, f.top + f.plot_h(), f.left + f.plot_w(), f.top + f.plot_h(), "axis");

  std::vector<std::pair<double, double>> pts;
  for (const auto& p : points) {
    pts.emplace_back(f.left + f.plot_w() * p.noise_fraction / x_max,
                     f.top + f.plot_h() * (1.0 - p.mean_rms / y_max));
  }
  svg.polyline(pts, "curve");
  for (const auto& [x, y] : pts) svg.circle(x, y, 2.5, "point");
  for (int t = 0; t <= 4; ++t) {
    const double x = f.left + f.plot_w() * t / 4.0;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", x_max * t / 4.0);
    svg.line(x, f.top + f.plot_h(), x, f.top + f.plot_h() + 4, "tick");
    svg.text(x, f.top + f.plot_h() + 16, buf);
  }
  svg.text(f.left + f.plot_w() / 2, f.height - 8, "noise fraction of value range");
  return svg.str();
}

}  // namespace bandfit
