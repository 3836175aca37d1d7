#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "bandfit/field.hpp"
#include "bandfit/stats.hpp"

namespace bandfit {

struct GrayImage {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> pixels;

  /// Binary PGM (P5, maxval 255).
  std::vector<std::uint8_t> encode_pgm() const;
};

/// Maps [min, max] of the kernel affinely onto [0, 255] (constant kernels to
/// 128) and upsamples to out_side x out_side by nearest neighbour.
GrayImage render_kernel_image(const Field2& kernel, std::size_t out_side);

void write_pgm(const std::filesystem::path& path, const GrayImage& image);

/// Box plot with one column per layer followed by an all-layers column. Boxes
/// span q1..q3 with a median line; whiskers reach p5 and p95.
std::string render_boxplot_svg(std::span<const LayerSummary> layers, const LayerSummary& all_layers);

/// Bar chart of residual counts on a log10 residual axis.
std::string render_histogram_svg(const Histogram& hist);

/// Mean RMS residual against noise fraction.
std::string render_calibration_svg(std::span<const CalibrationPoint> points);

void write_text(const std::filesystem::path& path, const std::string& text);

}  // namespace bandfit
