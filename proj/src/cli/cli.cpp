#include "bandfit/cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <thread>

#include "bandfit/error.hpp"
#include "bandfit/fitting.hpp"
#include "bandfit/render.hpp"
#include "bandfit/simd.hpp"
#include "bandfit/stats.hpp"

namespace bandfit::cli {
namespace {

constexpr std::size_t kTheoryCases = 20;
constexpr std::size_t kTheoryGrids[] = {8, 16, 32};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

Field2 random_kernel(std::mt19937_64& rng, std::size_t max_side) {
  std::uniform_int_distribution<std::size_t> side(1, max_side);
  std::uniform_real_distribution<double> value(-1.0, 1.0);
  const std::size_t k = side(rng);
  std::vector<double> v(k * k);
  for (double& x : v) x = value(rng);
  return Field2(k, k, std::move(v));
}

std::size_t image_side(std::size_t k) { return k * std::max<std::size_t>(1, (128 + k - 1) / k); }

void ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create output directory '" + dir.string() + "': " + ec.message());
}

std::string layer_file_stem(std::size_t index) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "layer%03zu", index);
  return buf;
}

}  // namespace

int cmd_verify_theory(const RunConfig& config, std::ostream& out, const TheoryHooks& hooks) {
  const ComplexConvolver convolve =
      hooks.convolve ? hooks.convolve
                     : ComplexConvolver([](const ComplexField2& f, const Field2& h) {
                         return circular_convolve2(f, h);
                       });
  std::mt19937_64 rng(config.seed);
  bool ok = true;

  for (std::size_t n : kTheoryGrids) {
    double worst = 0.0;
    std::string worst_case;
    for (std::size_t c = 0; c < kTheoryCases; ++c) {
      const Field2 kernel = random_kernel(rng, std::min<std::size_t>(5, n));
      for (std::size_t m2 = 0; m2 < n; ++m2) {
        for (std::size_t m1 = 0; m1 < n; ++m1) {
          const double r = eigenfunction_residual(kernel, {m1, m2}, n, convolve);
          if (!(r <= worst)) {
            worst = r;
            worst_case = "kernel " + std::to_string(c) + " (" + std::to_string(kernel.width()) + "x" +
                         std::to_string(kernel.width()) + ") bin (" + std::to_string(m1) + ", " +
                         std::to_string(m2) + ")";
          }
        }
      }
    }
    const bool pass = worst < kTheoryTolerance;
    out << "N=" << n << " eigenfunction max_residual=" << sci(worst) << (pass ? " ok" : " FAIL")
        << "\n";
    if (!pass) {
      out << "  violated at " << worst_case << "\n";
      ok = false;
    }
  }

  for (std::size_t n : kTheoryGrids) {
    double worst = 0.0;
    std::string worst_case;
    std::uniform_real_distribution<double> sigma(0.5, 4.0);
    std::uniform_int_distribution<std::size_t> bin(0, n - 1);
    for (std::size_t c = 0; c < kTheoryCases; ++c) {
      const std::size_t k = 1 + 2 * std::uniform_int_distribution<std::size_t>(0, (std::min<std::size_t>(9, n) - 1) / 2)(rng);
      const double s = sigma(rng);
      const FreqIndex b{bin(rng), bin(rng)};
      const Field2 window = gaussian_window(grid_coords(k), s);
      const double r = wft_shift_residual(window, bin_frequency(b, n), n);
      if (!(r <= worst)) {
        worst = r;
        worst_case = "window " + std::to_string(k) + "x" + std::to_string(k) + " sigma " + sci(s) +
                     " bin (" + std::to_string(b.m1) + ", " + std::to_string(b.m2) + ")";
      }
    }
    const bool pass = worst < kTheoryTolerance;
    out << "N=" << n << " wft_shift max_residual=" << sci(worst) << (pass ? " ok" : " FAIL") << "\n";
    if (!pass) {
      out << "  violated at " << worst_case << "\n";
      ok = false;
    }
  }
  return ok ? kSuccess : kFailure;
}

int cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& err) {
  Field2 kernel;
  try {
    kernel = gabor_kernel(config.kernel_side, config.synth_params);
  } catch (const Error& e) {
    err << "synth: " << e.what() << "\n";
    return kUsage;
  }
  if (config.noise_fractions.size() > 1 ||
      (!config.noise_fractions.empty() && !(config.noise_fractions.front() >= 0.0))) {
    err << "synth: --noise takes a single non-negative fraction\n";
    return kUsage;
  }
  if (!config.noise_fractions.empty() && config.noise_fractions.front() > 0.0) {
    Field2 normalized = normalize_kernel(kernel).kernel;
    std::mt19937_64 rng(config.seed);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const double half_width = config.noise_fractions.front() * kNormalizedRange;
    for (double& v : normalized.values()) v += half_width * unit(rng);
    kernel = std::move(normalized);
  }

  ensure_dir(config.out_dir);
  const std::size_t k = config.kernel_side;
  std::vector<float> values(kernel.values().begin(), kernel.values().end());
  const NamedTensor tensor{"synth.weight", {1, 1, k, k}, std::move(values)};
  const nlohmann::json metadata = {{"model_id", "synth"}, {"layer_order", {"synth"}}};
  const auto archive_path = config.out_dir / "synth.safetensors";
  const auto image_path = config.out_dir / "synth.pgm";
  write_archive(archive_path, std::span(&tensor, 1), metadata);
  write_pgm(image_path, render_kernel_image(kernel, image_side(k)));
  out << "wrote " << archive_path.string() << "\nwrote " << image_path.string() << "\n";
  return kSuccess;
}

std::vector<SliceFit> fit_slices(std::span<const KernelSlice> slices, std::size_t jobs) {
  std::vector<SliceFit> fits(slices.size());
  std::vector<std::exception_ptr> errors(slices.size());
  std::atomic<std::size_t> next{0};

  const auto worker = [&] {
    for (std::size_t i = next.fetch_add(1); i < slices.size(); i = next.fetch_add(1)) {
      const KernelSlice& s = slices[i];
      try {
        fits[i] = {s.layer_name, s.layer_index, s.filter_index, s.channel_index, fit_kernel(s.values)};
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    const std::size_t workers = std::max<std::size_t>(1, std::min(jobs, slices.size()));
    for (std::size_t w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return fits;
}

std::size_t representative_index(std::span<const SliceFit> fits) {
  std::vector<std::size_t> order;
  for (std::size_t i = 0; i < fits.size(); ++i) {
    if (!fits[i].fit.degenerate) order.push_back(i);
  }
  if (order.empty()) return fits.size();
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return fits[a].fit.rms < fits[b].fit.rms; });
  return order[(order.size() - 1) / 2];
}

int cmd_fit(const RunConfig& config, std::ostream& out, std::ostream& err) {
  TensorArchive archive;
  try {
    archive = load_archive(config.input);
  } catch (const Error& e) {
    err << "fit: " << e.what() << "\n";
    return kFailure;
  }
  std::string model_id = config.input.stem().string();
  if (archive.metadata.is_object() && archive.metadata.contains("model_id") &&
      archive.metadata["model_id"].is_string()) {
    model_id = archive.metadata["model_id"].get<std::string>();
  }

  const SliceExtraction extraction = extract_conv_slices(archive, config.selection, model_id);
  for (const auto& w : extraction.warnings) err << "warning: " << w << "\n";

  const std::vector<SliceFit> fits = fit_slices(extraction.slices, config.jobs);

  Report report;
  report.model_id = model_id;
  report.slices = fits;

  std::vector<FitResult> all;
  all.reserve(fits.size());
  for (const auto& f : fits) all.push_back(f.fit);
  report.all_layers = layer_summary(all, "all layers");

  std::vector<double> residuals;
  for (const auto& f : all) {
    if (!f.degenerate) residuals.push_back(f.rms);
  }
  report.histogram = histogram(residuals, default_residual_edges(config.bins));

  ensure_dir(config.out_dir);
  // Slices arrive grouped by layer in layer_index order.
  std::size_t begin = 0;
  while (begin < fits.size()) {
    std::size_t end = begin;
    while (end < fits.size() && fits[end].layer_index == fits[begin].layer_index) ++end;
    const std::span<const SliceFit> layer(fits.data() + begin, end - begin);
    std::vector<FitResult> layer_fits;
    for (const auto& f : layer) layer_fits.push_back(f.fit);
    report.layers.push_back(layer_summary(layer_fits, layer.front().layer_name));

    const std::size_t rep = representative_index(layer);
    if (rep < layer.size()) {
      const KernelSlice& slice = extraction.slices[begin + rep];
      const FitResult& fit = layer[rep].fit;
      const std::size_t k = slice.values.width();
      GaborParams scaled = fit.params;
      scaled.amplitude *= fit.scale;
      const std::string stem = layer_file_stem(layer.front().layer_index);
      write_pgm(config.out_dir / (stem + "_learned.pgm"), render_kernel_image(slice.values, image_side(k)));
      write_pgm(config.out_dir / (stem + "_fit.pgm"), render_kernel_image(gabor_kernel(k, scaled), image_side(k)));
    }
    begin = end;
  }

  emit_report(report, ReportFormat::json, config.out_dir / "report.json");
  emit_report(report, ReportFormat::csv, config.out_dir / "report.csv");
  write_text(config.out_dir / "histogram.svg", render_histogram_svg(*report.histogram));
  if (!report.layers.empty()) {
    write_text(config.out_dir / "boxplot.svg", render_boxplot_svg(report.layers, *report.all_layers));
  } else {
    err << "warning: no slices selected; box plot not written\n";
  }

  out << "model " << model_id << ": " << fits.size() << " slices in " << report.layers.size()
      << " layers (" << simd::isa_name(simd::active_isa()) << ")\n";
  for (const auto& s : report.layers) {
    out << "  " << s.layer_name << ": count=" << s.count << " degenerate=" << s.degenerate_count;
    if (s.stats) out << " median=" << sci(s.stats->median) << " p95=" << sci(s.stats->p95);
    out << "\n";
  }
  return kSuccess;
}

int cmd_calibrate(const RunConfig& config, std::ostream& out, std::ostream& err) {
  std::vector<double> fractions = config.noise_fractions;
  if (fractions.empty()) {
    for (int i = 0; i <= 20; ++i) fractions.push_back(i / 100.0);
  }
  const GaborParams truth{1.0, 0.0, {std::numbers::pi / 4.0, std::numbers::pi / 8.0}, 3.0};
  std::vector<CalibrationPoint> curve;
  try {
    curve = calibration_curve(11, truth, fractions, config.trials, config.seed);
  } catch (const InvalidParameterError& e) {
    err << "calibrate: " << e.what() << "\n";
    return kUsage;
  }

  ensure_dir(config.out_dir);
  std::string csv = "noise_fraction,mean_rms,trials,uniform_rms\r\n";
  for (const auto& p : curve) {
    char buf[128];
    std::snprintf(buf, sizeof buf, "%.17g,%.17g,%zu,%.17g\r\n", p.noise_fraction, p.mean_rms, p.trials,
                  p.noise_fraction * kNormalizedRange / std::sqrt(3.0));
    csv += buf;
  }
  write_text(config.out_dir / "calibration.csv", csv);
  write_text(config.out_dir / "calibration.svg", render_calibration_svg(curve));
  for (const auto& p : curve) {
    out << "noise " << p.noise_fraction << " -> mean rms " << sci(p.mean_rms) << "\n";
  }
  return kSuccess;
}

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Fit oriented bandpass (Gabor-like) models to convolution kernels"};
  app.require_subcommand(1);
  RunConfig config;

  auto* verify = app.add_subcommand("verify-theory", "Check the eigenfunction and WFT shift identities");
  auto* synth = app.add_subcommand("synth", "Write a synthetic Gabor kernel archive and image");
  auto* fit = app.add_subcommand("fit", "Fit every convolution kernel slice in an archive");
  auto* calibrate = app.add_subcommand("calibrate", "RMS residual versus uniform noise level");

  for (auto* sub : {verify, synth, fit, calibrate}) {
    sub->add_option("--out", config.out_dir, "Output directory");
    sub->add_option("--seed", config.seed, "Random seed");
  }
  fit->add_option("--input", config.input, "Tensor archive")->required();
  fit->add_option("--select", config.selection, "Glob over tensor names");
  fit->add_option("--bins", config.bins, "Histogram bins")->check(CLI::PositiveNumber);
  fit->add_option("--jobs", config.jobs, "Worker threads")->check(CLI::PositiveNumber);
  calibrate->add_option("--noise", config.noise_fractions, "Comma-separated noise fractions")->delimiter(',');
  calibrate->add_option("--trials", config.trials, "Trials per noise level")->check(CLI::PositiveNumber);
  synth->add_option("--noise", config.noise_fractions, "Uniform noise fraction added to the kernel");
  synth->add_option("--k", config.kernel_side, "Kernel side");
  synth->add_option("--sigma", config.synth_params.sigma, "Window standard deviation");
  synth->add_option("--u1", config.synth_params.u_c.u1, "Center frequency along x1 (rad/sample)");
  synth->add_option("--u2", config.synth_params.u_c.u2, "Center frequency along x2 (rad/sample)");
  synth->add_option("--phase", config.synth_params.phase, "Phase (rad)");
  synth->add_option("--amplitude", config.synth_params.amplitude, "Amplitude");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (verify->parsed()) return cmd_verify_theory(config, out);
    if (synth->parsed()) return cmd_synth(config, out, err);
    if (fit->parsed()) return cmd_fit(config, out, err);
    return cmd_calibrate(config, out, err);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kFailure;
  }
}

}  // namespace bandfit::cli
