#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "bandfit/archive.hpp"
#include "bandfit/core_math.hpp"
#include "bandfit/report.hpp"

namespace bandfit::cli {

enum ExitCode : int { kSuccess = 0, kFailure = 1, kUsage = 2 };

enum class Subcommand { verify_theory, synth, fit, calibrate };

struct RunConfig {
  Subcommand subcommand = Subcommand::verify_theory;
  std::filesystem::path input;
  std::filesystem::path out_dir = "out";
  std::string selection = "*";
  std::uint64_t seed = 0;
  std::size_t bins = 50;
  std::vector<double> noise_fractions;
  std::size_t trials = 500;
  std::size_t jobs = 1;

  // synth
  std::size_t kernel_side = 15;
  GaborParams synth_params{1.0, -1.5707963267948966, {1.0471975511965976, 0.0}, 3.0};
};

/// Test seam: lets a caller substitute the convolution used by the
/// eigenfunction suite.
struct TheoryHooks {
  ComplexConvolver convolve;
};

inline constexpr double kTheoryTolerance = 1e-9;

int cmd_verify_theory(const RunConfig& config, std::ostream& out, const TheoryHooks& hooks = {});
int cmd_synth(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_fit(const RunConfig& config, std::ostream& out, std::ostream& err);
int cmd_calibrate(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Fits every slice on a pool of `jobs` workers; results keep slice order.
std::vector<SliceFit> fit_slices(std::span<const KernelSlice> slices, std::size_t jobs);

/// Index of the representative slice: the lower median by rms among the
/// non-degenerate fits (ties broken by position). Returns fits.size() when
/// there is none.
std::size_t representative_index(std::span<const SliceFit> fits);

/// Parses argv and runs the selected subcommand; returns the exit status.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace bandfit::cli
