#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace bandfit {

/// Row-major 2D sample grid. Rows run along x2, columns along x1.
template <class T>
class Grid2 {
 public:
  using value_type = T;

  Grid2() = default;

  /// Zero-filled grid. Both sides must be positive.
  Grid2(std::size_t height, std::size_t width);

  /// Takes ownership of `values`; requires values.size() == height * width
  /// and every component finite.
  Grid2(std::size_t height, std::size_t width, std::vector<T> values);

  std::size_t height() const noexcept { return height_; }
  std::size_t width() const noexcept { return width_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }
  bool is_square() const noexcept { return height_ == width_; }

  T& operator()(std::size_t row, std::size_t col) { return values_[row * width_ + col]; }
  const T& operator()(std::size_t row, std::size_t col) const {
    return values_[row * width_ + col];
  }

  std::span<T> values() noexcept { return values_; }
  std::span<const T> values() const noexcept { return values_; }

  friend bool operator==(const Grid2&, const Grid2&) = default;

 private:
  std::size_t height_ = 0;
  std::size_t width_ = 0;
  std::vector<T> values_;
};

using Field2 = Grid2<double>;
using ComplexField2 = Grid2<std::complex<double>>;

extern template class Grid2<double>;
extern template class Grid2<std::complex<double>>;

/// Centered sample coordinates of a k x k kernel, row-major. Odd sides give
/// integer coordinates, even sides half-integers; both are symmetric about 0.
struct Coords2 {
  std::size_t side = 0;
  std::vector<double> x1;
  std::vector<double> x2;
};

/// Spatial frequency in radians per sample.
struct Freq2 {
  double u1 = 0.0;
  double u2 = 0.0;

  friend bool operator==(const Freq2&, const Freq2&) = default;
};

/// Integer DFT bin; m1 indexes x1 (columns), m2 indexes x2 (rows).
struct FreqIndex {
  std::size_t m1 = 0;
  std::size_t m2 = 0;
};

ComplexField2 to_complex(const Field2& field);

}  // namespace bandfit
