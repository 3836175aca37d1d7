#include "bandfit/field.hpp"

#include <cmath>

#include "bandfit/error.hpp"

namespace bandfit {
namespace {

bool finite(double v) { return std::isfinite(v); }
bool finite(const std::complex<double>& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

void check_sides(std::size_t height, std::size_t width) {
  if (height == 0 || width == 0) {
    throw InvalidSizeError("grid sides must be positive, got " + std::to_string(height) + "x" +
                           std::to_string(width));
  }
}

}  // namespace

template <class T>
Grid2<T>::Grid2(std::size_t height, std::size_t width)
    : height_(height), width_(width) {
  check_sides(height, width);
  values_.assign(height * width, T{});
}

template <class T>
Grid2<T>::Grid2(std::size_t height, std::size_t width, std::vector<T> values)
    : height_(height), width_(width), values_(std::move(values)) {
  check_sides(height, width);
  if (values_.size() != height * width) {
    throw SizeMismatchError("grid of " + std::to_string(height) + "x" + std::to_string(width) +
                            " given " + std::to_string(values_.size()) + " values");
  }
  for (const T& v : values_) {
    if (!finite(v)) throw InvalidParameterError("grid values must be finite");
  }
}

template class Grid2<double>;
template class Grid2<std::complex<double>>;

ComplexField2 to_complex(const Field2& field) {
  std::vector<std::complex<double>> out(field.values().begin(), field.values().end());
  return ComplexField2(field.height(), field.width(), std::move(out));
}

}  // namespace bandfit
