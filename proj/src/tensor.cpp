#include "modmorph/tensor.hpp"

#include <algorithm>

#include "modmorph/errors.hpp"

namespace modmorph {

std::string KernelShape::str() const { return std::to_string(h) + "x" + std::to_string(w); }

void check_kernel(KernelShape k) {
  if (k.h < 1 || k.w < 1) {
    throw InvalidKernelError("kernel sides must be positive, got " + k.str());
  }
  if (k.h % 2 == 0 || k.w % 2 == 0) {
    throw InvalidKernelError("kernel sides must be odd, got " + k.str());
  }
}

KernelShape serial_kernel(KernelShape first, KernelShape second) {
  return {first.h + second.h - 1, first.w + second.w - 1};
}

KernelShape max_kernel(KernelShape a, KernelShape b) { return {std::max(a.h, b.h), std::max(a.w, b.w)}; }

bool kernel_fits(KernelShape inner, KernelShape outer) { return inner.h <= outer.h && inner.w <= outer.w; }

Filter::Filter(int c_out, int c_in, KernelShape kernel, std::vector<double> data)
    : c_out_(c_out), c_in_(c_in), kernel_(kernel), data_(std::move(data)) {
  if (c_out < 1 || c_in < 1) {
    throw DimensionError("filter channel counts must be positive");
  }
  check_kernel(kernel);
  const auto expected = static_cast<std::size_t>(c_out) * c_in * kernel.h * kernel.w;
  if (data_.size() != expected) {
    throw DimensionError("filter data length " + std::to_string(data_.size()) + " does not match shape (" +
                         std::to_string(c_out) + ", " + std::to_string(c_in) + ", " + kernel.str() + ")");
  }
}

Filter Filter::zeros(int c_out, int c_in, KernelShape kernel) {
  const auto n = static_cast<std::size_t>(std::max(c_out, 0)) * std::max(c_in, 0) * std::max(kernel.h, 0) *
                 std::max(kernel.w, 0);
  return Filter(c_out, c_in, kernel, std::vector<double>(n, 0.0));
}

Blob::Blob(int c, int h, int w, std::vector<double> data) : c_(c), h_(h), w_(w), data_(std::move(data)) {
  if (c < 1 || h < 1 || w < 1) {
    throw DimensionError("blob extents must be positive");
  }
  if (data_.size() != static_cast<std::size_t>(c) * h * w) {
    throw DimensionError("blob data length does not match shape");
  }
}

Blob Blob::zeros(int c, int h, int w) {
  const auto n = static_cast<std::size_t>(std::max(c, 0)) * std::max(h, 0) * std::max(w, 0);
  return Blob(c, h, w, std::vector<double>(n, 0.0));
}

}  // namespace modmorph
