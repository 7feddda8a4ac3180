#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace modmorph {

/// Spatial extent of a convolution kernel. Both sides must be odd.
struct KernelShape {
  int h = 1;
  int w = 1;

  [[nodiscard]] int area() const { return h * w; }
  [[nodiscard]] std::string str() const;

  friend bool operator==(const KernelShape&, const KernelShape&) = default;
};

/// Kernel of a serial pair: K1 + K2 - 1 per dimension.
KernelShape serial_kernel(KernelShape first, KernelShape second);
/// Elementwise maximum, the shape two filters are padded to before addition.
KernelShape max_kernel(KernelShape a, KernelShape b);
/// True when `inner` fits inside `outer` in both dimensions.
bool kernel_fits(KernelShape inner, KernelShape outer);
/// Throws InvalidKernelError unless both sides are odd and positive.
void check_kernel(KernelShape k);

/// 4D convolution filter with layout (c_out, c_in, kh, kw), row-major.
///
/// Immutable after construction. Kernel sides are odd so that center
/// alignment and "same" padding are symmetric.
class Filter {
 public:
  Filter(int c_out, int c_in, KernelShape kernel, std::vector<double> data);

  static Filter zeros(int c_out, int c_in, KernelShape kernel);

  [[nodiscard]] int c_out() const { return c_out_; }
  [[nodiscard]] int c_in() const { return c_in_; }
  [[nodiscard]] KernelShape kernel() const { return kernel_; }
  [[nodiscard]] int kh() const { return kernel_.h; }
  [[nodiscard]] int kw() const { return kernel_.w; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] std::span<const double> data() const { return data_; }

  [[nodiscard]] std::size_t index(int o, int i, int y, int x) const {
    return ((static_cast<std::size_t>(o) * c_in_ + i) * kernel_.h + y) * kernel_.w + x;
  }
  [[nodiscard]] double operator()(int o, int i, int y, int x) const { return data_[index(o, i, y, x)]; }

  /// Releases the storage; lets callers build a modified copy without a second allocation.
  [[nodiscard]] std::vector<double> take_data() && { return std::move(data_); }

  friend bool operator==(const Filter&, const Filter&) = default;

 private:
  int c_out_;
  int c_in_;
  KernelShape kernel_;
  std::vector<double> data_;
};

/// 3D activation tensor with layout (c, h, w), row-major.
class Blob {
 public:
  Blob(int c, int h, int w, std::vector<double> data);

  static Blob zeros(int c, int h, int w);

  [[nodiscard]] int c() const { return c_; }
  [[nodiscard]] int h() const { return h_; }
  [[nodiscard]] int w() const { return w_; }
  [[nodiscard]] std::size_t size() const { return data_.size(); }
  [[nodiscard]] std::span<const double> data() const { return data_; }

  [[nodiscard]] std::size_t index(int ch, int y, int x) const {
    return (static_cast<std::size_t>(ch) * h_ + y) * w_ + x;
  }
  [[nodiscard]] double operator()(int ch, int y, int x) const { return data_[index(ch, y, x)]; }

  [[nodiscard]] std::vector<double> take_data() && { return std::move(data_); }

  friend bool operator==(const Blob&, const Blob&) = default;

 private:
  int c_;
  int h_;
  int w_;
  std::vector<double> data_;
};

}  // namespace modmorph
