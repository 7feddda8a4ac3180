#include "modmorph/algebra.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <vector>

#include "modmorph/errors.hpp"
#include "modmorph/kernels.hpp"

namespace modmorph {

namespace {

void require_same_channels(const Filter& a, const Filter& b, const char* op) {
  if (a.c_out() != b.c_out() || a.c_in() != b.c_in()) {
    throw DimensionError(std::string(op) + ": channel mismatch (" + std::to_string(a.c_out()) + "x" +
                         std::to_string(a.c_in()) + " vs " + std::to_string(b.c_out()) + "x" +
                         std::to_string(b.c_in()) + ")");
  }
}

Filter combine(const Filter& f1, const Filter& f2, double sign) {
  const KernelShape k = max_kernel(f1.kernel(), f2.kernel());
  std::vector<double> out = zero_pad(f1, k).take_data();
  const Filter b = zero_pad(f2, k);
  const auto bd = b.data();
  for (std::size_t n = 0; n < out.size(); ++n) out[n] += sign * bd[n];
  return Filter(f1.c_out(), f1.c_in(), k, std::move(out));
}

}  // namespace

Blob conv_blob(const Filter& f, const Blob& b) {
  if (b.c() != f.c_in()) {
    throw DimensionError("conv_blob: blob has " + std::to_string(b.c()) + " channels, filter expects " +
                         std::to_string(f.c_in()));
  }
  return kernels::parallel::conv_blob(f, b);
}

Filter compose(const Filter& f2, const Filter& f1) {
  if (f2.c_in() != f1.c_out()) {
    throw DimensionError("compose: outer filter expects " + std::to_string(f2.c_in()) +
                         " channels, inner filter produces " + std::to_string(f1.c_out()));
  }
  return kernels::parallel::compose(f2, f1);
}

Filter add_filters(const Filter& f1, const Filter& f2) {
  require_same_channels(f1, f2, "add_filters");
  return combine(f1, f2, 1.0);
}

Filter subtract_filters(const Filter& f1, const Filter& f2) {
  require_same_channels(f1, f2, "subtract_filters");
  return combine(f1, f2, -1.0);
}

Filter zero_pad(const Filter& f, KernelShape target) {
  if (target.h < f.kh() || target.w < f.kw()) {
    throw InvalidPaddingError("zero_pad: cannot shrink " + f.kernel().str() + " to " + target.str());
  }
  if ((target.h - f.kh()) % 2 != 0 || (target.w - f.kw()) % 2 != 0) {
    throw InvalidPaddingError("zero_pad: parity mismatch between " + f.kernel().str() + " and " + target.str());
  }
  if (target == f.kernel()) return f;
  const int oy = (target.h - f.kh()) / 2;
  const int ox = (target.w - f.kw()) / 2;
  Filter out = Filter::zeros(f.c_out(), f.c_in(), target);
  std::vector<double> d = std::move(out).take_data();
  for (int o = 0; o < f.c_out(); ++o)
    for (int i = 0; i < f.c_in(); ++i)
      for (int y = 0; y < f.kh(); ++y)
        for (int x = 0; x < f.kw(); ++x)
          d[((static_cast<std::size_t>(o) * f.c_in() + i) * target.h + y + oy) * target.w + x + ox] = f(o, i, y, x);
  return Filter(f.c_out(), f.c_in(), target, std::move(d));
}

Filter center_crop(const Filter& f, KernelShape target) {
  check_kernel(target);
  if (!kernel_fits(target, f.kernel())) {
    throw InvalidPaddingError("center_crop: " + target.str() + " does not fit in " + f.kernel().str());
  }
  const int oy = (f.kh() - target.h) / 2;
  const int ox = (f.kw() - target.w) / 2;
  std::vector<double> d(filter_size(f.c_out(), f.c_in(), target));
  for (int o = 0; o < f.c_out(); ++o)
    for (int i = 0; i < f.c_in(); ++i)
      for (int y = 0; y < target.h; ++y)
        for (int x = 0; x < target.w; ++x)
          d[((static_cast<std::size_t>(o) * f.c_in() + i) * target.h + y) * target.w + x] = f(o, i, y + oy, x + ox);
  return Filter(f.c_out(), f.c_in(), target, std::move(d));
}

Filter identity_filter(int channels, double scale) {
  if (channels < 1) throw DimensionError("identity_filter: channel count must be positive");
  std::vector<double> d(static_cast<std::size_t>(channels) * channels, 0.0);
  for (int c = 0; c < channels; ++c) d[static_cast<std::size_t>(c) * channels + c] = scale;
  return Filter(channels, channels, {1, 1}, std::move(d));
}

Filter scaled(const Filter& f, double factor) {
  std::vector<double> d(f.data().begin(), f.data().end());
  for (double& v : d) v *= factor;
  return Filter(f.c_out(), f.c_in(), f.kernel(), std::move(d));
}

Filter negate(const Filter& f) { return scaled(f, -1.0); }

double frobenius_norm(const Filter& f) {
  double s = 0.0;
  for (double v : f.data()) s += v * v;
  return std::sqrt(s);
}

double frobenius_norm(const Blob& b) {
  double s = 0.0;
  for (double v : b.data()) s += v * v;
  return std::sqrt(s);
}

double relative_error(const Filter& a, const Filter& b) {
  const double diff = frobenius_norm(subtract_filters(a, b));
  const double ref = frobenius_norm(b);
  return ref > 0.0 ? diff / ref : diff;
}

KernelShape support_shape(const Filter& f) {
  const int cy = (f.kh() - 1) / 2;
  const int cx = (f.kw() - 1) / 2;
  int ry = 0;
  int rx = 0;
  for (int o = 0; o < f.c_out(); ++o)
    for (int i = 0; i < f.c_in(); ++i)
      for (int y = 0; y < f.kh(); ++y)
        for (int x = 0; x < f.kw(); ++x)
          if (f(o, i, y, x) != 0.0) {
            ry = std::max(ry, std::abs(y - cy));
            rx = std::max(rx, std::abs(x - cx));
          }
  return {2 * ry + 1, 2 * rx + 1};
}

}  // namespace modmorph
