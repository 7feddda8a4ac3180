#pragma once

#include "modmorph/tensor.hpp"

namespace modmorph {

/// Multi-channel "same" convolution (cross-correlation, zero boundary).
/// Output keeps the input's spatial size and has f.c_out() channels.
Blob conv_blob(const Filter& f, const Blob& b);

/// Filter composition f2 ⊛ f1: apply f1 first, then f2.
///
/// The result has kernel f1.kernel + f2.kernel - 1 and satisfies
/// conv_blob(compose(f2, f1), b) == conv_blob(f2, conv_blob(f1, b)) on the
/// interior of b (a border of half the composed kernel is affected by the
/// intermediate zero padding).
Filter compose(const Filter& f2, const Filter& f1);

/// Sum after center-aligned zero padding to the elementwise-max kernel.
Filter add_filters(const Filter& f1, const Filter& f2);

/// f1 - f2 with the same padding rule as add_filters.
Filter subtract_filters(const Filter& f1, const Filter& f2);

/// Center-embeds f in a larger kernel. Shrinking or changing parity throws
/// InvalidPaddingError.
Filter zero_pad(const Filter& f, KernelShape target);

/// Center crop to a smaller kernel. Entries outside the crop are dropped.
Filter center_crop(const Filter& f, KernelShape target);

/// 1x1 filter with channel matrix scale * I.
Filter identity_filter(int channels, double scale = 1.0);

Filter scaled(const Filter& f, double factor);
Filter negate(const Filter& f);

double frobenius_norm(const Filter& f);
double frobenius_norm(const Blob& b);

/// ||a - b||_F / ||b||_F after padding both to a common kernel; falls back to
/// the absolute difference when b is zero.
double relative_error(const Filter& a, const Filter& b);

/// Smallest centered odd kernel that contains every nonzero entry of f.
/// A zero filter has support 1x1.
KernelShape support_shape(const Filter& f);

/// Size measure |F| used by the exactness conditions: c_out * c_in * kh * kw.
inline std::size_t filter_size(int c_out, int c_in, KernelShape k) {
  return static_cast<std::size_t>(c_out) * c_in * k.h * k.w;
}

}  // namespace modmorph
