#include "modmorph/kernels.hpp"

#include <algorithm>
#include <vector>

namespace modmorph::kernels {

namespace {

// Scatter form for one output channel: walk the input once per filter tap and
// accumulate into the output plane. Long unit-stride inner loops vectorize.
void conv_plane(const Filter& f, const Blob& b, int o, double* plane) {
  const int kh = f.kh();
  const int kw = f.kw();
  const int ph = (kh - 1) / 2;
  const int pw = (kw - 1) / 2;
  const int h = b.h();
  const int w = b.w();
  const auto bd = b.data();
  for (int i = 0; i < f.c_in(); ++i) {
    const double* bp = bd.data() + static_cast<std::size_t>(i) * h * w;
    for (int u = 0; u < kh; ++u) {
      for (int v = 0; v < kw; ++v) {
        const double tap = f(o, i, u, v);
        if (tap == 0.0) continue;
        const int y0 = std::max(0, ph - u);
        const int y1 = std::min(h, h + ph - u);
        const int x0 = std::max(0, pw - v);
        const int x1 = std::min(w, w + pw - v);
        for (int y = y0; y < y1; ++y) {
          double* row = plane + static_cast<std::size_t>(y) * w;
          const double* src = bp + static_cast<std::size_t>(y + u - ph) * w;
          for (int x = x0; x < x1; ++x) row[x] += tap * src[x + v - pw];
        }
      }
    }
  }
}

void compose_block(const Filter& f2, const Filter& f1, int o, KernelShape k, double* out) {
  const int ci = f1.c_in();
  for (int l = 0; l < f2.c_in(); ++l) {
    for (int s = 0; s < f2.kh(); ++s) {
      for (int t = 0; t < f2.kw(); ++t) {
        const double a = f2(o, l, s, t);
        if (a == 0.0) continue;
        for (int i = 0; i < ci; ++i) {
          double* gk = out + static_cast<std::size_t>(i) * k.h * k.w;
          for (int u = 0; u < f1.kh(); ++u) {
            for (int v = 0; v < f1.kw(); ++v) gk[static_cast<std::size_t>(s + u) * k.w + t + v] += a * f1(l, i, u, v);
          }
        }
      }
    }
  }
}

KernelShape serial_shape(const Filter& f2, const Filter& f1) { return {f1.kh() + f2.kh() - 1, f1.kw() + f2.kw() - 1}; }

}  // namespace

namespace serial {

Blob conv_blob(const Filter& f, const Blob& b) {
  const std::size_t plane = static_cast<std::size_t>(b.h()) * b.w();
  std::vector<double> out(f.c_out() * plane, 0.0);
  for (int o = 0; o < f.c_out(); ++o) conv_plane(f, b, o, out.data() + o * plane);
  return Blob(f.c_out(), b.h(), b.w(), std::move(out));
}

Filter compose(const Filter& f2, const Filter& f1) {
  const KernelShape k = serial_shape(f2, f1);
  const std::size_t block = static_cast<std::size_t>(f1.c_in()) * k.h * k.w;
  std::vector<double> g(f2.c_out() * block, 0.0);
  for (int o = 0; o < f2.c_out(); ++o) compose_block(f2, f1, o, k, g.data() + o * block);
  return Filter(f2.c_out(), f1.c_in(), k, std::move(g));
}

}  // namespace serial

namespace parallel {

// Output channels are independent, so each thread owns whole planes and the
// per-entry summation order matches the serial kernels exactly.
Blob conv_blob(const Filter& f, const Blob& b) {
  const std::size_t plane = static_cast<std::size_t>(b.h()) * b.w();
  std::vector<double> out(f.c_out() * plane, 0.0);
#pragma omp parallel for schedule(static)
  for (int o = 0; o < f.c_out(); ++o) conv_plane(f, b, o, out.data() + o * plane);
  return Blob(f.c_out(), b.h(), b.w(), std::move(out));
}

Filter compose(const Filter& f2, const Filter& f1) {
  const KernelShape k = serial_shape(f2, f1);
  const std::size_t block = static_cast<std::size_t>(f1.c_in()) * k.h * k.w;
  std::vector<double> g(f2.c_out() * block, 0.0);
#pragma omp parallel for schedule(static)
  for (int o = 0; o < f2.c_out(); ++o) compose_block(f2, f1, o, k, g.data() + o * block);
  return Filter(f2.c_out(), f1.c_in(), k, std::move(g));
}

}  // namespace parallel

}  // namespace modmorph::kernels
