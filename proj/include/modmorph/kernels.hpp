#pragma once

// Hot loops of the convolution algebra in two flavours: a serial reference
// and an OpenMP version that splits the work over output channels. Both assume shapes were checked by the caller (see
// algebra.hpp); the public entry points there dispatch to `parallel`.
//
// Index convention, fixed for the whole library:
//   conv:    out(o, y, x)   = sum_{i,u,v} in(i, y+u-ph, x+v-pw) * f(o, i, u, v)
//   compose: g(o, i, a, b)  = sum_{l,s,t} f2(o, l, s, t) * f1(l, i, a-s, b-t)
// so compose is a full 2D convolution of the kernels contracted over the
// middle channel, and conv(compose(f2, f1), b) = conv(f2, conv(f1, b)) away
// from the zero-padded border.

#include "modmorph/tensor.hpp"

namespace modmorph::kernels {

namespace serial {

Blob conv_blob(const Filter& f, const Blob& b);
Filter compose(const Filter& f2, const Filter& f1);

}  // namespace serial

namespace parallel {

Blob conv_blob(const Filter& f, const Blob& b);
Filter compose(const Filter& f2, const Filter& f1);

}  // namespace parallel

}  // namespace modmorph::kernels
