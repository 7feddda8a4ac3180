#pragma once

#include <cstdint>
#include <random>

#include "modmorph/tensor.hpp"

namespace modmorph {

using Rng = std::mt19937_64;

/// Derives an independent stream seed from a base seed and a stream index.
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream);

/// He-style default: sqrt(2 / fan_in) with fan_in = c_in * kh * kw.
double default_init_std(int c_in, KernelShape k);

/// Zero-mean Gaussian filter with the given standard deviation.
Filter random_filter(int c_out, int c_in, KernelShape k, double stddev, Rng& rng);

/// Standard normal blob.
Blob random_blob(int c, int h, int w, Rng& rng);

}  // namespace modmorph
