#include "modmorph/random.hpp"

#include <cmath>
#include <vector>

#include "modmorph/algebra.hpp"

namespace modmorph {

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) {
  // splitmix64 finalizer over the combined value
  std::uint64_t z = base + 0x9e3779b97f4a7c15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double default_init_std(int c_in, KernelShape k) { return std::sqrt(2.0 / (static_cast<double>(c_in) * k.area())); }

Filter random_filter(int c_out, int c_in, KernelShape k, double stddev, Rng& rng) {
  std::normal_distribution<double> dist(0.0, stddev);
  std::vector<double> d(filter_size(c_out, c_in, k));
  for (double& v : d) v = dist(rng);
  return Filter(c_out, c_in, k, std::move(d));
}

Blob random_blob(int c, int h, int w, Rng& rng) {
  std::normal_distribution<double> dist(0.0, 1.0);
  std::vector<double> d(static_cast<std::size_t>(c) * h * w);
  for (double& v : d) v = dist(rng);
  return Blob(c, h, w, std::move(d));
}

}  // namespace modmorph
