#include "oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

using modmorph::Blob;
using modmorph::Edge;
using modmorph::Filter;
using modmorph::KernelShape;
using modmorph::ModuleGraph;
using modmorph::Vertex;

namespace oracle {

Blob naive_conv(const Filter& f, const Blob& b) {
  const int ph = (f.kh() - 1) / 2;
  const int pw = (f.kw() - 1) / 2;
  std::vector<double> out(static_cast<std::size_t>(f.c_out()) * b.h() * b.w(), 0.0);
  for (int o = 0; o < f.c_out(); ++o) {
    for (int y = 0; y < b.h(); ++y) {
      for (int x = 0; x < b.w(); ++x) {
        double acc = 0.0;
        for (int i = 0; i < f.c_in(); ++i) {
          for (int u = 0; u < f.kh(); ++u) {
            for (int v = 0; v < f.kw(); ++v) {
              const int yy = y + u - ph;
              const int xx = x + v - pw;
              if (yy < 0 || yy >= b.h() || xx < 0 || xx >= b.w()) continue;
              acc += b(i, yy, xx) * f(o, i, u, v);
            }
          }
        }
        out[(static_cast<std::size_t>(o) * b.h() + y) * b.w() + x] = acc;
      }
    }
  }
  return Blob(f.c_out(), b.h(), b.w(), std::move(out));
}

Filter naive_compose(const Filter& f2, const Filter& f1) {
  const int kh = f1.kh() + f2.kh() - 1;
  const int kw = f1.kw() + f2.kw() - 1;
  std::vector<double> g(static_cast<std::size_t>(f2.c_out()) * f1.c_in() * kh * kw, 0.0);
  for (int o = 0; o < f2.c_out(); ++o) {
    for (int i = 0; i < f1.c_in(); ++i) {
      for (int a = 0; a < kh; ++a) {
        for (int c = 0; c < kw; ++c) {
          double acc = 0.0;
          for (int l = 0; l < f2.c_in(); ++l) {
            for (int s = 0; s < f2.kh(); ++s) {
              for (int t = 0; t < f2.kw(); ++t) {
                const int u = a - s;
                const int v = c - t;
                if (u < 0 || u >= f1.kh() || v < 0 || v >= f1.kw()) continue;
                acc += f2(o, l, s, t) * f1(l, i, u, v);
              }
            }
          }
          g[((static_cast<std::size_t>(o) * f1.c_in() + i) * kh + a) * kw + c] = acc;
        }
      }
    }
  }
  return Filter(f2.c_out(), f1.c_in(), {kh, kw}, std::move(g));
}

Filter naive_pad(const Filter& f, KernelShape k) {
  std::vector<double> out(static_cast<std::size_t>(f.c_out()) * f.c_in() * k.h * k.w, 0.0);
  const int dy = (k.h - f.kh()) / 2;
  const int dx = (k.w - f.kw()) / 2;
  for (int o = 0; o < f.c_out(); ++o) {
    for (int i = 0; i < f.c_in(); ++i) {
      for (int y = 0; y < f.kh(); ++y) {
        for (int x = 0; x < f.kw(); ++x) {
          out[((static_cast<std::size_t>(o) * f.c_in() + i) * k.h + y + dy) * k.w + x + dx] = f(o, i, y, x);
        }
      }
    }
  }
  return Filter(f.c_out(), f.c_in(), k, std::move(out));
}

Filter brute_force_module_filter(const ModuleGraph& m) {
  std::vector<std::vector<const Edge*>> paths;
  std::vector<const Edge*> stack;
  std::function<void(const std::string&)> walk = [&](const std::string& v) {
    if (v == m.sink()) {
      paths.push_back(stack);
      return;
    }
    for (const auto& e : m.edges()) {
      if (e.from != v) continue;
      stack.push_back(&e);
      walk(e.to);
      stack.pop_back();
    }
  };
  walk(m.source());

  std::vector<Filter> terms;
  KernelShape big{1, 1};
  for (const auto& p : paths) {
    Filter acc = *p.front()->filter;
    for (std::size_t k = 1; k < p.size(); ++k) acc = naive_compose(*p[k]->filter, acc);
    big = {std::max(big.h, acc.kh()), std::max(big.w, acc.kw())};
    terms.push_back(std::move(acc));
  }
  const int c_out = m.channels(m.sink());
  const int c_in = m.channels(m.source());
  std::vector<double> sum(static_cast<std::size_t>(c_out) * c_in * big.h * big.w, 0.0);
  for (const auto& t : terms) {
    const Filter padded = naive_pad(t, big);
    for (std::size_t k = 0; k < sum.size(); ++k) sum[k] += padded.data()[k];
  }
  return Filter(c_out, c_in, big, std::move(sum));
}

std::uint64_t adjacency_path_count(const ModuleGraph& m) {
  const std::size_t n = m.vertices().size();
  std::vector<std::vector<std::uint64_t>> adj(n, std::vector<std::uint64_t>(n, 0));
  auto index = [&](const std::string& id) {
    for (std::size_t k = 0; k < n; ++k) {
      if (m.vertices()[k].id == id) return k;
    }
    return n;
  };
  for (const auto& e : m.edges()) adj[index(e.from)][index(e.to)] += 1;
  // walks of length L from s: row vector times adj^L; a DAG has none longer than n - 1
  const std::size_t s = index(m.source());
  const std::size_t t = index(m.sink());
  std::vector<std::uint64_t> row(n, 0);
  row[s] = 1;
  std::uint64_t total = 0;
  for (std::size_t len = 1; len < n; ++len) {
    std::vector<std::uint64_t> next(n, 0);
    for (std::size_t a = 0; a < n; ++a) {
      for (std::size_t b = 0; b < n; ++b) next[b] += row[a] * adj[a][b];
    }
    row = std::move(next);
    total += row[t];
  }
  return total;
}

double interior_rel_error(const Blob& a, const Blob& b, int bh, int bw) {
  double diff = 0.0;
  double norm = 0.0;
  for (int c = 0; c < a.c(); ++c) {
    for (int y = bh; y < a.h() - bh; ++y) {
      for (int x = bw; x < a.w() - bw; ++x) {
        const double d = a(c, y, x) - b(c, y, x);
        diff += d * d;
        norm += b(c, y, x) * b(c, y, x);
      }
    }
  }
  return norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff);
}

namespace {

std::pair<Filter, Filter> common(const Filter& a, const Filter& b) {
  const KernelShape k{std::max(a.kh(), b.kh()), std::max(a.kw(), b.kw())};
  return {naive_pad(a, k), naive_pad(b, k)};
}

}  // namespace

double max_abs_diff(const Filter& a, const Filter& b) {
  const auto [pa, pb] = common(a, b);
  double m = 0.0;
  for (std::size_t k = 0; k < pa.size(); ++k) m = std::max(m, std::abs(pa.data()[k] - pb.data()[k]));
  return m;
}

double rel_diff(const Filter& a, const Filter& b) {
  const auto [pa, pb] = common(a, b);
  double diff = 0.0;
  double norm = 0.0;
  for (std::size_t k = 0; k < pa.size(); ++k) {
    const double d = pa.data()[k] - pb.data()[k];
    diff += d * d;
    norm += pb.data()[k] * pb.data()[k];
  }
  return norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff);
}

Filter gaussian_filter(int c_out, int c_in, KernelShape k, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> d(static_cast<std::size_t>(c_out) * c_in * k.h * k.w);
  for (auto& v : d) v = n(rng);
  return Filter(c_out, c_in, k, std::move(d));
}

Blob gaussian_blob(int c, int h, int w, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  std::vector<double> d(static_cast<std::size_t>(c) * h * w);
  for (auto& v : d) v = n(rng);
  return Blob(c, h, w, std::move(d));
}

ModuleGraph random_dag(std::mt19937_64& rng, const DagOptions& opt) {
  auto uniform = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
  const int n = uniform(2, std::min(opt.max_vertices, opt.max_edges + 1));
  std::vector<Vertex> vertices;
  for (int v = 0; v < n; ++v) {
    const std::string id = v == 0 ? "s" : v == n - 1 ? "t" : "v" + std::to_string(v);
    vertices.push_back({id, uniform(1, opt.max_channels)});
  }
  auto kernel = [&] {
    const int h = opt.kernel_sides[uniform(0, static_cast<int>(opt.kernel_sides.size()) - 1)];
    const int w = opt.kernel_sides[uniform(0, static_cast<int>(opt.kernel_sides.size()) - 1)];
    return KernelShape{h, w};
  };
  std::vector<std::pair<int, int>> pairs;
  for (int v = 0; v + 1 < n; ++v) pairs.emplace_back(v, v + 1);
  const int extra = uniform(0, opt.max_edges - (n - 1));
  for (int k = 0; k < extra; ++k) {
    const int a = uniform(0, n - 2);
    const int b = uniform(a + 1, n - 1);
    pairs.emplace_back(a, b);
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  std::vector<Edge> edges;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    edges.push_back({"e" + std::to_string(k + 1), vertices[pairs[k].first].id, vertices[pairs[k].second].id, kernel(),
                     std::nullopt});
  }
  return ModuleGraph(std::move(vertices), std::move(edges), "s", "t");
}

ModuleGraph randomly_assigned(const ModuleGraph& m, std::mt19937_64& rng) {
  ModuleGraph out = m;
  for (const auto& e : m.edges()) {
    out = out.with_filter(e.id, gaussian_filter(m.channels(e.to), m.channels(e.from), e.kernel, rng));
  }
  return out;
}

}  // namespace oracle
