#include "modmorph/solver.hpp"

#include <algorithm>
#include <cmath>

#include "linalg.hpp"
#include "modmorph/algebra.hpp"
#include "modmorph/errors.hpp"

namespace modmorph {

void SolverConfig::validate() const {
  if (max_iter < 1) throw ConfigError("max_iter must be at least 1");
  if (!(tol > 0.0)) throw ConfigError("tol must be positive");
  if (init_std && !(*init_std > 0.0)) throw ConfigError("init_std must be positive");
}

bool SolveReport::monotone(double slack) const {
  double prev = initial_residual;
  for (double r : step_residuals) {
    if (r > prev + slack) return false;
    prev = r;
  }
  return true;
}

nlohmann::json report_to_json(const SolveReport& r) {
  return {{"iterations", r.iterations},
          {"initial_residual", r.initial_residual},
          {"residual", r.residual},
          {"converged", r.converged},
          {"size_condition_met", r.size_condition_met},
          {"per_iteration_residuals", r.per_iteration_residuals},
          {"step_residuals", r.step_residuals}};
}

namespace {

double init_std_for(const std::optional<double>& init_std, int c_in, KernelShape k) {
  return init_std ? *init_std : default_init_std(c_in, k);
}

// Center-aligned copy onto kernel k, cropping or padding each side independently.
Filter reshape_kernel(const Filter& f, KernelShape k) {
  if (f.kernel() == k) return f;
  std::vector<double> out(filter_size(f.c_out(), f.c_in(), k), 0.0);
  const int dy = (k.h - f.kh()) / 2;
  const int dx = (k.w - f.kw()) / 2;
  for (int o = 0; o < f.c_out(); ++o) {
    for (int i = 0; i < f.c_in(); ++i) {
      for (int y = 0; y < f.kh(); ++y) {
        const int ty = y + dy;
        if (ty < 0 || ty >= k.h) continue;
        for (int x = 0; x < f.kw(); ++x) {
          const int tx = x + dx;
          if (tx < 0 || tx >= k.w) continue;
          out[((static_cast<std::size_t>(o) * f.c_in() + i) * k.h + ty) * k.w + tx] = f(o, i, y, x);
        }
      }
    }
  }
  return Filter(f.c_out(), f.c_in(), k, std::move(out));
}

Filter pad_target(const Filter& g, KernelShape k, const char* what) {
  if (!kernel_fits(g.kernel(), k)) {
    throw InvalidTargetError(std::string(what) + ": filter kernel " + g.kernel().str() + " exceeds " + k.str());
  }
  return zero_pad(g, k);
}

Filter from_blocks(int c_out, int c_in, KernelShape k, const Eigen::MatrixXd& x, bool per_input) {
  std::vector<double> data(filter_size(c_out, c_in, k));
  const int area = k.area();
  for (int o = 0; o < c_out; ++o) {
    for (int i = 0; i < c_in; ++i) {
      for (int t = 0; t < area; ++t) {
        const std::size_t idx = (static_cast<std::size_t>(o) * c_in + i) * area + t;
        data[idx] = per_input ? x(o * area + t, i) : x(i * area + t, o);
      }
    }
  }
  return Filter(c_out, c_in, k, std::move(data));
}

// g(o, i, :, :) laid out as columns: per-output uses rows (i, a, b), per-input rows (o, a, b).
Eigen::MatrixXd target_blocks(const Filter& g, bool per_input) {
  const int area = g.kernel().area();
  Eigen::MatrixXd b(per_input ? g.c_out() * area : g.c_in() * area, per_input ? g.c_in() : g.c_out());
  for (int o = 0; o < g.c_out(); ++o) {
    for (int i = 0; i < g.c_in(); ++i) {
      for (int t = 0; t < area; ++t) {
        const double v = g.data()[(static_cast<std::size_t>(o) * g.c_in() + i) * area + t];
        if (per_input) {
          b(o * area + t, i) = v;
        } else {
          b(i * area + t, o) = v;
        }
      }
    }
  }
  return b;
}

// Rows (i, a, b) over `big`, columns (l, s, t) over `unknown`:
// entry known(l, i, u, v) at a = off + u + s. The first-applied factor is known.
Eigen::MatrixXd first_known_matrix(const Filter& known, KernelShape unknown, KernelShape big, int off_h, int off_w) {
  const int c_mid = known.c_out();
  const int c_in = known.c_in();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(c_in * big.area(), c_mid * unknown.area());
  for (int l = 0; l < c_mid; ++l) {
    for (int i = 0; i < c_in; ++i) {
      for (int u = 0; u < known.kh(); ++u) {
        for (int v = 0; v < known.kw(); ++v) {
          const double val = known(l, i, u, v);
          if (val == 0.0) continue;
          for (int s = 0; s < unknown.h; ++s) {
            for (int t = 0; t < unknown.w; ++t) {
              const int row = (i * big.h + off_h + u + s) * big.w + off_w + v + t;
              const int col = (l * unknown.h + s) * unknown.w + t;
              a(row, col) = val;
            }
          }
        }
      }
    }
  }
  return a;
}

// Rows (o, a, b) over `big`, columns (l, u, v) over `unknown`:
// entry known(o, l, s, t) at a = off + s + u. The second-applied factor is known.
Eigen::MatrixXd second_known_matrix(const Filter& known, KernelShape unknown, KernelShape big, int off_h, int off_w) {
  const int c_out = known.c_out();
  const int c_mid = known.c_in();
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(c_out * big.area(), c_mid * unknown.area());
  for (int o = 0; o < c_out; ++o) {
    for (int l = 0; l < c_mid; ++l) {
      for (int s = 0; s < known.kh(); ++s) {
        for (int t = 0; t < known.kw(); ++t) {
          const double val = known(o, l, s, t);
          if (val == 0.0) continue;
          for (int u = 0; u < unknown.h; ++u) {
            for (int v = 0; v < unknown.w; ++v) {
              const int row = (o * big.h + off_h + s + u) * big.w + off_w + t + v;
              const int col = (l * unknown.h + u) * unknown.w + v;
              a(row, col) = val;
            }
          }
        }
      }
    }
  }
  return a;
}

Filter column_slice(const Filter& f, int col) {
  std::vector<double> data;
  data.reserve(static_cast<std::size_t>(f.c_out()) * f.kernel().area());
  for (int o = 0; o < f.c_out(); ++o) {
    const auto base = f.index(o, col, 0, 0);
    data.insert(data.end(), f.data().begin() + base, f.data().begin() + base + f.kernel().area());
  }
  return Filter(f.c_out(), 1, f.kernel(), std::move(data));
}

Filter row_slice(const Filter& f, int row) {
  const auto base = f.index(row, 0, 0, 0);
  const auto n = static_cast<std::size_t>(f.c_in()) * f.kernel().area();
  return Filter(1, f.c_in(), f.kernel(), {f.data().begin() + base, f.data().begin() + base + n});
}

double loss(const Filter& value, const Filter& target) { return relative_error(value, target); }

}  // namespace

std::pair<Filter, Filter> split_type_ii(const Filter& g, Rng& rng, std::optional<double> init_std) {
  Filter f1 = random_filter(g.c_out(), g.c_in(), g.kernel(), init_std_for(init_std, g.c_in(), g.kernel()), rng);
  Filter f2 = subtract_filters(g, f1);
  return {std::move(f1), std::move(f2)};
}

std::pair<Filter, Filter> split_type_ii_equal(const Filter& g) { return {scaled(g, 0.5), scaled(g, 0.5)}; }

std::pair<Filter, Filter> split_type_ii(const Filter& g, KernelShape k1, KernelShape k2, SplitMode mode, Rng& rng,
                                        std::optional<double> init_std) {
  check_kernel(k1);
  check_kernel(k2);
  if (mode == SplitMode::kEqual && k1 == k2 && kernel_fits(support_shape(g), k1)) {
    return split_type_ii_equal(reshape_kernel(g, k1));
  }
  const bool first_big = kernel_fits(k2, k1);
  if (!first_big && !kernel_fits(k1, k2)) {
    throw InvalidTargetError("TYPE-II split: neither child kernel " + k1.str() + " nor " + k2.str() +
                             " contains the other");
  }
  const KernelShape big = first_big ? k1 : k2;
  const KernelShape small = first_big ? k2 : k1;
  if (!kernel_fits(support_shape(g), big)) {
    throw InvalidTargetError("TYPE-II split: filter support " + support_shape(g).str() + " exceeds child kernel " +
                             big.str());
  }
  // random part stays inside g's support so later serial factorizations see
  // no larger support than the parent had
  const KernelShape sup = support_shape(g);
  const KernelShape r{std::min(small.h, sup.h), std::min(small.w, sup.w)};
  Filter f_small = mode == SplitMode::kEqual
                       ? scaled(reshape_kernel(g, small), 0.5)
                       : zero_pad(random_filter(g.c_out(), g.c_in(), r, init_std_for(init_std, g.c_in(), r), rng), small);
  Filter f_big = subtract_filters(reshape_kernel(g, big), f_small);
  if (first_big) return {std::move(f_big), std::move(f_small)};
  return {std::move(f_small), std::move(f_big)};
}

bool type_i_size_condition(const Filter& g, KernelShape k1, KernelShape k2, int c_mid) {
  const auto target = filter_size(g.c_out(), g.c_in(), serial_kernel(k1, k2));
  return std::max(filter_size(c_mid, g.c_in(), k1), filter_size(g.c_out(), c_mid, k2)) >= target;
}

Decomposition decompose_type_i(const Filter& g, KernelShape k1, KernelShape k2, int c_mid, const SolverConfig& cfg) {
  cfg.validate();
  check_kernel(k1);
  check_kernel(k2);
  if (c_mid < 1) throw InvalidTargetError("TYPE-I decomposition: c_mid must be positive");
  const KernelShape big = serial_kernel(k1, k2);
  const Filter target = pad_target(g, big, "TYPE-I decomposition");
  const int c_in = g.c_in();
  const int c_out = g.c_out();

  Rng rng(cfg.seed);
  Filter f1 = random_filter(c_mid, c_in, k1, init_std_for(cfg.init_std, c_in, k1), rng);
  Filter f2 = Filter::zeros(c_out, c_mid, k2);

  SolveReport report;
  report.size_condition_met = type_i_size_condition(g, k1, k2, c_mid);
  report.initial_residual = loss(compose(f2, f1), target);
  report.residual = report.initial_residual;

  const Eigen::MatrixXd rhs_out = target_blocks(target, false);
  const Eigen::MatrixXd rhs_in = target_blocks(target, true);
  for (int it = 1; it <= cfg.max_iter && !report.converged; ++it) {
    report.iterations = it;
    f2 = from_blocks(c_out, c_mid, k2, linalg::least_squares(first_known_matrix(f1, k2, big, 0, 0), rhs_out), false);
    report.residual = loss(compose(f2, f1), target);
    report.step_residuals.push_back(report.residual);
    report.converged = report.residual <= cfg.tol;
    if (!report.converged) {
      f1 = from_blocks(c_mid, c_in, k1, linalg::least_squares(second_known_matrix(f2, k1, big, 0, 0), rhs_in), true);
      report.residual = loss(compose(f2, f1), target);
      report.step_residuals.push_back(report.residual);
      report.converged = report.residual <= cfg.tol;
    }
    report.per_iteration_residuals.push_back(report.residual);
  }
  return {std::move(f1), std::move(f2), std::move(report)};
}

std::optional<std::pair<Filter, Filter>> identity_type_i(const Filter& g, KernelShape k1, KernelShape k2, int c_mid,
                                                         Rng& rng, std::optional<double> init_std) {
  const KernelShape support = support_shape(g);
  const int c_in = g.c_in();
  const int c_out = g.c_out();
  if (kernel_fits(support, k2) && c_mid >= c_in) {
    // f1 routes the input channels through unchanged, f2 carries g.
    Filter spare = random_filter(c_mid, c_in, k1, init_std_for(init_std, c_in, k1), rng);
    std::vector<double> d1 = std::move(spare).take_data();
    const Filter g2 = reshape_kernel(g, k2);
    std::vector<double> d2(filter_size(c_out, c_mid, k2), 0.0);
    const int a1 = k1.area();
    const int a2 = k2.area();
    for (int l = 0; l < c_in; ++l) {
      for (int i = 0; i < c_in; ++i) {
        for (int t = 0; t < a1; ++t) d1[(static_cast<std::size_t>(l) * c_in + i) * a1 + t] = 0.0;
      }
      d1[(static_cast<std::size_t>(l) * c_in + l) * a1 + a1 / 2] = 1.0;
    }
    for (int o = 0; o < c_out; ++o) {
      for (int l = 0; l < c_in; ++l) {
        for (int t = 0; t < a2; ++t) {
          d2[(static_cast<std::size_t>(o) * c_mid + l) * a2 + t] = g2.data()[(static_cast<std::size_t>(o) * c_in + l) * a2 + t];
        }
      }
    }
    return std::pair{Filter(c_mid, c_in, k1, std::move(d1)), Filter(c_out, c_mid, k2, std::move(d2))};
  }
  if (kernel_fits(support, k1) && c_mid >= c_out) {
    // f1 carries g, f2 selects it.
    Filter spare = random_filter(c_out, c_mid, k2, init_std_for(init_std, c_mid, k2), rng);
    std::vector<double> d2 = std::move(spare).take_data();
    const Filter g1 = reshape_kernel(g, k1);
    std::vector<double> d1(filter_size(c_mid, c_in, k1), 0.0);
    const int a2 = k2.area();
    for (int o = 0; o < c_out; ++o) {
      for (int l = 0; l < c_out; ++l) {
        for (int t = 0; t < a2; ++t) d2[(static_cast<std::size_t>(o) * c_mid + l) * a2 + t] = 0.0;
      }
      d2[(static_cast<std::size_t>(o) * c_mid + o) * a2 + a2 / 2] = 1.0;
    }
    std::copy(g1.data().begin(), g1.data().end(), d1.begin());
    return std::pair{Filter(c_mid, c_in, k1, std::move(d1)), Filter(c_out, c_mid, k2, std::move(d2))};
  }
  return std::nullopt;
}

DeconvOperator::DeconvOperator(const ModuleGraph& m, const std::string& edge_id)
    : structure_(Structure::kDense),
      effective_(effective_kernel(m)),
      edge_kernel_(m.edge(edge_id).kernel),
      c_tail_(m.channels(m.edge(edge_id).from)),
      c_head_(m.channels(m.edge(edge_id).to)),
      prefix_(Filter::zeros(1, 1, {1, 1})),
      suffix_(Filter::zeros(1, 1, {1, 1})),
      constant_(Filter::zeros(1, 1, {1, 1})) {
  const std::size_t j = m.edge_index(edge_id);
  const auto tail = m.tail(j);
  const auto head = m.head(j);
  const int c_in = m.vertices()[m.source_index()].channels;
  const int c_out = m.vertices()[m.sink_index()].channels;
  const auto from_source = source_path_sums(m, j);
  const auto to_sink = sink_path_sums(m, j);
  if (!from_source[tail] || !to_sink[head]) throw GraphError("deconv: edge '" + edge_id + "' lies on no path");
  prefix_ = *from_source[tail];
  suffix_ = *to_sink[head];
  const auto& rest = from_source[m.sink_index()];
  constant_ = rest ? zero_pad(*rest, effective_) : Filter::zeros(c_out, c_in, effective_);
  if (tail == m.source_index()) {
    structure_ = Structure::kPerInput;
  } else if (head == m.sink_index()) {
    structure_ = Structure::kPerOutput;
  }
}

std::size_t DeconvOperator::rows() const { return constant_.size(); }

std::size_t DeconvOperator::cols() const { return filter_size(c_head_, c_tail_, edge_kernel_); }

std::vector<double> DeconvOperator::assemble() const {
  const std::size_t n_cols = cols();
  std::vector<double> a(rows() * n_cols, 0.0);
  const KernelShape kt = serial_kernel(suffix_.kernel(), prefix_.kernel());
  const KernelShape total = serial_kernel(kt, edge_kernel_);
  const int off_h = (effective_.h - total.h) / 2;
  const int off_w = (effective_.w - total.w) / 2;
  const int c_out = constant_.c_out();
  const int c_in = constant_.c_in();
  for (int p = 0; p < c_head_; ++p) {
    const Filter s_col = column_slice(suffix_, p);
    for (int q = 0; q < c_tail_; ++q) {
      const Filter t = compose(s_col, row_slice(prefix_, q));
      for (int y = 0; y < edge_kernel_.h; ++y) {
        for (int x = 0; x < edge_kernel_.w; ++x) {
          const std::size_t col = ((static_cast<std::size_t>(p) * c_tail_ + q) * edge_kernel_.h + y) * edge_kernel_.w + x;
          for (int o = 0; o < c_out; ++o) {
            for (int i = 0; i < c_in; ++i) {
              for (int e = 0; e < t.kh(); ++e) {
                for (int f = 0; f < t.kw(); ++f) {
                  const std::size_t row = constant_.index(o, i, off_h + e + y, off_w + f + x);
                  a[row * n_cols + col] += t(o, i, e, f);
                }
              }
            }
          }
        }
      }
    }
  }
  return a;
}

std::vector<double> DeconvOperator::apply(std::span<const double> x) const {
  if (x.size() != cols()) throw DimensionError("deconv apply: vector length mismatch");
  const auto a = assemble();
  std::vector<double> y(rows(), 0.0);
  for (std::size_t r = 0; r < y.size(); ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < x.size(); ++c) acc += a[r * x.size() + c] * x[c];
    y[r] = acc;
  }
  return y;
}

Filter DeconvOperator::solve(const Filter& g_tilde) const {
  if (g_tilde.c_out() != constant_.c_out() || g_tilde.c_in() != constant_.c_in()) {
    throw DimensionError("deconv: target channels do not match the module");
  }
  const Filter rhs = subtract_filters(pad_target(g_tilde, effective_, "deconv"), constant_);
  switch (structure_) {
    case Structure::kPerInput: {
      const KernelShape total = serial_kernel(suffix_.kernel(), edge_kernel_);
      const int off_h = (effective_.h - total.h) / 2;
      const int off_w = (effective_.w - total.w) / 2;
      const auto x = linalg::least_squares(second_known_matrix(suffix_, edge_kernel_, effective_, off_h, off_w),
                                           target_blocks(rhs, true));
      return from_blocks(c_head_, c_tail_, edge_kernel_, x, true);
    }
    case Structure::kPerOutput: {
      const KernelShape total = serial_kernel(edge_kernel_, prefix_.kernel());
      const int off_h = (effective_.h - total.h) / 2;
      const int off_w = (effective_.w - total.w) / 2;
      const auto x = linalg::least_squares(first_known_matrix(prefix_, edge_kernel_, effective_, off_h, off_w),
                                           target_blocks(rhs, false));
      return from_blocks(c_head_, c_tail_, edge_kernel_, x, false);
    }
    case Structure::kDense:
      break;
  }
  const auto dense = assemble();
  const Eigen::Index r = static_cast<Eigen::Index>(rows());
  const Eigen::Index c = static_cast<Eigen::Index>(cols());
  Eigen::MatrixXd a(r, c);
  for (Eigen::Index i = 0; i < r; ++i) {
    for (Eigen::Index k = 0; k < c; ++k) a(i, k) = dense[i * c + k];
  }
  Eigen::MatrixXd b(r, 1);
  for (Eigen::Index i = 0; i < r; ++i) b(i, 0) = rhs.data()[i];
  const Eigen::MatrixXd x = linalg::least_squares(a, b);
  return Filter(c_head_, c_tail_, edge_kernel_, std::vector<double>(x.data(), x.data() + c));
}

Filter deconv_solve(const Filter& g_tilde, const ModuleGraph& m, const std::string& edge_id) {
  require_valid(m);
  const std::size_t j = m.edge_index(edge_id);
  for (std::size_t e = 0; e < m.edges().size(); ++e) {
    if (e != j && !m.edges()[e].filter) throw UnassignedEdgeError("deconv: edge '" + m.edges()[e].id + "' has no filter");
  }
  return DeconvOperator(m, edge_id).solve(g_tilde);
}

IrreducibleSolution solve_irreducible(const ModuleGraph& m, const Filter& g, const SolverConfig& cfg) {
  cfg.validate();
  require_valid(m);
  if (m.channels(m.source()) != g.c_in() || m.channels(m.sink()) != g.c_out()) {
    throw InvalidTargetError("module source/sink channels do not match the parent filter");
  }
  const KernelShape eff = effective_kernel(m);
  const Filter target = pad_target(g, eff, "irreducible solve");

  Rng rng(cfg.seed);
  ModuleGraph assigned = m.without_filters();
  SolveReport report;
  for (const auto& e : m.edges()) {
    const int c_in = m.channels(e.from);
    assigned = assigned.with_filter(e.id, random_filter(m.channels(e.to), c_in, e.kernel,
                                                        init_std_for(cfg.init_std, c_in, e.kernel), rng));
    report.size_condition_met |= filter_size(m.channels(e.to), c_in, e.kernel) >= target.size();
  }
  report.initial_residual = loss(module_filter(assigned), target);
  report.residual = report.initial_residual;
  report.converged = report.residual <= cfg.tol;

  for (int it = 1; it <= cfg.max_iter && !report.converged; ++it) {
    report.iterations = it;
    for (const auto& e : m.edges()) {
      Filter f = DeconvOperator(assigned, e.id).solve(target);
      assigned = assigned.with_filter(e.id, std::move(f));
      report.residual = loss(module_filter(assigned), target);
      report.step_residuals.push_back(report.residual);
      if (report.residual <= cfg.tol) {
        report.converged = true;
        break;
      }
    }
    report.per_iteration_residuals.push_back(report.residual);
  }
  return {std::move(assigned), std::move(report)};
}

namespace {

// Keeps the first min(c_out, c_in) channels, centred in kernel k.
Filter channel_identity(int c_out, int c_in, KernelShape k) {
  std::vector<double> d(filter_size(c_out, c_in, k), 0.0);
  const int area = k.area();
  for (int c = 0; c < std::min(c_out, c_in); ++c) d[(static_cast<std::size_t>(c) * c_in + c) * area + area / 2] = 1.0;
  return Filter(c_out, c_in, k, std::move(d));
}

// g in the leading c_out x c_in block of a larger filter.
Filter embed(const Filter& g, int c_out, int c_in, KernelShape k) {
  const Filter src = reshape_kernel(g, k);
  std::vector<double> d(filter_size(c_out, c_in, k), 0.0);
  const auto area = static_cast<std::size_t>(k.area());
  for (int o = 0; o < g.c_out(); ++o) {
    for (int i = 0; i < g.c_in(); ++i) {
      std::copy_n(src.data().begin() + (static_cast<std::size_t>(o) * g.c_in() + i) * area, area,
                  d.begin() + (static_cast<std::size_t>(o) * c_in + i) * area);
    }
  }
  return Filter(c_out, c_in, k, std::move(d));
}

}  // namespace

std::optional<ModuleGraph> identity_path_assignment(const ModuleGraph& m, const Filter& g) {
  require_valid(m);
  if (m.channels(m.source()) != g.c_in() || m.channels(m.sink()) != g.c_out()) {
    throw InvalidTargetError("module source/sink channels do not match the parent filter");
  }
  const KernelShape support = support_shape(g);
  for (const auto& path : enumerate_paths(m).paths) {
    for (std::size_t carry = 0; carry < path.size(); ++carry) {
      const Edge& ce = m.edge(path[carry]);
      bool fits = kernel_fits(support, ce.kernel);
      for (std::size_t k = 0; k + 1 < path.size() && fits; ++k) {
        // vertex between path[k] and path[k + 1]
        const int c = m.channels(m.edge(path[k]).to);
        fits = c >= (k < carry ? g.c_in() : g.c_out());
      }
      if (!fits) continue;
      ModuleGraph out = m.without_filters();
      for (const auto& e : m.edges()) {
        out = out.with_filter(e.id, Filter::zeros(m.channels(e.to), m.channels(e.from), e.kernel));
      }
      for (std::size_t k = 0; k < path.size(); ++k) {
        const Edge& e = m.edge(path[k]);
        const int co = m.channels(e.to);
        const int ci = m.channels(e.from);
        out = out.with_filter(e.id, k == carry ? embed(g, co, ci, e.kernel) : channel_identity(co, ci, e.kernel));
      }
      return out;
    }
  }
  return std::nullopt;
}

}  // namespace modmorph
