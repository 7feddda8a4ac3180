#include "modmorph/engine.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <stdexcept>

#include "modmorph/algebra.hpp"
#include "modmorph/errors.hpp"
#include "modmorph/executor.hpp"
#include "modmorph/graph_io.hpp"

namespace modmorph {

std::string to_string(Strategy s) {
  switch (s) {
    case Strategy::kAuto:
      return "auto";
    case Strategy::kReplayOnly:
      return "replay";
    case Strategy::kDirectSolve:
      return "direct";
  }
  return "auto";
}

Strategy parse_strategy(const std::string& name) {
  if (name == "auto") return Strategy::kAuto;
  if (name == "replay" || name == "replay-only") return Strategy::kReplayOnly;
  if (name == "direct" || name == "direct-solve") return Strategy::kDirectSolve;
  throw ConfigError("unknown strategy '" + name + "'");
}

namespace {

SolverConfig with_seed(const SolverConfig& cfg, std::uint64_t stream) {
  SolverConfig out = cfg;
  out.seed = derive_seed(cfg.seed, stream);
  return out;
}

struct Replay {
  std::optional<ModuleGraph> assigned;  // nullopt: AUTO must fall back
  std::vector<PhaseRecord> log;
  std::optional<SolveReport> report;
};

Filter fit_parent(const Filter& parent, KernelShape k) {
  if (!kernel_fits(support_shape(parent), k)) {
    throw InvalidTargetError("parent filter support " + support_shape(parent).str() + " does not fit the module's " +
                             k.str() + " kernel");
  }
  return center_crop(zero_pad(parent, max_kernel(parent.kernel(), k)), k);
}

Replay replay(const MorphRequest& req, const ReductionResult& plan) {
  const SolverConfig& cfg = req.config;
  const bool may_fall_back = req.strategy == Strategy::kAuto;
  Replay out;
  ModuleGraph current = plan.residual_graph;
  if (plan.classification == Classification::kSimpleMorphable) {
    const Edge e0 = current.edges().front();
    current = current.with_filter(e0.id, fit_parent(req.parent, e0.kernel));
    out.log.push_back({"M0", e0.id, "copy", 0.0});
  } else {
    auto sol = solve_irreducible(current, req.parent, with_seed(cfg, 0));
    out.log.push_back({"IRREDUCIBLE", "", "alternating", sol.report.residual});
    out.report = sol.report;
    current = std::move(sol.assigned);
    if (!sol.report.converged && may_fall_back) {
      if (auto routed = identity_path_assignment(plan.residual_graph, req.parent)) {
        current = std::move(*routed);
        out.log.push_back({"IRREDUCIBLE", "", "identity-path", verify_equation(current, req.parent)});
      }
    }
  }

  for (std::size_t k = 0; k < plan.steps.size(); ++k) {
    const MorphStep& step = plan.steps[k];
    const std::uint64_t stream = k + 1;
    Rng rng(derive_seed(cfg.seed, stream));
    const Filter g = *current.edge(step.parent_edge.id).filter;
    const KernelShape k1 = step.child_edges[0].kernel;
    const KernelShape k2 = step.child_edges[1].kernel;
    std::optional<std::pair<Filter, Filter>> children;
    PhaseRecord rec{to_string(step.kind), step.parent_edge.id, "", 0.0};

    if (step.kind == MorphKind::kTypeII) {
      try {
        children = split_type_ii(g, k1, k2, req.split_mode, rng, cfg.init_std);
      } catch (const InvalidTargetError&) {
        if (!may_fall_back) throw;
        return out;
      }
      rec.method = req.split_mode == SplitMode::kEqual ? "equal-split" : "split";
      rec.residual = relative_error(add_filters(children->first, children->second), g);
    } else {
      const int c_mid = step.intermediate_vertex->channels;
      std::optional<Decomposition> als;
      if (frobenius_norm(g) == 0.0) {
        children = std::pair{Filter::zeros(c_mid, g.c_in(), k1), Filter::zeros(g.c_out(), c_mid, k2)};
        rec.method = "zero";
      } else if (type_i_size_condition(g, k1, k2, c_mid)) {
        als = decompose_type_i(g, k1, k2, c_mid, with_seed(cfg, stream));
        if (als->report.converged) {
          children = std::pair{als->f1, als->f2};
          rec.method = "als";
        }
      }
      if (!children) {
        if (auto exact = identity_type_i(g, k1, k2, c_mid, rng, cfg.init_std)) {
          children = std::move(*exact);
          rec.method = "identity";
        }
      }
      if (!children) {
        if (may_fall_back) return out;
        if (!als) als = decompose_type_i(g, k1, k2, c_mid, with_seed(cfg, stream));
        children = std::pair{als->f1, als->f2};
        rec.method = "als";
      }
      rec.residual = rec.method == "zero" ? 0.0 : relative_error(compose(children->second, children->first), g);
    }
    current = apply_morph(current, step, std::move(children));
    out.log.push_back(std::move(rec));
  }
  out.assigned = std::move(current);
  return out;
}

}  // namespace

MorphResult morph(const MorphRequest& req) {
  req.config.validate();
  require_valid(req.target);
  const ModuleGraph target = req.target.without_filters();
  if (target.channels(target.source()) != req.parent.c_in() || target.channels(target.sink()) != req.parent.c_out()) {
    throw InvalidTargetError("target source/sink channels (" + std::to_string(target.channels(target.source())) +
                             ", " + std::to_string(target.channels(target.sink())) +
                             ") do not match the parent filter (" + std::to_string(req.parent.c_in()) + ", " +
                             std::to_string(req.parent.c_out()) + ")");
  }

  MorphResult result{target, reduce(target), req.strategy, 0.0, 0.0, false, {}, std::nullopt};
  std::optional<ModuleGraph> solved;
  if (req.strategy != Strategy::kDirectSolve) {
    if (result.plan.classification == Classification::kComplex && req.strategy == Strategy::kReplayOnly) {
      throw StrategyError("target is complex; replay-only strategy cannot morph it");
    }
    Replay r = replay(req, result.plan);
    result.phase_log = std::move(r.log);
    result.solver_report = std::move(r.report);
    solved = std::move(r.assigned);
  }
  if (!solved) {
    auto sol = solve_irreducible(target, req.parent, with_seed(req.config, 0));
    result.phase_log.push_back({"DIRECT", "", "alternating", sol.report.residual});
    result.solver_report = sol.report;
    result.strategy_used = Strategy::kDirectSolve;
    solved = std::move(sol.assigned);
    if (!sol.report.converged && req.strategy == Strategy::kAuto) {
      if (auto routed = identity_path_assignment(target, req.parent)) {
        solved = std::move(*routed);
        result.phase_log.push_back({"DIRECT", "", "identity-path", verify_equation(*solved, req.parent)});
      }
    }
  }

  if (!same_topology(*solved, target)) throw std::logic_error("morph: replay did not rebuild the target topology");
  ModuleGraph assigned = target;
  for (const auto& e : target.edges()) assigned = assigned.with_filter(e.id, *solved->edge(e.id).filter);
  result.assigned = std::move(assigned);

  result.equation_residual = verify_equation(result.assigned, req.parent);
  result.converged = result.equation_residual <= req.config.tol;
  VerifyOptions vo = req.verify;
  const KernelShape k = max_kernel(effective_kernel(result.assigned), req.parent.kernel());
  vo.blob_h = std::max(vo.blob_h, k.h);
  vo.blob_w = std::max(vo.blob_w, k.w);
  result.function_residual = verify_function(result.assigned, req.parent, vo);
  return result;
}

MorphResult morph_edge(const ModuleGraph& host, const std::string& edge_id, const ModuleGraph& sub_target,
                       const MorphRequest& settings) {
  require_valid(host);
  const std::size_t pos = host.edge_index(edge_id);
  const Edge& edge = host.edges()[pos];
  if (!edge.filter) throw UnassignedEdgeError("edge '" + edge_id + "' has no filter to morph");
  const Filter host_filter = module_filter(host);

  MorphRequest req = settings;
  req.parent = *edge.filter;
  req.target = sub_target;
  MorphResult sub = morph(req);
  const ModuleGraph& piece = sub.assigned;

  const std::string prefix = edge_id + ".";
  auto map_vertex = [&](const std::string& v) {
    if (v == piece.source()) return edge.from;
    if (v == piece.sink()) return edge.to;
    return prefix + v;
  };
  std::vector<Vertex> vertices;
  for (const auto& v : host.vertices()) {
    if (v.id == host.sink()) {
      for (const auto& w : piece.vertices()) {
        if (w.id != piece.source() && w.id != piece.sink()) vertices.push_back({prefix + w.id, w.channels});
      }
    }
    vertices.push_back(v);
  }
  std::vector<Edge> edges;
  for (std::size_t e = 0; e < host.edges().size(); ++e) {
    if (e != pos) {
      edges.push_back(host.edges()[e]);
      continue;
    }
    for (const auto& pe : piece.edges()) {
      edges.push_back({prefix + pe.id, map_vertex(pe.from), map_vertex(pe.to), pe.kernel, pe.filter});
    }
  }
  ModuleGraph spliced(std::move(vertices), std::move(edges), host.source(), host.sink());
  require_valid(spliced);

  sub.assigned = std::move(spliced);
  sub.equation_residual = verify_equation(sub.assigned, host_filter);
  sub.converged = sub.equation_residual <= settings.config.tol;
  VerifyOptions vo = settings.verify;
  const KernelShape k = max_kernel(effective_kernel(sub.assigned), host_filter.kernel());
  vo.blob_h = std::max(vo.blob_h, k.h);
  vo.blob_w = std::max(vo.blob_w, k.w);
  sub.function_residual = verify_function(sub.assigned, host_filter, vo);
  return sub;
}

double verify_equation(const ModuleGraph& assigned, const Filter& parent) {
  return relative_error(module_filter(assigned), parent);
}

double verify_function(const ModuleGraph& assigned, const Filter& parent, const VerifyOptions& opts) {
  if (opts.trials < 1) throw ConfigError("verify: trials must be at least 1");
  require_valid(assigned);
  const LayeredModule linear = LayeredModule::linear(assigned);
  const int c_in = assigned.channels(assigned.source());
  if (parent.c_in() != c_in || parent.c_out() != assigned.channels(assigned.sink())) {
    throw DimensionError("verify: parent channels do not match the module");
  }
  const KernelShape k = max_kernel(effective_kernel(assigned), parent.kernel());
  const int bh = (k.h - 1) / 2;
  const int bw = (k.w - 1) / 2;
  if (opts.blob_h - 2 * bh < 1 || opts.blob_w - 2 * bw < 1) {
    throw ConfigError("verify: " + std::to_string(opts.blob_h) + "x" + std::to_string(opts.blob_w) +
                      " blobs have no interior for a " + k.str() + " effective kernel");
  }

  std::vector<double> errors(static_cast<std::size_t>(opts.trials), 0.0);
  std::exception_ptr failure;
#pragma omp parallel for schedule(static)
  for (int t = 0; t < opts.trials; ++t) {
    try {
      Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(t)));
      const Blob b = random_blob(c_in, opts.blob_h, opts.blob_w, rng);
      const Blob y = forward(linear, b);
      const Blob ref = conv_blob(parent, b);
      double diff = 0.0;
      double norm = 0.0;
      for (int c = 0; c < y.c(); ++c) {
        for (int row = bh; row < y.h() - bh; ++row) {
          for (int col = bw; col < y.w() - bw; ++col) {
            const double d = y(c, row, col) - ref(c, row, col);
            diff += d * d;
            norm += ref(c, row, col) * ref(c, row, col);
          }
        }
      }
      errors[t] = norm > 0.0 ? std::sqrt(diff / norm) : std::sqrt(diff);
    } catch (...) {
#pragma omp critical
      failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  return *std::max_element(errors.begin(), errors.end());
}

nlohmann::json phase_to_json(const PhaseRecord& p) {
  return {{"kind", p.kind}, {"edge", p.edge}, {"method", p.method}, {"residual", p.residual}};
}

nlohmann::json result_to_json(const MorphResult& r, const std::map<std::string, std::string>& filter_paths) {
  nlohmann::json log = nlohmann::json::array();
  for (const auto& p : r.phase_log) log.push_back(phase_to_json(p));
  return {{"strategy", to_string(r.strategy_used)},
          {"classification", to_string(r.plan.classification)},
          {"equation_residual", r.equation_residual},
          {"function_residual", r.function_residual},
          {"converged", r.converged},
          {"phase_log", std::move(log)},
          {"solver_report", r.solver_report ? report_to_json(*r.solver_report) : nlohmann::json()},
          {"plan", trace_to_json(r.plan)},
          {"assigned", io::module_to_json(r.assigned, filter_paths)}};
}

}  // namespace modmorph
