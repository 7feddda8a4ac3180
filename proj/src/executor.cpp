#include "modmorph/executor.hpp"

#include <cmath>

#include "modmorph/algebra.hpp"
#include "modmorph/errors.hpp"
#include "modmorph/graph_io.hpp"

namespace modmorph {

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kRelu:
      return "relu";
    case Activation::kTanh:
      return "tanh";
    case Activation::kSigmoid:
      return "sigmoid";
  }
  return "relu";
}

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  if (name == "sigmoid") return Activation::kSigmoid;
  throw ParameterError("unknown activation '" + name + "'");
}

BatchNormOp BatchNormOp::identity(int channels, double eps) {
  const auto n = static_cast<std::size_t>(channels);
  return {std::vector<double>(n, 1.0), std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
          std::vector<double>(n, 1.0 - eps), eps};
}

namespace {

double activate(Activation a, double x) {
  switch (a) {
    case Activation::kRelu:
      return x > 0.0 ? x : 0.0;
    case Activation::kTanh:
      return std::tanh(x);
    case Activation::kSigmoid:
      return 1.0 / (1.0 + std::exp(-x));
  }
  return x;
}

void check_pact(double a) {
  if (!(a >= 0.0 && a <= 1.0)) throw ParameterError("PACT coefficient must lie in [0, 1], got " + std::to_string(a));
}

void check_batchnorm(const BatchNormOp& p, int channels) {
  const auto n = static_cast<std::size_t>(channels);
  if (p.gamma.size() != n || p.beta.size() != n || p.mean.size() != n || p.var.size() != n) {
    throw DimensionError("batchnorm parameters must have " + std::to_string(channels) + " entries");
  }
  if (!(p.eps > 0.0)) throw ParameterError("batchnorm eps must be positive");
  for (double v : p.var) {
    if (v < 0.0) throw ParameterError("batchnorm variance must be non-negative");
  }
}

Blob add_blobs(const Blob& a, const Blob& b) {
  std::vector<double> out(a.data().begin(), a.data().end());
  const auto bd = b.data();
  for (std::size_t k = 0; k < out.size(); ++k) out[k] += bd[k];
  return Blob(a.c(), a.h(), a.w(), std::move(out));
}

}  // namespace

Blob pact(const Blob& x, double a, Activation base) {
  check_pact(a);
  std::vector<double> out(x.size());
  const auto d = x.data();
  for (std::size_t k = 0; k < out.size(); ++k) {
    // exact pass-through at a = 1 regardless of rounding in the base branch
    out[k] = a == 1.0 ? d[k] : (1.0 - a) * activate(base, d[k]) + a * d[k];
  }
  return Blob(x.c(), x.h(), x.w(), std::move(out));
}

Blob batchnorm(const Blob& x, const BatchNormOp& p) {
  check_batchnorm(p, x.c());
  std::vector<double> out(x.size());
  const auto d = x.data();
  const std::size_t plane = static_cast<std::size_t>(x.h()) * x.w();
  for (int ch = 0; ch < x.c(); ++ch) {
    const double inv = 1.0 / std::sqrt(p.var[ch] + p.eps);
    for (std::size_t k = ch * plane; k < (ch + 1) * plane; ++k) {
      out[k] = (d[k] - p.mean[ch]) * inv * p.gamma[ch] + p.beta[ch];
    }
  }
  return Blob(x.c(), x.h(), x.w(), std::move(out));
}

Blob apply_op(const LayerOp& op, const Blob& x) {
  if (const auto* conv = std::get_if<ConvOp>(&op)) return conv_blob(conv->filter, x);
  if (const auto* p = std::get_if<PactOp>(&op)) return pact(x, p->a, p->base);
  return batchnorm(x, std::get<BatchNormOp>(op));
}

LayeredModule::LayeredModule(ModuleGraph graph, std::vector<std::vector<LayerOp>> chains)
    : graph_(std::move(graph)), chains_(std::move(chains)) {
  if (chains_.size() != graph_.edges().size()) throw GraphError("layered module: one op chain per edge required");
  for (std::size_t e = 0; e < chains_.size(); ++e) {
    const Edge& edge = graph_.edges()[e];
    const std::string where = "edge '" + edge.id + "'";
    int channels = graph_.channels(edge.from);
    const Filter* conv = nullptr;
    for (const auto& op : chains_[e]) {
      if (const auto* c = std::get_if<ConvOp>(&op)) {
        if (conv) throw GraphError(where + ": more than one conv in the chain");
        conv = &c->filter;
        if (c->filter.c_in() != channels || c->filter.c_out() != graph_.channels(edge.to)) {
          throw DimensionError(where + ": conv channels do not match the chain");
        }
        if (c->filter.kernel() != edge.kernel) throw DimensionError(where + ": conv kernel differs from declared kernel");
        channels = c->filter.c_out();
      } else if (const auto* p = std::get_if<PactOp>(&op)) {
        check_pact(p->a);
      } else {
        check_batchnorm(std::get<BatchNormOp>(op), channels);
      }
    }
    if (!conv) throw GraphError(where + ": chain has no conv");
    graph_ = graph_.with_filter(edge.id, *conv);
  }
}

LayeredModule LayeredModule::linear(const ModuleGraph& assigned) {
  std::vector<std::vector<LayerOp>> chains;
  for (const auto& e : assigned.edges()) {
    if (!e.filter) throw UnassignedEdgeError("edge '" + e.id + "' has no filter");
    chains.push_back({ConvOp{*e.filter}});
  }
  return LayeredModule(assigned, std::move(chains));
}

LayeredModule with_identity_nonlinearities(const ModuleGraph& assigned, Activation base, double eps) {
  std::vector<std::vector<LayerOp>> chains;
  for (const auto& e : assigned.edges()) {
    if (!e.filter) throw UnassignedEdgeError("edge '" + e.id + "' has no filter");
    chains.push_back({ConvOp{*e.filter}, BatchNormOp::identity(assigned.channels(e.to), eps), PactOp{1.0, base}});
  }
  return LayeredModule(assigned, std::move(chains));
}

Blob forward(const LayeredModule& m, const Blob& input) {
  const ModuleGraph& g = m.graph();
  if (input.c() != g.channels(g.source())) {
    throw DimensionError("forward: input has " + std::to_string(input.c()) + " channels, source expects " +
                         std::to_string(g.channels(g.source())));
  }
  const auto order = topological_order(g);
  if (!order) throw GraphError("forward: graph contains a cycle");
  std::vector<std::optional<Blob>> values(g.vertices().size());
  values[g.source_index()] = input;
  for (auto v : *order) {
    if (v == g.source_index()) continue;
    for (auto e : g.in_edges(v)) {
      const auto& src = values[g.tail(e)];
      if (!src) continue;
      Blob x = *src;
      try {
        for (const auto& op : m.chain(e)) x = apply_op(op, x);
      } catch (const DimensionError& err) {
        throw DimensionError("edge '" + g.edges()[e].id + "': " + err.what());
      }
      values[v] = values[v] ? add_blobs(*values[v], x) : std::move(x);
    }
  }
  const auto& out = values[g.sink_index()];
  if (!out) throw GraphError("forward: sink is unreachable");
  return *out;
}

Blob forward(const ModuleGraph& m, const Blob& input) { return forward(LayeredModule::linear(m), input); }

namespace io {

namespace {

std::vector<double> number_list(const nlohmann::json& j, const char* key, const std::string& where) {
  if (!j.contains(key) || !j.at(key).is_array()) throw FormatError(where + ": '" + key + "' must be an array");
  std::vector<double> out;
  for (const auto& v : j.at(key)) {
    if (!v.is_number()) throw FormatError(where + ": '" + key + "' must hold numbers");
    out.push_back(v.get<double>());
  }
  return out;
}

}  // namespace

LayeredModule layered_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir) {
  const ModuleGraph g = module_from_json(j, base_dir);
  std::vector<std::vector<LayerOp>> chains;
  const auto& je = j.at("edges");
  for (std::size_t e = 0; e < g.edges().size(); ++e) {
    const Edge& edge = g.edges()[e];
    const std::string where = "edge '" + edge.id + "'";
    auto conv = [&]() -> LayerOp {
      if (!edge.filter) throw UnassignedEdgeError(where + ": conv op needs a filter");
      return ConvOp{*edge.filter};
    };
    std::vector<LayerOp> chain;
    if (!je[e].contains("ops")) {
      chain.push_back(conv());
    } else {
      for (const auto& op : je[e].at("ops")) {
        const std::string kind = op.value("kind", "");
        if (kind == "conv") {
          chain.push_back(conv());
        } else if (kind == "pact") {
          chain.push_back(PactOp{op.value("a", 1.0), parse_activation(op.value("base", "relu"))});
        } else if (kind == "bn") {
          chain.push_back(BatchNormOp{number_list(op, "gamma", where), number_list(op, "beta", where),
                                      number_list(op, "mean", where), number_list(op, "var", where),
                                      op.value("eps", 1e-5)});
        } else {
          throw FormatError(where + ": unknown op kind '" + kind + "'");
        }
      }
    }
    chains.push_back(std::move(chain));
  }
  return LayeredModule(g, std::move(chains));
}

nlohmann::json layered_to_json(const LayeredModule& m, const std::map<std::string, std::string>& filter_paths) {
  nlohmann::json j = module_to_json(m.graph(), filter_paths);
  for (std::size_t e = 0; e < m.chains().size(); ++e) {
    nlohmann::json ops = nlohmann::json::array();
    for (const auto& op : m.chain(e)) {
      if (std::holds_alternative<ConvOp>(op)) {
        ops.push_back({{"kind", "conv"}});
      } else if (const auto* p = std::get_if<PactOp>(&op)) {
        ops.push_back({{"kind", "pact"}, {"a", p->a}, {"base", to_string(p->base)}});
      } else {
        const auto& bn = std::get<BatchNormOp>(op);
        ops.push_back({{"kind", "bn"},
                       {"gamma", bn.gamma},
                       {"beta", bn.beta},
                       {"mean", bn.mean},
                       {"var", bn.var},
                       {"eps", bn.eps}});
      }
    }
    j["edges"][e]["ops"] = std::move(ops);
  }
  return j;
}

LayeredModule read_layered(const std::filesystem::path& path) {
  const auto j = parse_json_file(path);
  try {
    return layered_from_json(j, path.parent_path());
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(path.string() + ": " + e.what());
  }
}

}  // namespace io

}  // namespace modmorph
