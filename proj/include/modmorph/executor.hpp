#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "modmorph/graph.hpp"
#include "modmorph/tensor.hpp"

namespace modmorph {

enum class Activation { kRelu, kTanh, kSigmoid };

std::string to_string(Activation a);
Activation parse_activation(const std::string& name);

/// (1 - a) * base(x) + a * x. Identity at a = 1.
struct PactOp {
  double a = 1.0;
  Activation base = Activation::kRelu;
};

/// (x - mean) / sqrt(var + eps) * gamma + beta, per channel.
struct BatchNormOp {
  std::vector<double> gamma;
  std::vector<double> beta;
  std::vector<double> mean;
  std::vector<double> var;
  double eps = 1e-5;

  /// gamma = 1, beta = 0, mean = 0, var = 1 - eps: an exact identity.
  static BatchNormOp identity(int channels, double eps = 1e-5);
};

struct ConvOp {
  Filter filter;
};

using LayerOp = std::variant<ConvOp, PactOp, BatchNormOp>;

Blob pact(const Blob& x, double a, Activation base = Activation::kRelu);
Blob batchnorm(const Blob& x, const BatchNormOp& p);
Blob apply_op(const LayerOp& op, const Blob& x);

/// A module whose edges carry op chains. Each chain holds exactly one conv,
/// whose filter must match the edge's declared shape; PACT and BN keep the
/// channel count of the position they sit at.
class LayeredModule {
 public:
  LayeredModule(ModuleGraph graph, std::vector<std::vector<LayerOp>> chains);

  /// One conv per edge, taken from the graph's filters.
  static LayeredModule linear(const ModuleGraph& assigned);

  [[nodiscard]] const ModuleGraph& graph() const { return graph_; }
  [[nodiscard]] const std::vector<LayerOp>& chain(std::size_t edge) const { return chains_[edge]; }
  [[nodiscard]] const std::vector<std::vector<LayerOp>>& chains() const { return chains_; }

 private:
  ModuleGraph graph_;
  std::vector<std::vector<LayerOp>> chains_;
};

/// Every edge becomes conv -> BN(identity) -> PACT(a = 1, base), the state
/// of freshly inserted non-linear layers at morphing time.
LayeredModule with_identity_nonlinearities(const ModuleGraph& assigned, Activation base = Activation::kRelu,
                                           double eps = 1e-5);

/// Topological evaluation: joins add, splits copy.
Blob forward(const LayeredModule& m, const Blob& input);
/// All-linear evaluation of a fully assigned graph.
Blob forward(const ModuleGraph& m, const Blob& input);

namespace io {

/// Module JSON with optional per-edge "ops":
///   [{"kind":"conv"}, {"kind":"bn","gamma":[..],"beta":[..],"mean":[..],"var":[..],"eps":1e-5},
///    {"kind":"pact","a":1.0,"base":"relu"}]
/// The conv op uses the edge's "filter". Edges without "ops" are a single conv.
LayeredModule layered_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json layered_to_json(const LayeredModule& m, const std::map<std::string, std::string>& filter_paths = {});
LayeredModule read_layered(const std::filesystem::path& path);

}  // namespace io

}  // namespace modmorph
