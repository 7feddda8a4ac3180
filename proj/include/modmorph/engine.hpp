#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "modmorph/graph.hpp"
#include "modmorph/reduction.hpp"
#include "modmorph/solver.hpp"

namespace modmorph {

enum class Strategy {
  kAuto,         // replay the reduction plan, solving the irreducible core if any;
                 // unconverged solves fall back to exact identity constructions
  kReplayOnly,   // replay only; complex targets are rejected
  kDirectSolve,  // alternating solver on the whole target
};

std::string to_string(Strategy s);
Strategy parse_strategy(const std::string& name);

struct VerifyOptions {
  int trials = 10;
  int blob_h = 16;
  int blob_w = 16;
  std::uint64_t seed = 0;
};

struct MorphRequest {
  Filter parent;
  /// Kernels and channels declared; any filters present are ignored.
  ModuleGraph target;
  SolverConfig config;
  Strategy strategy = Strategy::kAuto;
  SplitMode split_mode = SplitMode::kRandom;
  VerifyOptions verify;
};

struct PhaseRecord {
  std::string kind;  // "M0", "TYPE_I", "TYPE_II", "IRREDUCIBLE" or "DIRECT"
  std::string edge;
  /// "copy", "split", "equal-split", "als", "identity", "alternating", "identity-path", "zero"
  std::string method;
  double residual = 0.0;
};

struct MorphResult {
  ModuleGraph assigned;
  ReductionResult plan;
  Strategy strategy_used = Strategy::kAuto;
  double equation_residual = 0.0;
  double function_residual = 0.0;
  bool converged = false;
  std::vector<PhaseRecord> phase_log;
  /// Report of the alternating solver when it ran.
  std::optional<SolveReport> solver_report;
};

MorphResult morph(const MorphRequest& req);

/// Morphs one assigned edge of `host` into `sub_target` and splices the result
/// in. Interior vertices and edges of the sub-module get the prefix
/// "<edge_id>."; its source and sink become the edge's endpoints. Residuals
/// compare the new host against the old host's module filter.
MorphResult morph_edge(const ModuleGraph& host, const std::string& edge_id, const ModuleGraph& sub_target,
                       const MorphRequest& settings);

/// ||module_filter(assigned) - pad(parent)||_F / ||parent||_F.
double verify_equation(const ModuleGraph& assigned, const Filter& parent);

/// Max over trials of the relative interior error between the all-linear
/// forward of `assigned` and conv_blob(parent, b) on random blobs. The
/// interior drops a border of (K - 1) / 2 for the module's effective kernel K.
/// ConfigError when that leaves nothing to compare.
double verify_function(const ModuleGraph& assigned, const Filter& parent, const VerifyOptions& opts);

nlohmann::json phase_to_json(const PhaseRecord& p);
/// Everything except the filters themselves; pass the paths they were written to.
nlohmann::json result_to_json(const MorphResult& r, const std::map<std::string, std::string>& filter_paths = {});

}  // namespace modmorph
