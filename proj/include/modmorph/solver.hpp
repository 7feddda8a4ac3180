#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "modmorph/graph.hpp"
#include "modmorph/random.hpp"
#include "modmorph/tensor.hpp"

namespace modmorph {

struct SolverConfig {
  int max_iter = 100;
  /// Target for the relative Frobenius residual.
  double tol = 1e-8;
  std::uint64_t seed = 0;
  /// Standard deviation of random initialization; unset means sqrt(2 / fan_in).
  std::optional<double> init_std;

  /// Throws ConfigError on max_iter < 1, tol <= 0 or a non-positive init_std.
  void validate() const;
};

struct SolveReport {
  int iterations = 0;
  double initial_residual = 0.0;
  double residual = 0.0;
  bool converged = false;
  /// Residual after each full sweep.
  std::vector<double> per_iteration_residuals;
  /// Residual after every single block solve, in order.
  std::vector<double> step_residuals;
  /// Some unknown filter is at least as large as the padded target.
  bool size_condition_met = false;

  /// True when no step increased the residual by more than `slack`.
  [[nodiscard]] bool monotone(double slack = 1e-12) const;
};

nlohmann::json report_to_json(const SolveReport& r);

enum class SplitMode {
  kRandom,  // one child random, the other takes the remainder
  kEqual,   // halves where the shapes allow it
};

/// Random TYPE-II split with both children on g's kernel: f1 random, f2 = g - f1.
std::pair<Filter, Filter> split_type_ii(const Filter& g, Rng& rng, std::optional<double> init_std = std::nullopt);

/// (0.5 g, 0.5 g).
std::pair<Filter, Filter> split_type_ii_equal(const Filter& g);

/// TYPE-II split onto declared child kernels k1, k2. The child whose kernel
/// contains the other takes the remainder, so it must also contain g's
/// support; otherwise InvalidTargetError.
std::pair<Filter, Filter> split_type_ii(const Filter& g, KernelShape k1, KernelShape k2, SplitMode mode, Rng& rng,
                                        std::optional<double> init_std = std::nullopt);

struct Decomposition {
  Filter f1;  // applied first: c_mid x c_in x k1
  Filter f2;  // applied second: c_out x c_mid x k2
  SolveReport report;
};

/// |G~| <= max(|F1|, |F2|) for the TYPE-I problem.
bool type_i_size_condition(const Filter& g, KernelShape k1, KernelShape k2, int c_mid);

/// Alternating least squares for compose(f2, f1) = zero_pad(g, k1 + k2 - 1),
/// starting from a random f1. InvalidTargetError when g does not fit k1 + k2 - 1.
Decomposition decompose_type_i(const Filter& g, KernelShape k1, KernelShape k2, int c_mid, const SolverConfig& cfg);

/// Exact TYPE-I factorization where one factor can be an identity: needs g's
/// support inside k2 with c_mid >= c_in, or inside k1 with c_mid >= c_out.
/// Spare channels of the identity factor get random filters whose
/// counterparts are zero. nullopt when neither applies.
std::optional<std::pair<Filter, Filter>> identity_type_i(const Filter& g, KernelShape k1, KernelShape k2, int c_mid,
                                                         Rng& rng, std::optional<double> init_std = std::nullopt);

/// The linear map from one edge's filter to the module filter, with every
/// other edge fixed: module_filter = A vec(F_j) + C3, where C3 collects the
/// paths avoiding edge j. The filter currently on edge j is ignored.
class DeconvOperator {
 public:
  enum class Structure {
    kPerInput,   // edge leaves the source: one small system per input channel
    kPerOutput,  // edge enters the sink: one small system per output channel
    kDense,
  };

  DeconvOperator(const ModuleGraph& m, const std::string& edge_id);

  [[nodiscard]] Structure structure() const { return structure_; }
  [[nodiscard]] KernelShape effective() const { return effective_; }
  [[nodiscard]] std::size_t rows() const;
  [[nodiscard]] std::size_t cols() const;
  /// C3 on the effective kernel.
  [[nodiscard]] const Filter& constant() const { return constant_; }

  /// Dense A, row-major (rows() x cols()), rows in module-filter layout,
  /// columns in edge-filter layout.
  [[nodiscard]] std::vector<double> assemble() const;
  [[nodiscard]] std::vector<double> apply(std::span<const double> x) const;

  /// Least-squares F_j for A vec(F_j) + C3 ~ g_tilde; minimum norm when A is
  /// rank deficient. g_tilde is padded to the effective kernel if smaller.
  [[nodiscard]] Filter solve(const Filter& g_tilde) const;

 private:
  Structure structure_;
  KernelShape effective_;
  KernelShape edge_kernel_;
  int c_tail_;
  int c_head_;
  Filter prefix_;  // paths source -> tail, channels(tail) x c_in
  Filter suffix_;  // paths head -> sink, c_out x channels(head)
  Filter constant_;
};

Filter deconv_solve(const Filter& g_tilde, const ModuleGraph& m, const std::string& edge_id);

struct IrreducibleSolution {
  ModuleGraph assigned;
  SolveReport report;
};

/// Alternating solver: random initialization, then sweeps over the edges in
/// insertion order, each edge re-solved by deconv_solve with the rest fixed.
/// Stops once the relative residual reaches cfg.tol or after cfg.max_iter sweeps.
IrreducibleSolution solve_irreducible(const ModuleGraph& m, const Filter& g, const SolverConfig& cfg);

/// Exact assignment that routes the parent along one source-to-sink path:
/// channel-embedding identities on the path, g on one path edge whose kernel
/// holds g's support, zero filters off the path. Interior vertices before the
/// carrying edge need at least c_in channels, those after it at least c_out.
/// Paths and carrying edges are tried in insertion order; nullopt when none fit.
std::optional<ModuleGraph> identity_path_assignment(const ModuleGraph& m, const Filter& g);

}  // namespace modmorph
