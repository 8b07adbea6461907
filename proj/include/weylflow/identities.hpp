#pragma once

#include <span>
#include <string>
#include <vector>

#include "weylflow/catalog.hpp"
#include "weylflow/flow.hpp"

namespace weylflow {

struct IdentityError : std::runtime_error {
  explicit IdentityError(const std::string& what) : std::runtime_error(what) {}
};

/// Flow data handed to the evolution-equation checks.
struct FlowContext {
  FlowFamily family;
  FlowTrajectory traj;
  double t = 0.05;   // evaluation time
  double h = 1e-3;   // base step of the central time difference
};

struct ConvergenceSample {
  double h = 0;
  double residual = 0;
};

struct CheckReport {
  std::string check_id;
  std::string statement;
  std::string metric;
  int n_points = 0;
  double max_residual = 0;
  double tolerance = 0;
  bool pass = true;
  /// ok | descriptive | skipped | inconclusive | error:<reason>
  std::string status = "ok";
  std::vector<ConvergenceSample> convergence;
};

struct CheckDef {
  enum class Mode { Gated, Descriptive, Skip };

  std::string id;
  std::string statement;  // what equality/bound is evaluated
  double tolerance = 0;
  bool needs_flow = false;
  std::function<Mode(const CatalogEntry&)> mode;
  std::function<void(const CatalogEntry&, std::span<const std::vector<double>>,
                     const FlowContext*, CheckReport&)>
      run;
};

const std::vector<CheckDef>& check_registry();

double check_tolerance_for(const CheckDef& def, const CatalogEntry& entry);

/// Runs one check over the given points. Inapplicable checks come back with
/// status "skipped"; needs-flow checks without flow context report an error.
CheckReport run_check(const std::string& id, const CatalogEntry& entry,
                      std::span<const std::vector<double>> points,
                      const FlowContext* flow = nullptr);

/// Every check on every entry, deterministically ordered by (check, metric).
/// Flow contexts are attached automatically to the entries that correspond
/// to reduced flow families. Parallelism is bounded by WEYLFLOW_THREADS.
std::vector<CheckReport> run_suite(std::span<const CatalogEntry> entries, std::uint64_t seed,
                                   int point_count);

/// Raw value of the eigenvalue quadratic
///   (n-1)(l_i^2 + l_j^2) - (n-1) R (l_i + l_j) + (n-1)(n-2) l_i l_j + R^2 - |Ric|^2
/// at the i-th and j-th (ascending) Ricci eigenvalues of the pack.
double eigen_quadratic_residual(const CurvaturePack& pack, int i, int j);

}  // namespace weylflow
