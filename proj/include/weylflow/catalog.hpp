#pragma once

#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "weylflow/soliton.hpp"

namespace weylflow {

struct CatalogError : std::runtime_error {
  explicit CatalogError(const std::string& what) : std::runtime_error(what) {}
};

/// Machine-checkable expectations; every populated fact is re-verified by the
/// identity suite on each run.
struct KnownFacts {
  std::optional<double> scalar_curvature;
  std::optional<double> sectional;         // constant sectional curvature
  std::optional<double> einstein_factor;   // Ric = c g
  std::optional<std::vector<double>> ricci_eigenvalues;  // ascending
  bool weyl_zero = false;
  bool flat = false;
  /// True when the Ricci flow started at this metric keeps the Weyl tensor
  /// identically zero (space forms, cylinders, flat solitons, Bryant); the
  /// eigenvalue-quadratic check is gated only on these.
  bool lcf_flow_invariant = false;
};

struct SolitonSpec {
  bool gradient = true;
  Expr f;
  std::vector<Expr> omega;
  double alpha = 0;
};

struct WarpedInfo {
  double K = 1;
  std::function<Jet(double t, int order)> h_jet;  // univariate in t
};

struct CatalogEntry {
  std::string name;
  std::string label;  // canonical "name:k=v,..." selector
  int n = 0;
  std::map<std::string, double> params;
  MetricChart chart;
  KnownFacts facts;
  std::optional<SolitonSpec> soliton;
  std::optional<WarpedInfo> warped;
  std::map<std::string, double> check_tolerance;  // per-check overrides
  std::shared_ptr<const BryantProfile> bryant;
};

std::vector<std::string> catalog_names();

/// Families: euclidean, sphere, hyperbolic, cylinder_RxS, product_spheres,
/// warped_interval, lcf_example, gaussian_soliton, bryant_profile,
/// perturbed_flat. Unknown names or invalid parameters throw CatalogError.
CatalogEntry get_metric(const std::string& name, const std::map<std::string, double>& params = {});

/// Parses "name:key=val,key=val" selectors (the CLI --metric syntax).
CatalogEntry parse_metric_selector(const std::string& selector);

/// Deterministic low-discrepancy points strictly inside the chart domain,
/// bounded away from chart singularities.
std::vector<std::vector<double>> sample_points(const CatalogEntry& entry, int count,
                                               std::uint64_t seed);

/// The entries `check --all` runs over.
std::vector<CatalogEntry> default_catalog();

/// One JSON document per entry: name, dimension, parameters, metric
/// component expressions and the domain.
std::string catalog_document(const CatalogEntry& entry);

std::optional<SolitonData> make_soliton_data(const CatalogEntry& entry);

}  // namespace weylflow
