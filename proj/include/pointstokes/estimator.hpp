#pragma once

#include "pointstokes/assembly.hpp"

#include <iosfwd>
#include <vector>

namespace pointstokes {

/// p-th powers of the four contributions to one element indicator.
struct IndicatorComponents
{
  double residual = 0.0;   ///< h_T^p ||Lap u_h - grad pi_h||^p_{L^p(T)}
  double jump = 0.0;       ///< h_T ||[(grad u_h - pi_h I) nu]||^p_{L^p(dT \ dOmega)}
  double divergence = 0.0; ///< (1 + tau_div^p) ||div u_h||^p_{L^p(T)}
  double dirac = 0.0;      ///< sum over non-nodal sources in T of h_T^{2-p} |f_t|^p

  double total() const { return residual + jump + divergence + dirac; }
};

struct EstimatorOptions
{
  double p = 1.4;
  std::vector<Source> sources;
  /// Only the stabilized scheme weights the divergence term.
  double tau_div = 0.0;
};

struct IndicatorField
{
  double p = 1.4;
  std::vector<IndicatorComponents> elements;
  double global = 0.0; ///< (sum_T total_T)^{1/p}
};

/// Tolerance, relative to h_T, for a source to count as sitting on a node.
inline constexpr double node_tolerance = 1e-12;

/// Indicator of a single element. Sources sitting on a Lagrange node of the
/// velocity space in T (vertices, plus edge midpoints for Taylor-Hood)
/// contribute no Dirac term.
IndicatorComponents element_indicator(int t,
                                      const DiscreteSolution& solution,
                                      const EstimatorOptions& options);

IndicatorField compute_indicators(const DiscreteSolution& solution, const EstimatorOptions& options);

/// (sum_T eta_T^p)^{1/p}
double global_estimator(const IndicatorField& field);

/// { T : eta_T^p > theta * max eta^p }. When the strict threshold selects
/// nothing, the lowest-indexed maximal element is returned instead.
std::vector<int> mark(const IndicatorField& field, double theta);

/// CSV with header triangle,residual,jump,divergence,dirac,total.
void write_indicators_csv(const IndicatorField& field, std::ostream& out);

} // namespace pointstokes
