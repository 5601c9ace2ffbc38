#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "ergopt/gibbs_chain.hpp"
#include "ergopt/grid.hpp"
#include "ergopt/potential.hpp"
#include "ergopt/tropical.hpp"

namespace ergopt {

/// F_k(x_1..x_k) = max(V + Vbar) - V(x_1) - Vbar(x_k)
///                 - sum_{i<k} (A - m)(x_i, x_{i+1}),
/// with max(V + Vbar) the grid maximum and coordinates snapped to the
/// nearest node. Needs a calibrated forward V and backward Vbar sharing m.
double rate_F(std::span<const double> points, const Subaction& V,
              const Subaction& Vbar, const Potential& A, const Grid& g,
              double m);

/// Partial sum of the deviation rate along a prefix:
///   sum_{i<k} [ V(x_{i+1}) - V(x_i) - (A - m)(x_i, x_{i+1}) ].
/// Each summand is nonnegative up to calibration error; a summand below
/// -1e-6 throws (the supplied V is not a subaction for this m).
double rate_prefix(std::span<const double> points, const Subaction& V,
                   const Potential& A, const Grid& g, double m);

/// Minimum of F_k over the grid restriction of a cylinder. Exhaustive when
/// the tuple count stays within 10^7; otherwise coordinate descent from 32
/// seeded random starts combined with an exhaustive pass on a coarsened grid,
/// reported as a bound (exhaustive == false), never as the infimum.
struct InfRate {
  double value = 0.0;
  bool exhaustive = true;
  std::vector<int> argmin;  // node indices of the best tuple found
};

InfRate inf_rate_over_cylinder(const std::vector<Interval>& cylinder,
                               const Subaction& V, const Subaction& Vbar,
                               const Potential& A, const Grid& g, double m,
                               std::uint64_t seed = 0);

/// Empirical check of (1/beta) log mu_beta(D) -> -inf_D F_k.
struct RateRow {
  double beta = 0.0;
  double log_measure_over_beta = 0.0;
  double error = 0.0;  // |log_measure_over_beta + F_inf|
};

struct RateReport {
  std::vector<Interval> cylinder;
  double F_inf = 0.0;
  bool F_inf_exhaustive = true;
  std::vector<RateRow> rows;  // ascending beta
  bool converged = false;     // errors non-increasing over the last two steps
  bool hypotheses_unverified = false;  // set by the caller on degeneracy
};

/// One table row per beta: eigenpair, chain, cylinder measure. Eigenpairs
/// already computed for these betas can be supplied to avoid recomputation;
/// missing ones are solved at eigen_tol. Requires >= 3 increasing betas.
RateReport ldp_table(const Potential& A, const Grid& g, const Subaction& V,
                     const Subaction& Vbar, double m,
                     const std::vector<Interval>& cylinder,
                     const std::vector<double>& betas, double eigen_tol,
                     const std::vector<EigenPair>* precomputed = nullptr,
                     int threads = 1);

}  // namespace ergopt
