#pragma once

#include <vector>

#include "ergopt/grid.hpp"
#include "ergopt/matrix.hpp"
#include "ergopt/potential.hpp"
#include "ergopt/tropical.hpp"

namespace ergopt {

/// Path-cost tables over the grid digraph with edge weight -(A - m):
///   S(i,j) = min cost over paths with >= 1 edge (all-pairs shortest path),
///   h(i,j) = windowed min over long exact-length paths, the finite stand-in
///            for the liminf barrier. `h_converged` is set when the window
///            minimum stabilized between the last two doublings; otherwise h
///            is still a valid upper envelope but must not back calibrated
///            boundary-data constructions.
struct CostMatrices {
  double m = 0.0;
  Matrix S;
  Matrix h;
  int k_used = 0;
  bool h_converged = false;
};

/// Floyd-Warshall for S plus min-plus powers for h, windows [K/2, K] with K
/// doubling up to k_max. Throws inconsistent_m when a cycle with mean beyond
/// m + 1e-9 shows up (S(i,i) < -1e-9), which means m was not the maximum.
CostMatrices cost_matrices(const Potential& A, const Grid& g, double m,
                           int k_max = 64, double tol = 1e-10,
                           int threads = 1);

/// Grid non-wandering set {i : S(i,i) <= tol}. Throws empty_omega when no
/// node qualifies (m inconsistent or tol too tight).
std::vector<int> omega_set(const CostMatrices& cm, double tol);

/// Default omega tolerance, 1e-6 * lip(A) * grid spacing, so refinement
/// tightens the detected set.
double default_omega_tol(const Potential& A, const Grid& g);

/// Separating backward subaction u(z) = sum_j 2^{-j} (S(x_j, z) - S(x_j, 0))
/// over the complement nodes x_1, x_2, ... of omega in ascending order,
/// together with its margins
///   margin(x) = m - max_y [u(y) - u(x) + A(x,y)].
/// Margins are evaluated through the per-term decomposition
///   margin(x) = min_y [ sum_j 2^{-j} d_j(x,y) + 2^{-J} (m - A(x,y)) ],
///   d_j(x,y) = S(x_j,x) - S(x_j,y) - (A(x,y) - m) >= 0,
/// which is the same quantity rearranged into nonnegative terms, so strict
/// positivity off omega survives even when 2^{-j} is far below the rounding
/// floor of the direct formula. Construction fails (construction_failure)
/// when a margin is nonpositive off omega or exceeds 1e-6 on omega.
struct SeparatingSubaction {
  Subaction u;                  // kind == separating, direction backward
  std::vector<double> margins;  // one per grid node
  double max_margin_on_omega = 0.0;
  double min_margin_off_omega = 0.0;  // +inf when the complement is empty
};

SeparatingSubaction separating_subaction(const CostMatrices& cm,
                                         const std::vector<int>& omega,
                                         const Potential& A, const Grid& g);

/// Calibrated backward subaction from boundary values f on omega:
///   u(x) = max_{p in omega} [ f(p) - h(x, p) ].
/// Requires cm.h_converged, and f(y) - f(x) <= h(x,y) + 1e-9 on omega pairs
/// (incompatible_boundary names the violating pair). The result agrees with
/// f on omega within 1e-7.
Subaction subaction_from_boundary(const std::vector<double>& f,
                                  const std::vector<int>& omega,
                                  const CostMatrices& cm, const Grid& g);

}  // namespace ergopt
