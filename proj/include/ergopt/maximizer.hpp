#pragma once

#include <utility>
#include <vector>

#include "ergopt/grid.hpp"
#include "ergopt/potential.hpp"
#include "ergopt/tropical.hpp"

namespace ergopt {

/// Discrete measure on grid node pairs with equal first and second marginals.
struct SupportMeasure {
  enum class Source { karp_cycle, chain_limit };
  struct MassPoint {
    int i = 0;
    int j = 0;
    double mass = 0.0;
  };
  std::vector<MassPoint> pairs;
  Source source = Source::karp_cycle;
};

/// Uniform mass on the consecutive pairs of the Karp optimal cycle; by
/// construction int A dnu equals the cycle mean m.
SupportMeasure maximizing_measure(const Potential& A, const Grid& g);

/// The graph map under the twist condition: Y(x) = argmax_y [A(x,y) + u(y)]
/// for a backward calibrated subaction u, cross-checked against the
/// derivative relation dA/dx(x, Y(x)) = Du(x). Nodes whose central-difference
/// Du misses the relation by more than lip(A)*10/(n-1) are excluded from
/// `defined` (kinks of u). Throws precondition_failed without the twist.
struct GraphMap {
  std::vector<int> y_index;    // argmax node, always filled
  std::vector<double> y;       // node coordinate of the argmax
  std::vector<double> du;      // finite-difference derivative of u
  std::vector<bool> defined;   // cross-check passed
  int twist_sign = 0;
};

GraphMap graph_map(const Subaction& u, const Potential& A, const Grid& g,
                   int threads = 1);

/// Scans consecutive defined nodes for monotonicity (nondecreasing for
/// positive twist sign, nonincreasing for negative), with one grid cell of
/// slack for quantization.
struct MonotonicityResult {
  bool ok = true;
  std::vector<std::pair<int, int>> violations;  // offending adjacent nodes
};

MonotonicityResult monotonicity_check(const GraphMap& gm, const Grid& g);

/// Every support pair (i,j) with i defined must satisfy
/// |x_j - Y(x_i)| <= 2/(n-1).
struct SupportCheck {
  bool ok = true;
  std::vector<std::pair<int, int>> off_graph_pairs;
};

SupportCheck support_on_graph_check(const SupportMeasure& sm,
                                    const GraphMap& gm, const Grid& g);

/// max over support pairs of |u(x) - (A(x,y) + u(y) - m)|.
double cohomology_residual(const SupportMeasure& sm, const Subaction& u,
                           const Potential& A, const Grid& g);

/// int A d(sm): mass-weighted edge values, summed then never re-divided.
double measure_integral(const SupportMeasure& sm, const Potential& A,
                        const Grid& g);

/// Sup-norm difference between the first and second marginals of sm.
double marginal_defect(const SupportMeasure& sm, const Grid& g);

}  // namespace ergopt
