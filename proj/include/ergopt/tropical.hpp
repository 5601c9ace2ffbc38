#pragma once

#include <vector>

#include "ergopt/grid.hpp"
#include "ergopt/potential.hpp"
#include "ergopt/transfer_operator.hpp"

namespace ergopt {

enum class Direction { forward, backward };
enum class SubactionKind { calibrated, separating, plain };

/// Grid function u with the subaction inequality
///   forward:  u(y) >= A(x,y) + u(x) - m   for all pairs,
///   backward: u(x) >= A(x,y) + u(y) - m,
/// normalized to u(node 0) = 0. `residual` is the sup-norm defect of the
/// calibration equation for calibrated outputs, or of the construction's own
/// verification otherwise.
struct Subaction {
  std::vector<double> values;
  Direction direction = Direction::forward;
  SubactionKind kind = SubactionKind::plain;
  double m = 0.0;
  int normalization_index = 0;
  double residual = 0.0;
  int iterations = 0;
};

/// Maximum mean cycle of the complete digraph on the grid nodes with edge
/// weight A(x_i, x_j), plus one cycle attaining it (closed, listed once,
/// rotated to start at its smallest node index). This is the exact grid
/// value of max over equal-marginal measures of int A dnu.
struct KarpResult {
  double m = 0.0;
  std::vector<int> cycle;
};

KarpResult karp_value(const Potential& A, const Grid& g);

/// Discrete Lax-Oleinik value iteration
///   u_{t+1}(y) = max_x [A(x,y) + u_t(x)] - m     (forward; transposed for
/// backward), renormalized to u(node 0) = 0 every sweep, starting from u == 0.
/// Ties in the max go to the lowest index. Returns kind == calibrated when
/// the fixed-point residual ends below 1e-7; when the iteration does not
/// settle within max_iter (periodic critical graph), the best iterate is
/// returned flagged plain, with its residual.
Subaction calibrated_subaction(const Potential& A, const Grid& g,
                               Direction direction, double m,
                               double tol = 1e-10, int max_iter = 100000,
                               int threads = 1);

/// Normalized logarithmic eigenfunctions u_beta = (1/beta) log phi_beta
/// (or phi_bar for backward), shifted so u(node 0) = 0, for an increasing
/// list of betas. `limit` is the last u_beta.
struct BetaLimit {
  std::vector<double> betas;
  std::vector<double> limit;
  std::vector<double> consecutive_distance;   // sup|u_{k+1} - u_k|
  std::vector<double> distance_to_subaction;  // empty without a reference
};

BetaLimit beta_limit(const std::vector<EigenPair>& eigenpairs, Direction which,
                     const Subaction* reference = nullptr);

/// Evaluates the transhipment dual with f = -u for a backward subaction u:
/// dual_value = max over grid pairs of A(x,y) + u(y) - u(x). For any valid
/// backward subaction the gap dual_value - m sits in [0, ~0]; a calibrated
/// one pins it to float noise.
struct DualityCertificate {
  double dual_value = 0.0;
  double gap = 0.0;
};

DualityCertificate duality_certificate(const Subaction& u, const Potential& A,
                                       const Grid& g);

}  // namespace ergopt
