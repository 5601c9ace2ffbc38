#pragma once

#include <cstdint>
#include <vector>

#include "ergopt/grid.hpp"
#include "ergopt/matrix.hpp"
#include "ergopt/potential.hpp"
#include "ergopt/transfer_operator.hpp"

namespace ergopt {

/// Closed sub-interval of [0,1]; a cylinder is a list of these.
struct Interval {
  double lo = 0.0;
  double hi = 1.0;
};

/// The absolutely continuous stationary Markov measure built from an
/// eigenpair: density theta(x) = phi(x) phi_bar(x) / pi and transition
/// kernel K(x,y) = e^{beta A(x,y)} phi_bar(y) / (phi_bar(x) lambda).
/// Rows of `kernel` integrate to 1 and theta is stationary for it; both
/// identities are verified at construction and stored as residuals.
struct GibbsChain {
  double beta = 0.0;
  double lambda = 0.0;
  double log_lambda = 0.0;
  double pi = 0.0;                 // integral of phi * phi_bar
  std::vector<double> theta;       // stationary density at the nodes
  Matrix kernel;                   // K(x_i, y_j), row-major
  Matrix log_kernel;               // log K, formed in log space (no underflow)
  double row_residual = 0.0;       // max_i |int K(x_i,y) dy - 1|
  double joint_residual = 0.0;     // |int theta K - 1|
  double stationarity_residual = 0.0;  // sup_y |int theta(x)K(x,y)dx - theta(y)|
};

/// Builds the chain from a converged eigenpair. Throws internal_consistency
/// when a residual exceeds its tolerance (row 1e-10, joint 1e-10,
/// stationarity 1e-8) or theta loses positivity, which signals an eigenpair
/// accepted before convergence.
GibbsChain build_chain(const EigenPair& ep, const Potential& A, const Grid& g,
                       int threads = 1);

/// Entropy term S = -int theta(x) K(x,y) log K(x,y) dx dy  (nonpositive).
double entropy_penalized(const GibbsChain& c, const Grid& g);

/// int A dnu for nu = theta K on the grid.
double integral_of_potential(const GibbsChain& c, const Potential& A,
                             const Grid& g);

/// |log lambda - (beta int A dnu + S)|, the discrete check of the
/// entropy-penalized variational principle.
double variational_residual(const GibbsChain& c, const Potential& A,
                            const Grid& g);

/// Measure of the size-k cylinder under the chain, by the forward sweep
///   v_1 = theta on A_1, v_{t+1}(y) = int_{A_t} v_t K(.,y), result = int v_k.
/// Interval endpoints snap to the nearest node; the largest snap distance is
/// reported through *snap_distance when non-null. Throws degenerate_cylinder
/// if an interval collapses to fewer than two nodes after snapping.
double cylinder_measure(const GibbsChain& c, const Grid& g,
                        const std::vector<Interval>& cylinder,
                        double* snap_distance = nullptr);

/// Samples a trajectory of the chain: x_1 from theta by inverse CDF over the
/// grid cells (piecewise-constant density per cell, uniform inside), then
/// x_{t+1} from the kernel row at the node nearest to x_t. Deterministic for
/// a fixed 64-bit seed (mt19937_64 bit stream, fixed mapping to doubles).
std::vector<double> sample_path(const GibbsChain& c, const Grid& g, int len,
                                std::uint64_t seed);

}  // namespace ergopt
