#pragma once

#include <span>
#include <vector>

#include "ergopt/grid.hpp"
#include "ergopt/matrix.hpp"
#include "ergopt/potential.hpp"

namespace ergopt {

/// Leading eigenpair of the integral operators with kernel e^{beta A(x,y)}
/// acting against the grid quadrature. Both operators share the eigenvalue;
/// `lambda` is the forward one. Eigenfunctions are normalized to integral 1
/// and are strictly positive.
struct EigenPair {
  double beta = 0.0;
  double lambda = 0.0;      // may overflow for beta*sup A beyond double range
  double log_lambda = 0.0;  // always finite; use this at large beta
  std::vector<double> phi;      // forward eigenfunction
  std::vector<double> phi_bar;  // backward eigenfunction
  int iterations = 0;           // max of the two power-iteration counts
  double residual = 0.0;        // sup relative eigen-equation residual
  double lambda_rel_gap = 0.0;  // |lambda_fwd - lambda_bwd| / lambda_fwd

  // Scaled quantities kept so downstream kernels can be formed without
  // re-exponentiating beta*A: lambda_scaled = lambda * e^{-beta*a_max}.
  double a_max = 0.0;
  double lambda_scaled = 0.0;
};

/// Cached kernel table e^{beta (A(x_i,x_j) - a_max)} with a_max the grid sup
/// of A. The subtraction keeps entries within double range for any beta.
class TransferKernel {
 public:
  TransferKernel(double beta, const Potential& A, const Grid& g);

  /// out[j] = sum_i w_i E[i][j] phi[i]  (scaled forward operator)
  void apply_forward_scaled(const Grid& g, std::span<const double> phi,
                            std::span<double> out, int threads = 1) const;
  /// out[i] = sum_j w_j E[i][j] phi[j]  (scaled backward operator)
  void apply_backward_scaled(const Grid& g, std::span<const double> phi,
                             std::span<double> out, int threads = 1) const;

  double beta() const { return beta_; }
  double a_max() const { return a_max_; }
  const Matrix& entries() const { return entries_; }

 private:
  double beta_;
  double a_max_;
  Matrix entries_;
};

/// Unscaled operator applications, quadrature form of the defining integrals.
/// Suitable while beta * sup A stays within double exponent range.
std::vector<double> apply_forward(double beta, const Potential& A,
                                  const Grid& g, std::span<const double> phi);
std::vector<double> apply_backward(double beta, const Potential& A,
                                   const Grid& g, std::span<const double> phi);

/// Power iteration on the forward and backward operators, renormalizing each
/// iterate to integral 1. Stops when the relative eigen-equation residual
///   sup_i |(L phi)(i) / (lambda phi(i)) - 1|
/// drops below tol. Throws no_convergence past max_iter, and
/// internal_consistency when the two directions disagree beyond 10*tol or the
/// a-priori eigenfunction bounds fail.
EigenPair leading_eigenpair(double beta, const Potential& A, const Grid& g,
                            double tol = 1e-12, int max_iter = 100000,
                            int threads = 1);

/// Upper bound lambda * (K_sup - K_inf) / (K_sup + K_inf) on the modulus of
/// any subdominant eigenvalue, where K = e^{beta A} over the grid. This is
/// the kernel-ratio (Birkhoff contraction) reading of the textbook bound.
double spectral_gap_bound(const EigenPair& ep, const Potential& A,
                          const Grid& g);

}  // namespace ergopt
