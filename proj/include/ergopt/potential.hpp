#pragma once

#include <functional>
#include <string>
#include <vector>

#include "ergopt/grid.hpp"
#include "ergopt/matrix.hpp"

namespace ergopt {

/// A two-site interaction A(x,y) on the unit square together with its
/// partial derivatives and a Lipschitz constant (an upper bound for
/// sup |grad A|). Evaluation is pure and safe to call concurrently.
struct Potential {
  std::string name;
  std::function<double(double, double)> eval;
  std::function<double(double, double)> d_x;   // dA/dx
  std::function<double(double, double)> d_y;   // dA/dy
  std::function<double(double, double)> d_xy;  // d^2 A / dx dy
  double lip = 0.0;
};

/// Catalog of built-in potentials:
///   product               -> x*y
///   quadratic             -> -(x-y)^2
///   xy_cosine             -> cos(2*pi*(x-y))
///   xy_cosine_magnetic(l) -> cos(2*pi*(x-y)) + l*cos(2*pi*x)
/// The angle variable of the XY model is rescaled to [0,1] so all potentials
/// share the unit-interval state space. Derivatives and `lip` are analytic.
Potential builtin(const std::string& name,
                  const std::vector<double>& params = {});

/// One-variable additive term f(x) with its derivative and a certified upper
/// bound for sup |f'| on [0,1].
struct Perturbation {
  std::function<double(double)> f;
  std::function<double(double)> df;
  double df_sup = 0.0;
};

/// f(x) = sum_k coeffs[k] * x^k; df_sup is bounded by sum_k k*|coeffs[k]|.
Perturbation polynomial_perturbation(std::vector<double> coeffs);

/// Returns the potential x,y -> A(x,y) + f(x). Only d_x and lip change.
Potential perturb(const Potential& A, const Perturbation& p);

/// Sign behaviour of d^2A/dxdy over the grid product. `is_twist` holds when
/// the mixed derivative never changes sign (strictly positive or strictly
/// negative on all node pairs).
struct TwistReport {
  double min_dxy = 0.0;
  double max_dxy = 0.0;
  bool is_twist = false;
  int sign = 0;  // +1, -1, or 0 when not twist
};

TwistReport twist_report(const Potential& A, const Grid& g);

/// Materializes W[i][j] = A(nodes[i], nodes[j]). Shared by the tropical,
/// Mane and maximizer modules so they all see identical values.
Matrix potential_matrix(const Potential& A, const Grid& g);

/// Grid sup of |A|.
double sup_abs(const Potential& A, const Grid& g);

}  // namespace ergopt
