#pragma once

#include <span>
#include <vector>

namespace ergopt {

/// Uniform discretization of [0,1] with composite-trapezoid quadrature
/// weights. Every integral in the project goes through `integrate`, which
/// accumulates strictly left to right. The weights are positive, so
/// discretized integral kernels keep their Perron structure.
struct Grid {
  int n = 0;
  std::vector<double> nodes;    // nodes[i] = i/(n-1)
  std::vector<double> weights;  // 1/(2(n-1)) at the ends, 1/(n-1) inside

  double spacing() const { return 1.0 / (n - 1); }
};

/// Builds the n-node grid. Throws invalid_argument for n < 2.
Grid make_grid(int n);

/// Trapezoid quadrature of a grid function: sum_i weights[i] * f[i],
/// accumulated in index order. Throws invalid_argument on length mismatch.
double integrate(const Grid& g, std::span<const double> f);

}  // namespace ergopt
