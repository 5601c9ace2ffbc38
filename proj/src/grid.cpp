#include "ergopt/grid.hpp"

#include <string>

#include "ergopt/errors.hpp"

namespace ergopt {

Grid make_grid(int n) {
  if (n < 2) {
    throw invalid_argument("grid.make_grid",
                           "node count must be >= 2, got " + std::to_string(n));
  }
  Grid g;
  g.n = n;
  g.nodes.resize(n);
  g.weights.resize(n);
  const double h = 1.0 / (n - 1);
  for (int i = 0; i < n; ++i) {
    g.nodes[i] = static_cast<double>(i) / (n - 1);
    g.weights[i] = h;
  }
  g.weights.front() = 0.5 * h;
  g.weights.back() = 0.5 * h;
  return g;
}

double integrate(const Grid& g, std::span<const double> f) {
  if (f.size() != static_cast<std::size_t>(g.n)) {
    throw invalid_argument("grid.integrate",
                           "grid function has length " +
                               std::to_string(f.size()) + ", expected " +
                               std::to_string(g.n));
  }
  double acc = 0.0;
  for (int i = 0; i < g.n; ++i) acc += g.weights[i] * f[i];
  return acc;
}

}  // namespace ergopt
