#include "ergopt/gibbs_chain.hpp"

#include <cmath>
#include <random>
#include <string>

#include "ergopt/errors.hpp"
#include "ergopt/parallel.hpp"

namespace ergopt {

GibbsChain build_chain(const EigenPair& ep, const Potential& A, const Grid& g,
                       int threads) {
  const int n = g.n;
  GibbsChain c;
  c.beta = ep.beta;
  c.lambda = ep.lambda;
  c.log_lambda = ep.log_lambda;

  std::vector<double> prod(n);
  for (int i = 0; i < n; ++i) prod[i] = ep.phi[i] * ep.phi_bar[i];
  c.pi = integrate(g, prod);
  c.theta.resize(n);
  for (int i = 0; i < n; ++i) c.theta[i] = prod[i] / c.pi;

  std::vector<double> log_phi_bar(n);
  for (int i = 0; i < n; ++i) log_phi_bar[i] = std::log(ep.phi_bar[i]);
  const double log_lambda_scaled = std::log(ep.lambda_scaled);

  Matrix W = potential_matrix(A, g);
  c.kernel = Matrix(n, n);
  c.log_kernel = Matrix(n, n);
  parallel_for(n, threads, [&](std::size_t i) {
    for (int j = 0; j < n; ++j) {
      const double lk = ep.beta * (W(i, j) - ep.a_max) + log_phi_bar[j] -
                        log_phi_bar[i] - log_lambda_scaled;
      c.log_kernel(i, j) = lk;
      c.kernel(i, j) = std::exp(lk);
    }
  });

  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += g.weights[j] * c.kernel(i, j);
    const double r = std::abs(row - 1.0);
    if (r > c.row_residual) c.row_residual = r;
  }
  double joint = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) row += g.weights[j] * c.kernel(i, j);
    joint += g.weights[i] * c.theta[i] * row;
  }
  c.joint_residual = std::abs(joint - 1.0);
  for (int j = 0; j < n; ++j) {
    double col = 0.0;
    for (int i = 0; i < n; ++i) {
      col += g.weights[i] * c.theta[i] * c.kernel(i, j);
    }
    const double r = std::abs(col - c.theta[j]);
    if (r > c.stationarity_residual) c.stationarity_residual = r;
  }

  bool theta_positive = true;
  for (int i = 0; i < n; ++i) theta_positive = theta_positive && c.theta[i] > 0;
  if (c.row_residual > 1e-10 || c.joint_residual > 1e-10 ||
      c.stationarity_residual > 1e-8 || !theta_positive) {
    throw internal_consistency(
        "gibbs_chain.build_chain",
        "chain invariants exceeded tolerance (row " +
            std::to_string(c.row_residual) + ", joint " +
            std::to_string(c.joint_residual) + ", stationarity " +
            std::to_string(c.stationarity_residual) +
            "); the eigenpair looks unconverged");
  }
  return c;
}

double entropy_penalized(const GibbsChain& c, const Grid& g) {
  const int n = g.n;
  double s = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      const double k = c.kernel(i, j);
      if (k < 0.0 || std::isnan(k)) {
        throw invalid_argument("gibbs_chain.entropy_penalized",
                               "kernel entry is not positive at (" +
                                   std::to_string(i) + "," +
                                   std::to_string(j) + ")");
      }
      // k == 0 can only be exp underflow; the k log k contribution is 0.
      if (k > 0.0) row += g.weights[j] * k * c.log_kernel(i, j);
    }
    s += g.weights[i] * c.theta[i] * row;
  }
  return -s;
}

double integral_of_potential(const GibbsChain& c, const Potential& A,
                             const Grid& g) {
  const int n = g.n;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      row += g.weights[j] * c.kernel(i, j) * A.eval(g.nodes[i], g.nodes[j]);
    }
    acc += g.weights[i] * c.theta[i] * row;
  }
  return acc;
}

double variational_residual(const GibbsChain& c, const Potential& A,
                            const Grid& g) {
  const double s = entropy_penalized(c, g);
  const double ia = integral_of_potential(c, A, g);
  return std::abs(c.log_lambda - (c.beta * ia + s));
}

namespace {

int nearest_node(const Grid& g, double x) {
  const double t = x * (g.n - 1);
  int i = static_cast<int>(std::lround(t));
  if (i < 0) i = 0;
  if (i >= g.n) i = g.n - 1;
  return i;
}

}  // namespace

double cylinder_measure(const GibbsChain& c, const Grid& g,
                        const std::vector<Interval>& cylinder,
                        double* snap_distance) {
  if (cylinder.empty()) {
    throw invalid_argument("gibbs_chain.cylinder_measure",
                           "cylinder needs at least one interval");
  }
  const int n = g.n;
  double snap = 0.0;
  std::vector<std::pair<int, int>> ranges;
  ranges.reserve(cylinder.size());
  for (std::size_t t = 0; t < cylinder.size(); ++t) {
    const int lo = nearest_node(g, cylinder[t].lo);
    const int hi = nearest_node(g, cylinder[t].hi);
    snap = std::max(snap, std::abs(g.nodes[lo] - cylinder[t].lo));
    snap = std::max(snap, std::abs(g.nodes[hi] - cylinder[t].hi));
    if (hi <= lo) {
      throw degenerate_cylinder(
          "gibbs_chain.cylinder_measure",
          "interval " + std::to_string(t) +
              " collapsed after snapping to the grid");
    }
    ranges.emplace_back(lo, hi);
  }
  if (snap_distance != nullptr) *snap_distance = snap;

  // Trapezoid rule restricted to the subinterval: half weight at the snapped
  // ends, full step inside, so a full-interval cylinder reproduces the
  // global quadrature exactly.
  const double h = g.spacing();
  const auto local_weight = [&](const std::pair<int, int>& r, int i) {
    return (i == r.first || i == r.second) ? 0.5 * h : h;
  };

  std::vector<double> v(n, 0.0);
  for (int i = ranges[0].first; i <= ranges[0].second; ++i) v[i] = c.theta[i];
  for (std::size_t t = 1; t < ranges.size(); ++t) {
    std::vector<double> next(n, 0.0);
    for (int j = ranges[t].first; j <= ranges[t].second; ++j) {
      double acc = 0.0;
      for (int i = ranges[t - 1].first; i <= ranges[t - 1].second; ++i) {
        acc += local_weight(ranges[t - 1], i) * v[i] * c.kernel(i, j);
      }
      next[j] = acc;
    }
    v = std::move(next);
  }
  double result = 0.0;
  const auto& last = ranges.back();
  for (int j = last.first; j <= last.second; ++j) {
    result += local_weight(last, j) * v[j];
  }
  return result;
}

namespace {

// 53-bit uniform in [0,1) from the raw mt19937_64 stream; avoids
// distribution objects whose output is not pinned by the standard.
double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Inverse CDF over grid cells: density piecewise constant per cell with the
// trapezoid cell mass, position uniform inside the chosen cell.
double draw_from_density(const Grid& g, std::span<const double> density,
                         std::mt19937_64& rng) {
  const int cells = g.n - 1;
  const double h = g.spacing();
  double total = 0.0;
  for (int cc = 0; cc < cells; ++cc) {
    total += 0.5 * (density[cc] + density[cc + 1]) * h;
  }
  const double u = uniform01(rng) * total;
  double cum = 0.0;
  for (int cc = 0; cc < cells; ++cc) {
    const double mass = 0.5 * (density[cc] + density[cc + 1]) * h;
    if (u <= cum + mass || cc == cells - 1) {
      const double frac = mass > 0.0 ? (u - cum) / mass : 0.5;
      return g.nodes[cc] + std::min(1.0, std::max(0.0, frac)) * h;
    }
    cum += mass;
  }
  return g.nodes.back();
}

}  // namespace

std::vector<double> sample_path(const GibbsChain& c, const Grid& g, int len,
                                std::uint64_t seed) {
  if (len < 1) {
    throw invalid_argument("gibbs_chain.sample_path", "len must be >= 1");
  }
  std::mt19937_64 rng(seed);
  std::vector<double> path;
  path.reserve(len);
  double x = draw_from_density(g, c.theta, rng);
  path.push_back(x);
  std::vector<double> row(g.n);
  for (int t = 1; t < len; ++t) {
    const int i = nearest_node(g, x);
    for (int j = 0; j < g.n; ++j) row[j] = c.kernel(i, j);
    x = draw_from_density(g, row, rng);
    path.push_back(x);
  }
  return path;
}

}  // namespace ergopt
