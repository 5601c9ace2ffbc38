#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ergopt/errors.hpp"
#include "ergopt/gibbs_chain.hpp"
#include "ergopt/grid.hpp"
#include "ergopt/tropical.hpp"
#include "oracles.hpp"

using namespace ergopt;

namespace {
GibbsChain make(const Potential& A, double beta, const Grid& g) {
  return build_chain(leading_eigenpair(beta, A, g, 1e-13), A, g);
}
}  // namespace

TEST_CASE("zero and constant potentials give the uniform chain") {
  const Grid g = make_grid(41);
  for (double c : {0.0, 0.8}) {
    const GibbsChain chain = make(oracle::constant_potential(c), 2.0, g);
    for (int i = 0; i < g.n; ++i) {
      CHECK(chain.theta[i] == doctest::Approx(1.0).epsilon(1e-10));
      for (int j = 0; j < g.n; ++j) {
        CHECK(chain.kernel(i, j) == doctest::Approx(1.0).epsilon(1e-10));
      }
    }
    CHECK(std::abs(entropy_penalized(chain, g)) <= 1e-10);
  }
}

TEST_CASE("chain invariants at the stated tolerances") {
  const Grid g = make_grid(201);
  for (const char* name : {"product", "quadratic", "xy_cosine"}) {
    const GibbsChain chain = make(builtin(name), 4.0, g);
    CHECK(chain.row_residual <= 1e-10);
    CHECK(chain.joint_residual <= 1e-10);
    CHECK(chain.stationarity_residual <= 1e-8);
    for (double t : chain.theta) CHECK(t > 0.0);
  }
}

TEST_CASE("stationarity residual for product at beta 4") {
  const Grid g = make_grid(201);
  const GibbsChain chain = make(builtin("product"), 4.0, g);
  CHECK(chain.stationarity_residual <= 1e-8);
}

TEST_CASE("entropy is nonpositive and matches the eigenvalue identity") {
  const Grid g = make_grid(201);
  const Potential A = builtin("product");
  const GibbsChain chain = make(A, 1.0, g);
  const double S = entropy_penalized(chain, g);
  CHECK(S <= 1e-12);
  const double via_identity =
      chain.log_lambda - 1.0 * integral_of_potential(chain, A, g);
  CHECK(std::abs(S - via_identity) <= 1e-8);
}

TEST_CASE("variational identity holds across beta") {
  const Grid g = make_grid(201);
  const Potential A = builtin("product");
  for (double beta : {1.0, 2.0, 4.0, 8.0}) {
    const GibbsChain chain = make(A, beta, g);
    CHECK(variational_residual(chain, A, g) <= 1e-8);
  }
  const GibbsChain flat = make(oracle::constant_potential(0.5), 3.0, g);
  CHECK(variational_residual(flat, oracle::constant_potential(0.5), g) <=
        1e-12);
}

TEST_CASE("chain stays consistent when lambda overflows the linear scale") {
  const Grid g = make_grid(51);

  SUBCASE("constant potential, lambda = e^900 = inf in double") {
    const Potential A = oracle::constant_potential(3.0);
    const GibbsChain chain = build_chain(leading_eigenpair(300.0, A, g), A, g);
    CHECK(std::isinf(chain.lambda));
    CHECK(chain.row_residual <= 1e-10);
    // the variational identity runs entirely in log space
    CHECK(variational_residual(chain, A, g) <= 1e-7);
  }

  SUBCASE("product at beta = 300: kernel rows from 130-decade ratios") {
    const Potential A = builtin("product");
    const GibbsChain chain = build_chain(leading_eigenpair(300.0, A, g), A, g);
    CHECK(chain.row_residual <= 1e-10);
    CHECK(chain.stationarity_residual <= 1e-8);
    CHECK(entropy_penalized(chain, g) <= 1e-12);
    CHECK(variational_residual(chain, A, g) <= 1e-7);
  }
}

TEST_CASE("cylinder measures") {
  const Grid g = make_grid(201);

  SUBCASE("product of lengths for the uniform chain") {
    const GibbsChain chain = make(oracle::constant_potential(0.0), 2.0, g);
    const double mu =
        cylinder_measure(chain, g, {{0.0, 0.5}, {0.0, 0.5}});
    CHECK(mu == doctest::Approx(0.25).epsilon(1e-10));
  }

  SUBCASE("full interval has full mass") {
    const GibbsChain chain = make(builtin("quadratic"), 4.0, g);
    CHECK(cylinder_measure(chain, g, {{0.0, 1.0}}) ==
          doctest::Approx(1.0).epsilon(1e-10));
  }

  SUBCASE("k=2 equals the independent double-loop quadrature") {
    const GibbsChain chain = make(builtin("product"), 2.0, g);
    double snap = 0.0;
    const double mu =
        cylinder_measure(chain, g, {{0.5, 1.0}, {0.5, 1.0}}, &snap);
    CHECK(snap == 0.0);
    const double direct = oracle::rectangle_quadrature(
        g, chain.theta, chain.kernel, 100, 200, 100, 200);
    CHECK(std::abs(mu - direct) <= 1e-10);
  }

  SUBCASE("degenerate interval after snapping") {
    const GibbsChain chain = make(builtin("product"), 2.0, g);
    CHECK_THROWS_AS(
        cylinder_measure(chain, g, {{0.5001, 0.5002}, {0.0, 1.0}}),
        degenerate_cylinder);
  }

  SUBCASE("snap distance is reported") {
    const GibbsChain chain = make(builtin("product"), 2.0, g);
    double snap = -1.0;
    cylinder_measure(chain, g, {{0.1001, 0.9}}, &snap);
    CHECK(snap == doctest::Approx(0.0001).epsilon(1e-6));
  }
}

TEST_CASE("holonomy: both marginals agree for random test functions") {
  const Grid g = make_grid(101);
  const GibbsChain chain = make(builtin("xy_cosine"), 4.0, g);
  std::mt19937_64 rng(2024);
  for (int t = 0; t < 20; ++t) {
    const std::vector<double> f = oracle::random_smooth_function(g, rng);
    double first = 0.0, second = 0.0;
    for (int i = 0; i < g.n; ++i) {
      double row = 0.0, rowf = 0.0;
      for (int j = 0; j < g.n; ++j) {
        row += g.weights[j] * chain.kernel(i, j);
        rowf += g.weights[j] * chain.kernel(i, j) * f[j];
      }
      first += g.weights[i] * chain.theta[i] * f[i] * row;
      second += g.weights[i] * chain.theta[i] * rowf;
    }
    CHECK(std::abs(first - second) <= 1e-8);
  }
}

TEST_CASE("m bound and monotone approach of the free energy rate") {
  const Grid g = make_grid(201);
  const Potential A = builtin("product");
  const double m = karp_value(A, g).m;
  double prev_gap = 1e300;
  for (double beta : {4.0, 8.0, 16.0, 32.0}) {
    const GibbsChain chain = make(A, beta, g);
    const double ia = integral_of_potential(chain, A, g);
    CHECK(ia <= m + 1e-6);
    const double rate = chain.log_lambda / beta;
    CHECK(rate <= m + 1e-6);
    const double S = entropy_penalized(chain, g);
    CHECK(std::abs(rate - ia - S / beta) <= 1e-9);
    const double gap = m - ia;
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("sample paths") {
  const Grid g = make_grid(101);

  SUBCASE("same seed gives the same path") {
    const GibbsChain chain = make(builtin("quadratic"), 4.0, g);
    const std::vector<double> a = sample_path(chain, g, 1000, 99);
    const std::vector<double> b = sample_path(chain, g, 1000, 99);
    CHECK(a == b);
    const std::vector<double> c = sample_path(chain, g, 1000, 100);
    CHECK(a != c);
  }

  SUBCASE("uniform chain mean is 1/2 within 3 sigma") {
    const GibbsChain chain = make(oracle::constant_potential(0.0), 1.0, g);
    const int len = 100000;
    const std::vector<double> path = sample_path(chain, g, len, 7);
    double mean = 0.0;
    for (double x : path) mean += x;
    mean /= len;
    const double sigma = 1.0 / std::sqrt(12.0 * len);
    CHECK(std::abs(mean - 0.5) <= 3 * sigma);
  }

  SUBCASE("occupation of [0.9,1] matches the density mass for product") {
    const GibbsChain chain = make(builtin("product"), 8.0, g);
    const int len = 100000;
    const std::vector<double> path = sample_path(chain, g, len, 12345);
    double occupancy = 0.0;
    for (double x : path) occupancy += x >= 0.9 ? 1.0 : 0.0;
    occupancy /= len;
    std::vector<double> masked(g.n, 0.0);
    for (int i = 0; i < g.n; ++i) {
      masked[i] = g.nodes[i] >= 0.9 ? chain.theta[i] : 0.0;
    }
    const double expected = integrate(g, masked);
    CHECK(std::abs(occupancy - expected) <= 0.02);
  }
}
