#include <cmath>
#include <random>
#include <vector>

#include "doctest.h"
#include "ergopt/errors.hpp"
#include "ergopt/grid.hpp"

using namespace ergopt;

TEST_CASE("make_grid endpoint rule n=2") {
  const Grid g = make_grid(2);
  CHECK(g.nodes == std::vector<double>{0.0, 1.0});
  CHECK(g.weights == std::vector<double>{0.5, 0.5});
}

TEST_CASE("make_grid composite trapezoid n=3") {
  const Grid g = make_grid(3);
  CHECK(g.weights == std::vector<double>{0.25, 0.5, 0.25});
  CHECK(g.nodes[1] == 0.5);
}

TEST_CASE("make_grid weights normalize at n=101") {
  const Grid g = make_grid(101);
  double sum = 0.0;
  for (double w : g.weights) sum += w;
  CHECK(std::abs(sum - 1.0) <= 1e-14);
  CHECK(g.nodes.front() == 0.0);
  CHECK(g.nodes.back() == 1.0);
  for (int i = 1; i < g.n; ++i) CHECK(g.nodes[i] > g.nodes[i - 1]);
}

TEST_CASE("make_grid rejects n < 2") {
  CHECK_THROWS_AS(make_grid(1), invalid_argument);
  CHECK_THROWS_AS(make_grid(0), invalid_argument);
}

TEST_CASE("integrate constants and linears exactly") {
  for (int n : {2, 5, 101}) {
    const Grid g = make_grid(n);
    std::vector<double> ones(n, 1.0);
    CHECK(integrate(g, ones) == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(std::abs(integrate(g, g.nodes) - 0.5) <= 1e-14);
  }
}

TEST_CASE("integrate x^2 within the trapezoid error bound") {
  const Grid g = make_grid(101);
  std::vector<double> f(g.n);
  for (int i = 0; i < g.n; ++i) f[i] = g.nodes[i] * g.nodes[i];
  CHECK(std::abs(integrate(g, f) - 1.0 / 3.0) <= 2e-5);
}

TEST_CASE("integrate rejects length mismatch") {
  const Grid g = make_grid(5);
  std::vector<double> f(4, 1.0);
  CHECK_THROWS_AS(integrate(g, f), invalid_argument);
}

TEST_CASE("integrate is linear") {
  const Grid g = make_grid(64);
  std::mt19937_64 rng(11);
  const auto u01 = [&rng] {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
  };
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> f(g.n), h(g.n), combo(g.n);
    const double a = u01() * 4 - 2, b = u01() * 4 - 2;
    for (int i = 0; i < g.n; ++i) {
      f[i] = u01() * 2 - 1;
      h[i] = u01() * 2 - 1;
      combo[i] = a * f[i] + b * h[i];
    }
    const double lhs = integrate(g, combo);
    const double rhs = a * integrate(g, f) + b * integrate(g, h);
    CHECK(std::abs(lhs - rhs) <= 1e-13);
  }
}

TEST_CASE("refinement halves the step and quarters the error") {
  // smooth test function sin(2 pi x) + x^3
  const auto fill = [](const Grid& g) {
    std::vector<double> f(g.n);
    for (int i = 0; i < g.n; ++i) {
      f[i] = std::sin(2 * M_PI * g.nodes[i]) + std::pow(g.nodes[i], 3);
    }
    return f;
  };
  const double exact = 0.25;  // integral of sin term is 0
  const Grid g1 = make_grid(33), g2 = make_grid(65), g4 = make_grid(129);
  const double e1 = std::abs(integrate(g1, fill(g1)) - exact);
  const double e2 = std::abs(integrate(g2, fill(g2)) - exact);
  const double e4 = std::abs(integrate(g4, fill(g4)) - exact);
  CHECK(e2 < e1);
  CHECK(e4 < e2);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.15));
  CHECK(e2 / e4 == doctest::Approx(4.0).epsilon(0.15));
}
