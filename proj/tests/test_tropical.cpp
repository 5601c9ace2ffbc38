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

TEST_CASE("karp values of the builtins") {
  const Grid g = make_grid(201);

  SUBCASE("quadratic: m = 0 on a self-loop") {
    const KarpResult r = karp_value(builtin("quadratic"), g);
    CHECK(std::abs(r.m) <= 1e-9);
    CHECK(r.cycle.size() == 1);
  }

  SUBCASE("product: m = 1 attained at the self-loop at x = 1") {
    const KarpResult r = karp_value(builtin("product"), g);
    CHECK(std::abs(r.m - 1.0) <= 1e-9);
    REQUIRE(r.cycle.size() == 1);
    CHECK(r.cycle[0] == g.n - 1);
  }

  SUBCASE("xy_cosine: m = 1 on the diagonal") {
    const KarpResult r = karp_value(builtin("xy_cosine"), g);
    CHECK(std::abs(r.m - 1.0) <= 1e-9);
    CHECK(r.cycle.size() == 1);
  }

  SUBCASE("perturbed quadratic: m = 0.1") {
    const Potential B =
        perturb(builtin("quadratic"), polynomial_perturbation({0.0, 0.1}));
    const KarpResult r = karp_value(B, g);
    CHECK(std::abs(r.m - 0.1) <= 1e-9);
    REQUIRE(r.cycle.size() == 1);
    CHECK(r.cycle[0] == g.n - 1);
  }
}

TEST_CASE("karp agrees with brute-force cycle enumeration on small grids") {
  std::mt19937_64 rng(4242);
  for (int n : {3, 4, 5, 6}) {
    const Grid g = make_grid(n);
    for (int trial = 0; trial < 5; ++trial) {
      // random trigonometric potential, fixed by the seed above
      const double a = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2 - 1;
      const double b = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2 - 1;
      const double c = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2 - 1;
      Potential A = oracle::constant_potential(0.0);
      A.eval = [a, b, c](double x, double y) {
        return a * std::sin(3 * x + 2 * y) + b * x * y + c * std::cos(5 * y);
      };
      std::vector<std::vector<double>> W(n, std::vector<double>(n));
      for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
          W[i][j] = A.eval(g.nodes[i], g.nodes[j]);
        }
      }
      const double expect = oracle::brute_force_max_mean_cycle(W);
      const KarpResult r = karp_value(A, g);
      CHECK(r.m == doctest::Approx(expect).epsilon(1e-12));
    }
  }
}

TEST_CASE("calibrated subactions of the builtins") {
  const Grid g = make_grid(201);

  SUBCASE("quadratic: u == 0") {
    const Subaction u =
        calibrated_subaction(builtin("quadratic"), g, Direction::forward, 0.0);
    CHECK(u.kind == SubactionKind::calibrated);
    for (double v : u.values) CHECK(std::abs(v) <= 1e-12);
  }

  SUBCASE("product forward: u(x) = x") {
    const Subaction u =
        calibrated_subaction(builtin("product"), g, Direction::forward, 1.0);
    CHECK(u.kind == SubactionKind::calibrated);
    for (int i = 0; i < g.n; ++i) {
      CHECK(std::abs(u.values[i] - g.nodes[i]) <= 1e-6);
    }
  }

  SUBCASE("product backward: u(x) = x as well") {
    const Subaction u =
        calibrated_subaction(builtin("product"), g, Direction::backward, 1.0);
    for (int i = 0; i < g.n; ++i) {
      CHECK(std::abs(u.values[i] - g.nodes[i]) <= 1e-6);
    }
  }

  SUBCASE("xy_cosine: u == 0") {
    const Subaction u =
        calibrated_subaction(builtin("xy_cosine"), g, Direction::forward, 1.0);
    for (double v : u.values) CHECK(std::abs(v) <= 1e-12);
  }
}

TEST_CASE("calibration residual and the subaction inequality") {
  const Grid g = make_grid(101);
  const Potential B =
      perturb(builtin("quadratic"), polynomial_perturbation({0.0, 0.1}));
  const double m = karp_value(B, g).m;
  for (Direction dir : {Direction::forward, Direction::backward}) {
    const Subaction u = calibrated_subaction(B, g, dir, m);
    CHECK(u.kind == SubactionKind::calibrated);
    CHECK(u.residual <= 1e-7);
    CHECK(u.values[0] == 0.0);
    for (int i = 0; i < g.n; ++i) {
      for (int j = 0; j < g.n; ++j) {
        const double a = B.eval(g.nodes[i], g.nodes[j]);
        if (dir == Direction::forward) {
          CHECK(u.values[j] >= a + u.values[i] - m - 1e-9);
        } else {
          CHECK(u.values[i] >= a + u.values[j] - m - 1e-9);
        }
      }
    }
  }
}

TEST_CASE("value iteration recovers the karp shift") {
  const Grid g = make_grid(101);
  for (const char* name : {"product", "quadratic", "xy_cosine"}) {
    const Potential A = builtin(name);
    const double m = karp_value(A, g).m;
    const Subaction u = calibrated_subaction(A, g, Direction::forward, m);
    // at the fixed point, max_x[A + u] - u(y) must equal m for every y
    Matrix W = potential_matrix(A, g);
    double lo = 1e300, hi = -1e300;
    for (int y = 0; y < g.n; ++y) {
      double best = -1e300;
      for (int x = 0; x < g.n; ++x) {
        best = std::max(best, W(x, y) + u.values[x]);
      }
      const double shift = best - u.values[y];
      lo = std::min(lo, shift);
      hi = std::max(hi, shift);
    }
    CHECK(std::abs(lo - m) <= 1e-9);
    CHECK(std::abs(hi - m) <= 1e-9);
  }
}

TEST_CASE("beta limit") {
  const Grid g = make_grid(201);

  SUBCASE("constant potential has flat logarithmic eigenfunctions") {
    std::vector<EigenPair> eps;
    for (double beta : {2.0, 4.0}) {
      eps.push_back(leading_eigenpair(beta, oracle::constant_potential(0.9), g));
    }
    const BetaLimit bl = beta_limit(eps, Direction::forward);
    for (double v : bl.limit) CHECK(std::abs(v) <= 1e-9);
  }

  SUBCASE("product converges to the tropical V with decreasing distance") {
    const Potential A = builtin("product");
    const Subaction V = calibrated_subaction(A, g, Direction::forward, 1.0);
    std::vector<EigenPair> eps;
    for (double beta : {4.0, 8.0, 16.0, 32.0}) {
      eps.push_back(leading_eigenpair(beta, A, g));
    }
    const BetaLimit bl = beta_limit(eps, Direction::forward, &V);
    REQUIRE(bl.distance_to_subaction.size() == 4);
    for (std::size_t k = 1; k < 4; ++k) {
      CHECK(bl.distance_to_subaction[k] < bl.distance_to_subaction[k - 1]);
    }
    CHECK(bl.distance_to_subaction.back() <= 0.05);
  }

  SUBCASE("quadratic limit is near zero at beta 32") {
    const Potential A = builtin("quadratic");
    std::vector<EigenPair> eps;
    for (double beta : {16.0, 32.0}) {
      eps.push_back(leading_eigenpair(beta, A, g));
    }
    const BetaLimit bl = beta_limit(eps, Direction::forward);
    double sup = 0.0;
    for (double v : bl.limit) sup = std::max(sup, std::abs(v));
    CHECK(sup <= 0.05);
  }

  SUBCASE("fewer than two eigenpairs is rejected") {
    std::vector<EigenPair> eps;
    eps.push_back(leading_eigenpair(2.0, builtin("quadratic"), g));
    CHECK_THROWS_AS(beta_limit(eps, Direction::forward), invalid_argument);
  }
}

TEST_CASE("duality certificate") {
  const Grid g = make_grid(201);
  const Potential A = builtin("product");

  SUBCASE("zero function certifies the quadratic") {
    Subaction u;
    u.values.assign(g.n, 0.0);
    u.direction = Direction::backward;
    u.m = 0.0;
    const DualityCertificate c =
        duality_certificate(u, builtin("quadratic"), g);
    CHECK(c.dual_value == doctest::Approx(0.0));
    CHECK(c.gap == doctest::Approx(0.0));
  }

  SUBCASE("zero function is a valid backward subaction for the product") {
    Subaction u;
    u.values.assign(g.n, 0.0);
    u.direction = Direction::backward;
    u.m = 1.0;
    const DualityCertificate c = duality_certificate(u, A, g);
    CHECK(c.dual_value == doctest::Approx(1.0));
    CHECK(std::abs(c.gap) <= 1e-12);
  }

  SUBCASE("calibrated backward subaction gives a tight certificate") {
    const Subaction u = calibrated_subaction(A, g, Direction::backward, 1.0);
    const DualityCertificate c = duality_certificate(u, A, g);
    CHECK(std::abs(c.dual_value - 1.0) <= 1e-7);
    CHECK(c.gap >= -1e-12);
    CHECK(c.gap <= 1e-7);
  }

  SUBCASE("forward subaction is rejected") {
    const Subaction u = calibrated_subaction(A, g, Direction::forward, 1.0);
    CHECK_THROWS_AS(duality_certificate(u, A, g), invalid_argument);
  }
}

TEST_CASE("weak duality sandwich at finite beta") {
  const Grid g = make_grid(101);
  const Potential A = builtin("xy_cosine");
  const double m = karp_value(A, g).m;
  const Subaction u = calibrated_subaction(A, g, Direction::backward, m);
  const DualityCertificate cert = duality_certificate(u, A, g);
  for (double beta : {2.0, 8.0}) {
    const GibbsChain chain =
        build_chain(leading_eigenpair(beta, A, g), A, g);
    const double ia = integral_of_potential(chain, A, g);
    CHECK(ia <= m + 1e-9);
    CHECK(m <= cert.dual_value + 1e-7);
  }
}
