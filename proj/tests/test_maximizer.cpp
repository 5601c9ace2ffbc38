#include <cmath>
#include <vector>

#include "doctest.h"
#include "ergopt/errors.hpp"
#include "ergopt/grid.hpp"
#include "ergopt/maximizer.hpp"
#include "ergopt/tropical.hpp"
#include "oracles.hpp"

using namespace ergopt;

TEST_CASE("maximizing measures of the builtins") {
  const Grid g = make_grid(201);

  SUBCASE("product concentrates at (1,1)") {
    const SupportMeasure sm = maximizing_measure(builtin("product"), g);
    REQUIRE(sm.pairs.size() == 1);
    CHECK(sm.pairs[0].i == g.n - 1);
    CHECK(sm.pairs[0].j == g.n - 1);
    CHECK(sm.pairs[0].mass == 1.0);
  }

  SUBCASE("quadratic picks a diagonal self-loop") {
    const SupportMeasure sm = maximizing_measure(builtin("quadratic"), g);
    REQUIRE(sm.pairs.size() == 1);
    CHECK(sm.pairs[0].i == sm.pairs[0].j);
  }

  SUBCASE("perturbed quadratic moves the loop to (1,1)") {
    const Potential B =
        perturb(builtin("quadratic"), polynomial_perturbation({0.0, 0.1}));
    const SupportMeasure sm = maximizing_measure(B, g);
    REQUIRE(sm.pairs.size() == 1);
    CHECK(sm.pairs[0].i == g.n - 1);
    CHECK(sm.pairs[0].j == g.n - 1);
  }
}

TEST_CASE("support measures integrate A to m and have equal marginals") {
  const Grid g = make_grid(101);
  for (const char* name : {"product", "quadratic", "xy_cosine"}) {
    const Potential A = builtin(name);
    const double m = karp_value(A, g).m;
    const SupportMeasure sm = maximizing_measure(A, g);
    double total = 0.0;
    for (const auto& p : sm.pairs) total += p.mass;
    CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(std::abs(measure_integral(sm, A, g) - m) <= 1e-9);
    CHECK(marginal_defect(sm, g) <= 1e-12);
  }
}

TEST_CASE("graph maps") {
  const Grid g = make_grid(201);

  SUBCASE("quadratic with u == 0: Y is the identity") {
    Subaction u;
    u.values.assign(g.n, 0.0);
    u.direction = Direction::backward;
    u.m = 0.0;
    const GraphMap gm = graph_map(u, builtin("quadratic"), g);
    for (int i = 0; i < g.n; ++i) {
      CHECK(gm.y_index[i] == i);
      CHECK(gm.defined[i]);
    }
  }

  SUBCASE("product with u(x) = x - 1: Y == 1") {
    Subaction u;
    u.values.resize(g.n);
    for (int i = 0; i < g.n; ++i) u.values[i] = g.nodes[i] - 1.0;
    u.direction = Direction::backward;
    u.m = 1.0;
    const GraphMap gm = graph_map(u, builtin("product"), g);
    for (int i = 0; i < g.n; ++i) {
      CHECK(gm.y_index[i] == g.n - 1);
      CHECK(gm.defined[i]);
    }
  }

  SUBCASE("non-twist potential is rejected") {
    Subaction u;
    u.values.assign(g.n, 0.0);
    u.direction = Direction::backward;
    u.m = 1.0;
    CHECK_THROWS_AS(graph_map(u, builtin("xy_cosine"), g),
                    precondition_failed);
  }

  SUBCASE("perturbed quadratic: computed subaction gives a monotone map") {
    const Potential B =
        perturb(builtin("quadratic"), polynomial_perturbation({0.0, 0.1}));
    const double m = karp_value(B, g).m;
    const Subaction u = calibrated_subaction(B, g, Direction::backward, m);
    const GraphMap gm = graph_map(u, B, g);
    int defined = 0;
    for (int i = 0; i < g.n; ++i) defined += gm.defined[i] ? 1 : 0;
    CHECK(defined >= static_cast<int>(0.95 * g.n));
    CHECK(monotonicity_check(gm, g).ok);
  }
}

TEST_CASE("monotonicity scan flags synthetic inversions") {
  const Grid g = make_grid(11);
  GraphMap gm;
  gm.twist_sign = 1;
  gm.defined.assign(g.n, true);
  gm.y_index.resize(g.n);
  gm.y.resize(g.n);
  for (int i = 0; i < g.n; ++i) {
    gm.y_index[i] = i;
    gm.y[i] = g.nodes[i];
  }
  CHECK(monotonicity_check(gm, g).ok);

  gm.y[5] = 0.9;
  gm.y[6] = 0.2;  // decrease of 0.7 >> one cell
  const MonotonicityResult r = monotonicity_check(gm, g);
  CHECK_FALSE(r.ok);
  REQUIRE(r.violations.size() >= 1);
  CHECK(r.violations[0].first == 5);
  CHECK(r.violations[0].second == 6);

  // a constant map is fine (nondecreasing)
  for (int i = 0; i < g.n; ++i) gm.y[i] = 1.0;
  CHECK(monotonicity_check(gm, g).ok);
}

TEST_CASE("support on graph and the cohomology equation") {
  const Grid g = make_grid(201);
  for (const char* which : {"product", "quadratic", "perturbed"}) {
    const Potential A =
        which == std::string("perturbed")
            ? perturb(builtin("quadratic"), polynomial_perturbation({0.0, 0.1}))
            : builtin(which);
    const double m = karp_value(A, g).m;
    const Subaction u = calibrated_subaction(A, g, Direction::backward, m);
    const SupportMeasure sm = maximizing_measure(A, g);
    const GraphMap gm = graph_map(u, A, g);
    CHECK(support_on_graph_check(sm, gm, g).ok);
    CHECK(cohomology_residual(sm, u, A, g) <= 1e-7);
  }
}
