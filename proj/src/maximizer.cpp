#include "ergopt/maximizer.hpp"

#include <cmath>
#include <string>
#include <vector>

#include "ergopt/errors.hpp"
#include "ergopt/matrix.hpp"
#include "ergopt/parallel.hpp"

namespace ergopt {

SupportMeasure maximizing_measure(const Potential& A, const Grid& g) {
  const KarpResult karp = karp_value(A, g);
  const std::size_t len = karp.cycle.size();
  SupportMeasure sm;
  sm.source = SupportMeasure::Source::karp_cycle;
  const double mass = 1.0 / static_cast<double>(len);
  for (std::size_t t = 0; t < len; ++t) {
    sm.pairs.push_back(
        {karp.cycle[t], karp.cycle[(t + 1) % len], mass});
  }
  const double value = measure_integral(sm, A, g);
  if (std::abs(value - karp.m) > 1e-9 * (1.0 + std::abs(karp.m))) {
    throw internal_consistency(
        "maximizer.maximizing_measure",
        "cycle measure integral " + std::to_string(value) +
            " does not reproduce m = " + std::to_string(karp.m));
  }
  return sm;
}

GraphMap graph_map(const Subaction& u, const Potential& A, const Grid& g,
                   int threads) {
  const TwistReport tw = twist_report(A, g);
  if (!tw.is_twist) {
    throw precondition_failed(
        "maximizer.graph_map",
        "the mixed derivative changes sign on the grid; no graph map");
  }
  if (u.direction != Direction::backward) {
    throw invalid_argument("maximizer.graph_map",
                           "graph map needs a backward subaction");
  }
  const int n = g.n;
  const double h = g.spacing();
  Matrix W = potential_matrix(A, g);

  GraphMap gm;
  gm.twist_sign = tw.sign;
  gm.y_index.resize(n);
  gm.y.resize(n);
  gm.du.resize(n);
  gm.defined.assign(n, false);

  for (int i = 0; i < n; ++i) {
    if (i == 0) {
      gm.du[i] = (u.values[1] - u.values[0]) / h;
    } else if (i == n - 1) {
      gm.du[i] = (u.values[n - 1] - u.values[n - 2]) / h;
    } else {
      gm.du[i] = (u.values[i + 1] - u.values[i - 1]) / (2.0 * h);
    }
  }

  // vector<bool> packs bits, so the cross-check flags are staged in a byte
  // buffer to keep the parallel writes race-free.
  const double cross_tol = A.lip * 10.0 / (n - 1);
  std::vector<unsigned char> passed(n, 0);
  parallel_for(n, threads, [&](std::size_t i) {
    const double* row = W.row(i);
    int best = 0;
    double best_v = row[0] + u.values[0];
    for (int j = 1; j < n; ++j) {
      const double v = row[j] + u.values[j];
      if (v > best_v) {
        best_v = v;
        best = j;
      }
    }
    gm.y_index[i] = best;
    gm.y[i] = g.nodes[best];
    const double dax = A.d_x(g.nodes[i], g.nodes[best]);
    passed[i] = std::abs(dax - gm.du[i]) <= cross_tol ? 1 : 0;
  });
  for (int i = 0; i < n; ++i) gm.defined[i] = passed[i] != 0;
  return gm;
}

MonotonicityResult monotonicity_check(const GraphMap& gm, const Grid& g) {
  MonotonicityResult r;
  const double slack = g.spacing();
  int prev = -1;
  for (int i = 0; i < g.n; ++i) {
    if (!gm.defined[i]) continue;
    if (prev >= 0) {
      const bool bad = gm.twist_sign >= 0
                           ? gm.y[i] < gm.y[prev] - slack
                           : gm.y[i] > gm.y[prev] + slack;
      if (bad) {
        r.ok = false;
        r.violations.emplace_back(prev, i);
      }
    }
    prev = i;
  }
  return r;
}

SupportCheck support_on_graph_check(const SupportMeasure& sm,
                                    const GraphMap& gm, const Grid& g) {
  SupportCheck r;
  const double tol = 2.0 * g.spacing();
  for (const auto& p : sm.pairs) {
    if (!gm.defined[p.i]) continue;
    if (std::abs(g.nodes[p.j] - gm.y[p.i]) > tol) {
      r.ok = false;
      r.off_graph_pairs.emplace_back(p.i, p.j);
    }
  }
  return r;
}

double cohomology_residual(const SupportMeasure& sm, const Subaction& u,
                           const Potential& A, const Grid& g) {
  double worst = 0.0;
  for (const auto& p : sm.pairs) {
    const double lhs = u.values[p.i];
    const double rhs =
        A.eval(g.nodes[p.i], g.nodes[p.j]) + u.values[p.j] - u.m;
    worst = std::max(worst, std::abs(lhs - rhs));
  }
  return worst;
}

double measure_integral(const SupportMeasure& sm, const Potential& A,
                        const Grid& g) {
  double acc = 0.0;
  for (const auto& p : sm.pairs) {
    acc += p.mass * A.eval(g.nodes[p.i], g.nodes[p.j]);
  }
  return acc;
}

double marginal_defect(const SupportMeasure& sm, const Grid& g) {
  std::vector<double> first(g.n, 0.0), second(g.n, 0.0);
  for (const auto& p : sm.pairs) {
    first[p.i] += p.mass;
    second[p.j] += p.mass;
  }
  double d = 0.0;
  for (int i = 0; i < g.n; ++i) {
    d = std::max(d, std::abs(first[i] - second[i]));
  }
  return d;
}

}  // namespace ergopt
