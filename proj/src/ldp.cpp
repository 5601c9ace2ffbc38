#include "ergopt/ldp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "ergopt/errors.hpp"
#include "ergopt/matrix.hpp"

namespace ergopt {

namespace {

int nearest_node(const Grid& g, double x) {
  const double t = x * (g.n - 1);
  int i = static_cast<int>(std::lround(t));
  if (i < 0) i = 0;
  if (i >= g.n) i = g.n - 1;
  return i;
}

void check_pair(const Subaction& V, const Subaction& Vbar, double m,
                const char* where) {
  if (V.direction != Direction::forward ||
      Vbar.direction != Direction::backward) {
    throw invalid_argument(where, "need a forward V and a backward Vbar");
  }
  if (std::abs(V.m - m) > 1e-12 || std::abs(Vbar.m - m) > 1e-12) {
    throw invalid_argument(where, "subactions carry a different m");
  }
}

double max_sum(const Subaction& V, const Subaction& Vbar) {
  double best = V.values[0] + Vbar.values[0];
  for (std::size_t i = 1; i < V.values.size(); ++i) {
    best = std::max(best, V.values[i] + Vbar.values[i]);
  }
  return best;
}

}  // namespace

double rate_F(std::span<const double> points, const Subaction& V,
              const Subaction& Vbar, const Potential& A, const Grid& g,
              double m) {
  if (points.size() < 2) {
    throw invalid_argument("ldp.rate_F", "need at least 2 points");
  }
  check_pair(V, Vbar, m, "ldp.rate_F");
  std::vector<int> idx(points.size());
  for (std::size_t t = 0; t < points.size(); ++t) {
    idx[t] = nearest_node(g, points[t]);
  }
  double acc = max_sum(V, Vbar) - V.values[idx.front()] -
               Vbar.values[idx.back()];
  for (std::size_t t = 0; t + 1 < idx.size(); ++t) {
    acc -= A.eval(g.nodes[idx[t]], g.nodes[idx[t + 1]]) - m;
  }
  return acc;
}

double rate_prefix(std::span<const double> points, const Subaction& V,
                   const Potential& A, const Grid& g, double m) {
  if (points.size() < 2) {
    throw invalid_argument("ldp.rate_prefix", "need at least 2 points");
  }
  if (V.direction != Direction::forward) {
    throw invalid_argument("ldp.rate_prefix", "need a forward subaction");
  }
  double acc = 0.0;
  for (std::size_t t = 0; t + 1 < points.size(); ++t) {
    const int a = nearest_node(g, points[t]);
    const int b = nearest_node(g, points[t + 1]);
    const double term = V.values[b] - V.values[a] -
                        (A.eval(g.nodes[a], g.nodes[b]) - m);
    if (term < -1e-6) {
      throw invalid_argument(
          "ldp.rate_prefix",
          "rate summand " + std::to_string(term) + " at step " +
              std::to_string(t) +
              " is negative; V is not a subaction for this m");
    }
    acc += term;
  }
  return acc;
}

namespace {

struct CylinderIndexRanges {
  std::vector<std::vector<int>> sets;  // node indices per coordinate
  double tuple_count = 0.0;
};

CylinderIndexRanges snap_cylinder(const std::vector<Interval>& cylinder,
                                  const Grid& g, int stride) {
  CylinderIndexRanges r;
  r.tuple_count = 1.0;
  for (std::size_t t = 0; t < cylinder.size(); ++t) {
    const int lo = nearest_node(g, cylinder[t].lo);
    const int hi = nearest_node(g, cylinder[t].hi);
    if (hi <= lo) {
      throw degenerate_cylinder(
          "ldp.inf_rate_over_cylinder",
          "interval " + std::to_string(t) + " collapsed after snapping");
    }
    std::vector<int> set;
    for (int i = lo; i <= hi; i += stride) set.push_back(i);
    if (set.back() != hi) set.push_back(hi);
    r.tuple_count *= static_cast<double>(set.size());
    r.sets.push_back(std::move(set));
  }
  return r;
}

// F_k over node-index tuples, with the edge sums taken incrementally.
class TupleCost {
 public:
  TupleCost(const Subaction& V, const Subaction& Vbar, const Matrix& W,
            double m, double maxvv)
      : V_(V), Vbar_(Vbar), W_(W), m_(m), maxvv_(maxvv) {}

  double eval(const std::vector<int>& idx) const {
    double acc = maxvv_ - V_.values[idx.front()] - Vbar_.values[idx.back()];
    for (std::size_t t = 0; t + 1 < idx.size(); ++t) {
      acc -= W_(idx[t], idx[t + 1]) - m_;
    }
    return acc;
  }

 private:
  const Subaction& V_;
  const Subaction& Vbar_;
  const Matrix& W_;
  double m_;
  double maxvv_;
};

void exhaustive_min(const CylinderIndexRanges& ranges, const TupleCost& cost,
                    std::vector<int>& tuple, std::size_t depth, double& best,
                    std::vector<int>& best_tuple) {
  if (depth == ranges.sets.size()) {
    const double v = cost.eval(tuple);
    if (v < best) {
      best = v;
      best_tuple = tuple;
    }
    return;
  }
  for (int i : ranges.sets[depth]) {
    tuple[depth] = i;
    exhaustive_min(ranges, cost, tuple, depth + 1, best, best_tuple);
  }
}

}  // namespace

InfRate inf_rate_over_cylinder(const std::vector<Interval>& cylinder,
                               const Subaction& V, const Subaction& Vbar,
                               const Potential& A, const Grid& g, double m,
                               std::uint64_t seed) {
  check_pair(V, Vbar, m, "ldp.inf_rate_over_cylinder");
  if (cylinder.size() < 2) {
    throw invalid_argument("ldp.inf_rate_over_cylinder",
                           "cylinder must have size >= 2");
  }
  Matrix W = potential_matrix(A, g);
  const double maxvv = max_sum(V, Vbar);
  const TupleCost cost(V, Vbar, W, m, maxvv);

  CylinderIndexRanges full = snap_cylinder(cylinder, g, 1);
  InfRate out;
  if (full.tuple_count <= 1e7) {
    std::vector<int> tuple(cylinder.size());
    out.value = std::numeric_limits<double>::infinity();
    exhaustive_min(full, cost, tuple, 0, out.value, out.argmin);
    out.exhaustive = true;
    return out;
  }

  // Bound mode: coordinate descent from 32 seeded starts, floored against an
  // exhaustive pass on a coarsened grid. Both are upper bounds of the inf.
  out.exhaustive = false;
  const std::size_t k = cylinder.size();
  std::mt19937_64 rng(seed);
  double best = std::numeric_limits<double>::infinity();
  std::vector<int> best_tuple;
  for (int start = 0; start < 32; ++start) {
    std::vector<int> tuple(k);
    for (std::size_t t = 0; t < k; ++t) {
      tuple[t] = full.sets[t][rng() % full.sets[t].size()];
    }
    bool moved = true;
    while (moved) {
      moved = false;
      for (std::size_t t = 0; t < k; ++t) {
        int arg = tuple[t];
        double local = cost.eval(tuple);
        for (int i : full.sets[t]) {
          std::vector<int> probe = tuple;
          probe[t] = i;
          const double v = cost.eval(probe);
          if (v < local) {
            local = v;
            arg = i;
          }
        }
        if (arg != tuple[t]) {
          tuple[t] = arg;
          moved = true;
        }
      }
    }
    const double v = cost.eval(tuple);
    if (v < best) {
      best = v;
      best_tuple = tuple;
    }
  }

  int stride = 2;
  while (snap_cylinder(cylinder, g, stride).tuple_count > 1e7) stride *= 2;
  CylinderIndexRanges coarse = snap_cylinder(cylinder, g, stride);
  std::vector<int> tuple(k);
  double coarse_best = std::numeric_limits<double>::infinity();
  std::vector<int> coarse_tuple;
  exhaustive_min(coarse, cost, tuple, 0, coarse_best, coarse_tuple);
  if (coarse_best < best) {
    best = coarse_best;
    best_tuple = coarse_tuple;
  }
  out.value = best;
  out.argmin = best_tuple;
  return out;
}

RateReport ldp_table(const Potential& A, const Grid& g, const Subaction& V,
                     const Subaction& Vbar, double m,
                     const std::vector<Interval>& cylinder,
                     const std::vector<double>& betas, double eigen_tol,
                     const std::vector<EigenPair>* precomputed, int threads) {
  if (betas.size() < 3) {
    throw invalid_argument("ldp.ldp_table", "need at least 3 betas");
  }
  for (std::size_t k = 1; k < betas.size(); ++k) {
    if (!(betas[k] > betas[k - 1]) || !(betas[k - 1] > 0)) {
      throw invalid_argument("ldp.ldp_table",
                             "betas must be positive and increasing");
    }
  }
  RateReport rep;
  rep.cylinder = cylinder;
  const InfRate inf = inf_rate_over_cylinder(cylinder, V, Vbar, A, g, m);
  rep.F_inf = inf.value;
  rep.F_inf_exhaustive = inf.exhaustive;

  for (double beta : betas) {
    const EigenPair* ep = nullptr;
    EigenPair solved;
    if (precomputed != nullptr) {
      for (const EigenPair& cand : *precomputed) {
        if (cand.beta == beta) {
          ep = &cand;
          break;
        }
      }
    }
    if (ep == nullptr) {
      solved = leading_eigenpair(beta, A, g, eigen_tol, 100000, threads);
      ep = &solved;
    }
    const GibbsChain chain = build_chain(*ep, A, g, threads);
    const double mu = cylinder_measure(chain, g, cylinder);
    RateRow row;
    row.beta = beta;
    row.log_measure_over_beta = std::log(mu) / beta;
    row.error = std::abs(row.log_measure_over_beta + rep.F_inf);
    rep.rows.push_back(row);
  }

  const std::size_t r = rep.rows.size();
  rep.converged = r >= 3 && rep.rows[r - 1].error <= rep.rows[r - 2].error &&
                  rep.rows[r - 2].error <= rep.rows[r - 3].error;
  return rep;
}

}  // namespace ergopt
