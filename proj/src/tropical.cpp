#include "ergopt/tropical.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "ergopt/errors.hpp"
#include "ergopt/matrix.hpp"
#include "ergopt/parallel.hpp"

namespace ergopt {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Extracts one critical cycle from the reduced weights W - m: a max-plus
// closure with path tracking, then the first simple cycle on the optimal
// closed walk through the best diagonal entry. Any simple cycle of that walk
// has reduced weight 0, so the first repeat is already critical.
std::vector<int> critical_cycle(const Matrix& W, double m, int n) {
  Matrix C(n, n);
  std::vector<int> next(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      C(i, j) = W(i, j) - m;
      next[i * static_cast<std::size_t>(n) + j] = j;
    }
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const double cik = C(i, k);
      for (int j = 0; j < n; ++j) {
        const double cand = cik + C(k, j);
        if (cand > C(i, j)) {
          C(i, j) = cand;
          next[i * static_cast<std::size_t>(n) + j] =
              next[i * static_cast<std::size_t>(n) + k];
        }
      }
    }
  }
  int start = 0;
  for (int i = 1; i < n; ++i) {
    if (C(i, i) > C(start, start)) start = i;
  }

  std::vector<int> order(n, -1);
  std::vector<int> walk{start};
  order[start] = 0;
  int cur = start;
  std::vector<int> cycle;
  for (int step = 0; step <= n; ++step) {
    cur = next[cur * static_cast<std::size_t>(n) + start];
    if (order[cur] >= 0) {
      cycle.assign(walk.begin() + order[cur], walk.end());
      break;
    }
    order[cur] = static_cast<int>(walk.size());
    walk.push_back(cur);
  }
  if (cycle.empty()) {
    throw internal_consistency("tropical.karp_value",
                               "failed to close a critical cycle");
  }
  const auto min_it = std::min_element(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), min_it, cycle.end());
  return cycle;
}

}  // namespace

KarpResult karp_value(const Potential& A, const Grid& g) {
  const int n = g.n;
  Matrix W = potential_matrix(A, g);

  // Karp's dynamic program from source node 0 on the complete digraph.
  Matrix D(n + 1, n, kNegInf);
  D(0, 0) = 0.0;
  for (int k = 1; k <= n; ++k) {
    for (int v = 0; v < n; ++v) {
      double best = kNegInf;
      for (int u = 0; u < n; ++u) {
        const double d = D(k - 1, u);
        if (d == kNegInf) continue;
        const double cand = d + W(u, v);
        if (cand > best) best = cand;
      }
      D(k, v) = best;
    }
  }
  double m = kNegInf;
  for (int v = 0; v < n; ++v) {
    if (D(n, v) == kNegInf) continue;
    double inner = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n; ++k) {
      if (D(k, v) == kNegInf) continue;
      const double cand = (D(n, v) - D(k, v)) / (n - k);
      if (cand < inner) inner = cand;
    }
    if (inner > m) m = inner;
  }

  KarpResult r;
  r.m = m;
  r.cycle = critical_cycle(W, m, n);

  double total = 0.0;
  const std::size_t len = r.cycle.size();
  for (std::size_t t = 0; t < len; ++t) {
    total += W(r.cycle[t], r.cycle[(t + 1) % len]);
  }
  const double mean = total / static_cast<double>(len);
  if (std::abs(mean - m) > 1e-9 * (1.0 + std::abs(m))) {
    throw internal_consistency(
        "tropical.karp_value",
        "extracted cycle mean " + std::to_string(mean) +
            " drifted from the Karp value " + std::to_string(m));
  }
  return r;
}

Subaction calibrated_subaction(const Potential& A, const Grid& g,
                               Direction direction, double m, double tol,
                               int max_iter, int threads) {
  if (tol <= 0.0) {
    throw invalid_argument("tropical.calibrated_subaction",
                           "tol must be positive");
  }
  const int n = g.n;
  Matrix W = potential_matrix(A, g);

  // One Lax-Oleinik sweep into `out`; in the forward direction the max runs
  // over the first index of A, in the backward direction over the second.
  const auto sweep = [&](const std::vector<double>& u,
                         std::vector<double>& out) {
    parallel_for(n, threads, [&](std::size_t y) {
      double best = kNegInf;
      if (direction == Direction::forward) {
        for (int x = 0; x < n; ++x) {
          const double cand = W(x, y) + u[x];
          if (cand > best) best = cand;
        }
      } else {
        const double* row = W.row(y);
        for (int x = 0; x < n; ++x) {
          const double cand = row[x] + u[x];
          if (cand > best) best = cand;
        }
      }
      out[y] = best - m;
    });
  };

  std::vector<double> u(n, 0.0), next(n);
  int used = max_iter;
  for (int it = 1; it <= max_iter; ++it) {
    sweep(u, next);
    const double shift = next[0];
    double change = 0.0;
    for (int i = 0; i < n; ++i) {
      next[i] -= shift;
      change = std::max(change, std::abs(next[i] - u[i]));
    }
    u.swap(next);
    if (change < tol) {
      used = it;
      break;
    }
  }

  sweep(u, next);
  double residual = 0.0;
  for (int i = 0; i < n; ++i) {
    residual = std::max(residual, std::abs(next[i] - u[i]));
  }

  Subaction s;
  s.values = std::move(u);
  s.direction = direction;
  s.kind = residual <= 1e-7 ? SubactionKind::calibrated : SubactionKind::plain;
  s.m = m;
  s.normalization_index = 0;
  s.residual = residual;
  s.iterations = used;
  return s;
}

BetaLimit beta_limit(const std::vector<EigenPair>& eigenpairs, Direction which,
                     const Subaction* reference) {
  if (eigenpairs.size() < 2) {
    throw invalid_argument("tropical.beta_limit",
                           "need at least 2 eigenpairs");
  }
  for (std::size_t k = 1; k < eigenpairs.size(); ++k) {
    if (!(eigenpairs[k].beta > eigenpairs[k - 1].beta)) {
      throw invalid_argument("tropical.beta_limit",
                             "betas must be strictly increasing");
    }
  }
  const std::size_t n = eigenpairs.front().phi.size();
  BetaLimit out;
  std::vector<double> prev;
  for (const EigenPair& ep : eigenpairs) {
    const std::vector<double>& f =
        which == Direction::forward ? ep.phi : ep.phi_bar;
    std::vector<double> u(n);
    const double base = std::log(f[0]);
    for (std::size_t i = 0; i < n; ++i) {
      u[i] = (std::log(f[i]) - base) / ep.beta;
    }
    out.betas.push_back(ep.beta);
    if (!prev.empty()) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        d = std::max(d, std::abs(u[i] - prev[i]));
      }
      out.consecutive_distance.push_back(d);
    }
    if (reference != nullptr) {
      double d = 0.0;
      for (std::size_t i = 0; i < n; ++i) {
        d = std::max(d, std::abs(u[i] - reference->values[i]));
      }
      out.distance_to_subaction.push_back(d);
    }
    prev = std::move(u);
  }
  out.limit = std::move(prev);
  return out;
}

DualityCertificate duality_certificate(const Subaction& u, const Potential& A,
                                       const Grid& g) {
  if (u.direction != Direction::backward) {
    throw invalid_argument("tropical.duality_certificate",
                           "certificate needs a backward subaction");
  }
  const int n = g.n;
  DualityCertificate cert;
  cert.dual_value = kNegInf;
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      const double v =
          A.eval(g.nodes[i], g.nodes[j]) + u.values[j] - u.values[i];
      if (v > cert.dual_value) cert.dual_value = v;
    }
  }
  cert.gap = cert.dual_value - u.m;
  return cert;
}

}  // namespace ergopt
