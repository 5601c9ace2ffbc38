#include "ergopt/mane.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <utility>

#include "ergopt/errors.hpp"
#include "ergopt/parallel.hpp"

namespace ergopt {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// out = min-plus product P (x) cost, parallel over rows.
void min_plus_product(const Matrix& P, const Matrix& cost, Matrix& out,
                      int threads) {
  const std::size_t n = P.rows();
  parallel_for(n, threads, [&](std::size_t i) {
    double* oi = out.row(i);
    for (std::size_t j = 0; j < n; ++j) oi[j] = kInf;
    const double* pi = P.row(i);
    for (std::size_t k = 0; k < n; ++k) {
      const double pik = pi[k];
      const double* ck = cost.row(k);
      for (std::size_t j = 0; j < n; ++j) {
        const double cand = pik + ck[j];
        if (cand < oi[j]) oi[j] = cand;
      }
    }
  });
}

}  // namespace

CostMatrices cost_matrices(const Potential& A, const Grid& g, double m,
                           int k_max, double tol, int threads) {
  if (k_max < 3) {
    throw invalid_argument("mane.cost_matrices", "k_max must be >= 3");
  }
  const int n = g.n;
  Matrix W = potential_matrix(A, g);
  Matrix cost(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) cost(i, j) = m - W(i, j);
  }

  CostMatrices cm;
  cm.m = m;
  cm.S = cost;
  // Floyd-Warshall over paths with >= 1 edge (loop-carried, single-threaded).
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      const double sik = cm.S(i, k);
      double* si = cm.S.row(i);
      const double* sk = cm.S.row(k);
      for (int j = 0; j < n; ++j) {
        const double cand = sik + sk[j];
        if (cand < si[j]) si[j] = cand;
      }
    }
  }
  for (int i = 0; i < n; ++i) {
    if (cm.S(i, i) < -1e-9 * (1.0 + std::abs(m))) {
      throw inconsistent_m(
          "mane.cost_matrices",
          "cycle of mean above m detected at node " + std::to_string(i) +
              " (S(i,i) = " + std::to_string(cm.S(i, i)) +
              "); m is not the maximum");
    }
  }

  // Peierls barrier windows: h_K = min over exact edge counts in [K/2, K].
  Matrix P = cost;  // exactly one edge
  Matrix next_power(n, n);
  Matrix window = cost;  // running min inside the current window
  Matrix prev_window;
  int e = 1;
  int K = 4;
  cm.h_converged = false;
  while (K <= k_max) {
    if (e < K / 2) {
      // advance to the window start without collecting minima
      while (e < K / 2) {
        min_plus_product(P, cost, next_power, threads);
        std::swap(P, next_power);
        ++e;
      }
      window = P;
    }
    while (e < K) {
      min_plus_product(P, cost, next_power, threads);
      std::swap(P, next_power);
      ++e;
      for (int i = 0; i < n; ++i) {
        double* wi = window.row(i);
        const double* pi = P.row(i);
        for (int j = 0; j < n; ++j) {
          if (pi[j] < wi[j]) wi[j] = pi[j];
        }
      }
    }
    cm.k_used = K;
    if (!prev_window.empty()) {
      double diff = 0.0;
      for (int i = 0; i < n && diff <= tol; ++i) {
        for (int j = 0; j < n; ++j) {
          diff = std::max(diff, std::abs(window(i, j) - prev_window(i, j)));
        }
      }
      if (diff <= tol) {
        cm.h_converged = true;
        break;
      }
    }
    prev_window = window;
    window = P;  // P is the K-edge matrix, the start of window [K, 2K]
    K *= 2;
  }
  cm.h = cm.h_converged ? std::move(window) : std::move(prev_window);
  if (cm.h.empty()) {  // k_max < 4: no window formed, report 1-edge costs
    cm.h = P;
    cm.k_used = 1;
  }
  return cm;
}

std::vector<int> omega_set(const CostMatrices& cm, double tol) {
  std::vector<int> omega;
  const std::size_t n = cm.S.rows();
  for (std::size_t i = 0; i < n; ++i) {
    if (cm.S(i, i) <= tol) omega.push_back(static_cast<int>(i));
  }
  if (omega.empty()) {
    throw empty_omega("mane.omega_set",
                      "no node has S(i,i) <= " + std::to_string(tol) +
                          "; m inconsistent or tolerance too tight");
  }
  return omega;
}

double default_omega_tol(const Potential& A, const Grid& g) {
  return 1e-6 * A.lip * g.spacing();
}

SeparatingSubaction separating_subaction(const CostMatrices& cm,
                                         const std::vector<int>& omega,
                                         const Potential& A, const Grid& g) {
  const int n = g.n;
  Matrix W = potential_matrix(A, g);
  std::vector<bool> in_omega(n, false);
  for (int i : omega) in_omega[i] = true;
  std::vector<int> complement;
  for (int i = 0; i < n; ++i) {
    if (!in_omega[i]) complement.push_back(i);
  }
  const int J = static_cast<int>(complement.size());

  std::vector<double> weight(J);
  for (int j = 0; j < J; ++j) weight[j] = std::ldexp(1.0, -(j + 1));
  const double tail = std::ldexp(1.0, -J);  // 1 - sum of weights

  SeparatingSubaction out;
  out.u.values.assign(n, 0.0);
  for (int j = 0; j < J; ++j) {
    const int c = complement[j];
    const double base = cm.S(c, 0);
    for (int z = 0; z < n; ++z) {
      out.u.values[z] += weight[j] * (cm.S(c, z) - base);
    }
  }
  out.u.direction = Direction::backward;
  out.u.kind = SubactionKind::separating;
  out.u.m = cm.m;
  out.u.normalization_index = 0;

  // Margin decomposition: every d_j = S(x_j,x) - S(x_j,y) - (A(x,y) - m) is
  // nonnegative by the triangle inequality, so negatives inside the rounding
  // envelope of the shortest-path sums are clamped to zero; anything beyond
  // the 1e-9 triangle tolerance means S or m is inconsistent.
  const double noise_floor = -1e-9 * (1.0 + std::abs(cm.m));
  out.margins.assign(n, 0.0);
  for (int x = 0; x < n; ++x) {
    double best = kInf;
    for (int y = 0; y < n; ++y) {
      const double gap = cm.m - W(x, y);
      double acc = tail * gap;
      for (int j = 0; j < J; ++j) {
        const int c = complement[j];
        double d = (cm.S(c, x) - cm.S(c, y)) + gap;
        if (d < 0.0) {
          if (d < noise_floor) {
            throw construction_failure(
                "mane.separating_subaction",
                "triangle defect " + std::to_string(d) +
                    " in the margin decomposition; S or m inconsistent",
                x);
          }
          d = 0.0;
        }
        acc += weight[j] * d;
      }
      if (acc < best) best = acc;
    }
    out.margins[x] = best;
  }

  out.max_margin_on_omega = 0.0;
  out.min_margin_off_omega = kInf;
  for (int x = 0; x < n; ++x) {
    if (in_omega[x]) {
      out.max_margin_on_omega = std::max(out.max_margin_on_omega,
                                         out.margins[x]);
      if (out.margins[x] > 1e-6) {
        throw construction_failure(
            "mane.separating_subaction",
            "margin " + std::to_string(out.margins[x]) +
                " on an omega node exceeds 1e-6",
            x);
      }
    } else {
      out.min_margin_off_omega = std::min(out.min_margin_off_omega,
                                          out.margins[x]);
      if (!(out.margins[x] > 0.0)) {
        throw construction_failure(
            "mane.separating_subaction",
            "margin is not positive off omega (node " + std::to_string(x) +
                ")",
            x);
      }
    }
  }
  out.u.residual = out.max_margin_on_omega;
  return out;
}

Subaction subaction_from_boundary(const std::vector<double>& f,
                                  const std::vector<int>& omega,
                                  const CostMatrices& cm, const Grid& g) {
  if (f.size() != omega.size()) {
    throw invalid_argument("mane.subaction_from_boundary",
                           "boundary data length does not match omega");
  }
  if (!cm.h_converged) {
    throw invalid_argument(
        "mane.subaction_from_boundary",
        "Peierls barrier did not stabilize; refusing calibrated construction");
  }
  const std::size_t p = omega.size();
  for (std::size_t a = 0; a < p; ++a) {
    for (std::size_t b = 0; b < p; ++b) {
      if (f[b] - f[a] > cm.h(omega[a], omega[b]) + 1e-9) {
        throw incompatible_boundary(
            "mane.subaction_from_boundary",
            "f(y) - f(x) exceeds h(x,y) for nodes x=" +
                std::to_string(omega[a]) + ", y=" + std::to_string(omega[b]),
            omega[a], omega[b]);
      }
    }
  }
  const int n = g.n;
  Subaction u;
  u.values.assign(n, 0.0);
  for (int x = 0; x < n; ++x) {
    double best = -kInf;
    for (std::size_t q = 0; q < p; ++q) {
      const double cand = f[q] - cm.h(x, omega[q]);
      if (cand > best) best = cand;
    }
    u.values[x] = best;
  }
  u.direction = Direction::backward;
  u.kind = SubactionKind::calibrated;
  u.m = cm.m;
  u.normalization_index = 0;

  double defect = 0.0;
  for (std::size_t q = 0; q < p; ++q) {
    defect = std::max(defect, std::abs(u.values[omega[q]] - f[q]));
  }
  if (defect > 1e-7) {
    throw internal_consistency(
        "mane.subaction_from_boundary",
        "reconstruction does not match the boundary data (defect " +
            std::to_string(defect) + ")");
  }
  u.residual = defect;
  return u;
}

}  // namespace ergopt
