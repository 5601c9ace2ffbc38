#include "ergopt/transfer_operator.hpp"

#include <cmath>
#include <string>

#include "ergopt/errors.hpp"
#include "ergopt/parallel.hpp"

namespace ergopt {

TransferKernel::TransferKernel(double beta, const Potential& A, const Grid& g)
    : beta_(beta) {
  Matrix W = potential_matrix(A, g);
  double a_max = W(0, 0);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      if (W(i, j) > a_max) a_max = W(i, j);
    }
  }
  a_max_ = a_max;
  entries_ = Matrix(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      entries_(i, j) = std::exp(beta * (W(i, j) - a_max));
    }
  }
}

void TransferKernel::apply_forward_scaled(const Grid& g,
                                          std::span<const double> phi,
                                          std::span<double> out,
                                          int threads) const {
  const int n = g.n;
  parallel_for(n, threads, [&](std::size_t j) {
    double acc = 0.0;
    for (int i = 0; i < n; ++i) acc += g.weights[i] * entries_(i, j) * phi[i];
    out[j] = acc;
  });
}

void TransferKernel::apply_backward_scaled(const Grid& g,
                                           std::span<const double> phi,
                                           std::span<double> out,
                                           int threads) const {
  const int n = g.n;
  parallel_for(n, threads, [&](std::size_t i) {
    const double* row = entries_.row(i);
    double acc = 0.0;
    for (int j = 0; j < n; ++j) acc += g.weights[j] * row[j] * phi[j];
    out[i] = acc;
  });
}

std::vector<double> apply_forward(double beta, const Potential& A,
                                  const Grid& g, std::span<const double> phi) {
  if (phi.size() != static_cast<std::size_t>(g.n)) {
    throw invalid_argument("transfer_operator.apply_forward",
                           "input length does not match grid");
  }
  TransferKernel K(beta, A, g);
  std::vector<double> out(g.n);
  K.apply_forward_scaled(g, phi, out);
  const double scale = std::exp(beta * K.a_max());
  for (double& v : out) v *= scale;
  return out;
}

std::vector<double> apply_backward(double beta, const Potential& A,
                                   const Grid& g, std::span<const double> phi) {
  if (phi.size() != static_cast<std::size_t>(g.n)) {
    throw invalid_argument("transfer_operator.apply_backward",
                           "input length does not match grid");
  }
  TransferKernel K(beta, A, g);
  std::vector<double> out(g.n);
  K.apply_backward_scaled(g, phi, out);
  const double scale = std::exp(beta * K.a_max());
  for (double& v : out) v *= scale;
  return out;
}

namespace {

struct IterationResult {
  std::vector<double> phi;
  double lambda_scaled = 0.0;
  int iterations = 0;
  double residual = 0.0;
};

// Shared loop for both directions; `forward` selects the operator.
IterationResult power_iterate(const TransferKernel& K, const Grid& g,
                              bool forward, double tol, int max_iter,
                              int threads) {
  const int n = g.n;
  std::vector<double> phi(n, 1.0), image(n);
  double lambda = 0.0, residual = 0.0;
  for (int it = 1; it <= max_iter; ++it) {
    if (forward) {
      K.apply_forward_scaled(g, phi, image, threads);
    } else {
      K.apply_backward_scaled(g, phi, image, threads);
    }
    lambda = integrate(g, image);
    residual = 0.0;
    for (int i = 0; i < n; ++i) {
      const double r = std::abs(image[i] / (lambda * phi[i]) - 1.0);
      if (r > residual) residual = r;
    }
    for (int i = 0; i < n; ++i) phi[i] = image[i] / lambda;
    if (residual < tol) {
      return {std::move(phi), lambda, it, residual};
    }
  }
  throw no_convergence(
      "transfer_operator.leading_eigenpair",
      std::string("power iteration (") + (forward ? "forward" : "backward") +
          ") did not reach tol " + std::to_string(tol) + " in " +
          std::to_string(max_iter) + " iterations; last residual " +
          std::to_string(residual),
      residual, max_iter);
}

}  // namespace

EigenPair leading_eigenpair(double beta, const Potential& A, const Grid& g,
                            double tol, int max_iter, int threads) {
  if (tol <= 0.0) {
    throw invalid_argument("transfer_operator.leading_eigenpair",
                           "tol must be positive");
  }
  TransferKernel K(beta, A, g);
  IterationResult fwd = power_iterate(K, g, true, tol, max_iter, threads);
  IterationResult bwd = power_iterate(K, g, false, tol, max_iter, threads);

  const double rel_gap =
      std::abs(fwd.lambda_scaled - bwd.lambda_scaled) / fwd.lambda_scaled;
  if (rel_gap > 10.0 * tol) {
    throw internal_consistency(
        "transfer_operator.leading_eigenpair",
        "forward and backward eigenvalues disagree: relative gap " +
            std::to_string(rel_gap));
  }

  EigenPair ep;
  ep.beta = beta;
  ep.a_max = K.a_max();
  ep.lambda_scaled = fwd.lambda_scaled;
  ep.log_lambda = std::log(fwd.lambda_scaled) + beta * K.a_max();
  ep.lambda = std::exp(ep.log_lambda);
  ep.phi = std::move(fwd.phi);
  ep.phi_bar = std::move(bwd.phi);
  ep.iterations = std::max(fwd.iterations, bwd.iterations);
  ep.residual = std::max(fwd.residual, bwd.residual);
  ep.lambda_rel_gap = rel_gap;

  // A-priori bounds e^{-beta c} <= phi <= e^{beta c}, c = 2 sup|A|, checked in
  // log space so large beta cannot overflow the comparison.
  const double c = 2.0 * sup_abs(A, g);
  const double slack = 1e-9 * (1.0 + beta * c);
  for (int i = 0; i < g.n; ++i) {
    if (!(ep.phi[i] > 0.0) || !(ep.phi_bar[i] > 0.0)) {
      throw internal_consistency("transfer_operator.leading_eigenpair",
                                 "eigenfunction lost positivity at node " +
                                     std::to_string(i));
    }
    const double lf = std::log(ep.phi[i]);
    const double lb = std::log(ep.phi_bar[i]);
    if (lf > beta * c + slack || lf < -beta * c - slack ||
        lb > beta * c + slack || lb < -beta * c - slack) {
      throw internal_consistency(
          "transfer_operator.leading_eigenpair",
          "eigenfunction violates the a-priori bound at node " +
              std::to_string(i));
    }
  }
  return ep;
}

double spectral_gap_bound(const EigenPair& ep, const Potential& A,
                          const Grid& g) {
  double a_min = A.eval(g.nodes[0], g.nodes[0]);
  double a_max = a_min;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      const double v = A.eval(g.nodes[i], g.nodes[j]);
      if (v < a_min) a_min = v;
      if (v > a_max) a_max = v;
    }
  }
  // (K_sup - K_inf)/(K_sup + K_inf) = (1 - r)/(1 + r), r = e^{-beta range}.
  const double r = std::exp(-ep.beta * (a_max - a_min));
  const double ratio = (1.0 - r) / (1.0 + r);
  if (ratio == 0.0) return 0.0;  // rank-one kernel, even if lambda overflowed
  return ep.lambda * ratio;
}

}  // namespace ergopt
