#include "ergopt/potential.hpp"

#include <cmath>
#include <cstddef>
#include <string>
#include <utility>

#include "ergopt/errors.hpp"

namespace ergopt {

namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

void check_arity(const std::string& name, const std::vector<double>& params,
                 std::size_t expected) {
  if (params.size() != expected) {
    throw invalid_argument(
        "potentials.builtin",
        name + " takes " + std::to_string(expected) + " parameter(s), got " +
            std::to_string(params.size()));
  }
}

}  // namespace

Potential builtin(const std::string& name, const std::vector<double>& params) {
  Potential A;
  A.name = name;
  if (name == "product") {
    check_arity(name, params, 0);
    A.eval = [](double x, double y) { return x * y; };
    A.d_x = [](double, double y) { return y; };
    A.d_y = [](double x, double) { return x; };
    A.d_xy = [](double, double) { return 1.0; };
    A.lip = std::sqrt(2.0);
  } else if (name == "quadratic") {
    check_arity(name, params, 0);
    A.eval = [](double x, double y) { return -(x - y) * (x - y); };
    A.d_x = [](double x, double y) { return -2.0 * (x - y); };
    A.d_y = [](double x, double y) { return 2.0 * (x - y); };
    A.d_xy = [](double, double) { return 2.0; };
    A.lip = 2.0 * std::sqrt(2.0);
  } else if (name == "xy_cosine") {
    check_arity(name, params, 0);
    A.eval = [](double x, double y) { return std::cos(kTwoPi * (x - y)); };
    A.d_x = [](double x, double y) {
      return -kTwoPi * std::sin(kTwoPi * (x - y));
    };
    A.d_y = [](double x, double y) {
      return kTwoPi * std::sin(kTwoPi * (x - y));
    };
    A.d_xy = [](double x, double y) {
      return kTwoPi * kTwoPi * std::cos(kTwoPi * (x - y));
    };
    A.lip = std::sqrt(2.0) * kTwoPi;
  } else if (name == "xy_cosine_magnetic") {
    check_arity(name, params, 1);
    const double l = params[0];
    A.eval = [l](double x, double y) {
      return std::cos(kTwoPi * (x - y)) + l * std::cos(kTwoPi * x);
    };
    A.d_x = [l](double x, double y) {
      return -kTwoPi * std::sin(kTwoPi * (x - y)) -
             l * kTwoPi * std::sin(kTwoPi * x);
    };
    A.d_y = [](double x, double y) {
      return kTwoPi * std::sin(kTwoPi * (x - y));
    };
    A.d_xy = [](double x, double y) {
      return kTwoPi * kTwoPi * std::cos(kTwoPi * (x - y));
    };
    // Both sine factors reach +-1 at a common point, so this sup is attained.
    A.lip = kTwoPi * std::hypot(1.0 + std::abs(l), 1.0);
  } else {
    throw invalid_argument("potentials.builtin",
                           "unknown potential name: " + name);
  }
  return A;
}

Perturbation polynomial_perturbation(std::vector<double> coeffs) {
  Perturbation p;
  double bound = 0.0;
  for (std::size_t k = 1; k < coeffs.size(); ++k) {
    bound += static_cast<double>(k) * std::abs(coeffs[k]);
  }
  p.df_sup = bound;
  p.f = [c = coeffs](double x) {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 0;) acc = acc * x + c[k];
    return acc;
  };
  p.df = [c = std::move(coeffs)](double x) {
    double acc = 0.0;
    for (std::size_t k = c.size(); k-- > 1;) {
      acc = acc * x + static_cast<double>(k) * c[k];
    }
    return acc;
  };
  return p;
}

Potential perturb(const Potential& A, const Perturbation& p) {
  Potential out;
  out.name = A.name + "+f";
  out.eval = [base = A.eval, f = p.f](double x, double y) {
    return base(x, y) + f(x);
  };
  out.d_x = [base = A.d_x, df = p.df](double x, double y) {
    return base(x, y) + df(x);
  };
  out.d_y = A.d_y;
  out.d_xy = A.d_xy;
  out.lip = A.lip + p.df_sup;
  return out;
}

TwistReport twist_report(const Potential& A, const Grid& g) {
  TwistReport r;
  double lo = A.d_xy(g.nodes[0], g.nodes[0]);
  double hi = lo;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      const double v = A.d_xy(g.nodes[i], g.nodes[j]);
      if (v < lo) lo = v;
      if (v > hi) hi = v;
    }
  }
  r.min_dxy = lo;
  r.max_dxy = hi;
  r.is_twist = (lo > 0.0) || (hi < 0.0);
  r.sign = lo > 0.0 ? +1 : (hi < 0.0 ? -1 : 0);
  return r;
}

Matrix potential_matrix(const Potential& A, const Grid& g) {
  Matrix W(g.n, g.n);
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      W(i, j) = A.eval(g.nodes[i], g.nodes[j]);
    }
  }
  return W;
}

double sup_abs(const Potential& A, const Grid& g) {
  double s = 0.0;
  for (int i = 0; i < g.n; ++i) {
    for (int j = 0; j < g.n; ++j) {
      const double v = std::abs(A.eval(g.nodes[i], g.nodes[j]));
      if (v > s) s = v;
    }
  }
  return s;
}

}  // namespace ergopt
