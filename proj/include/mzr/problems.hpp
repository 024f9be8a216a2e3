#pragma once

#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "mzr/basis.hpp"
#include "mzr/system.hpp"

// The two benchmark systems: a linear decay ODE with a uniform random rate,
// and the Kraichnan-Orszag three-mode system with 1D/2D/3D random initial
// data. Plus the closed-form statistics of the linear problem.

namespace mzr {

enum class ProblemKind { linear_decay, kraichnan_orszag };

struct ProblemSpec {
  ProblemKind kind = ProblemKind::linear_decay;
  int dimension = 1;  // number of random inputs; doubles as the IC variant
  double u0 = 1.0;    // linear decay only

  int n_states() const { return kind == ProblemKind::linear_decay ? 1 : 3; }

  static ProblemSpec from_name(const std::string& name, double u0 = 1.0) {
    if (name == "ode") return {ProblemKind::linear_decay, 1, u0};
    if (name == "ko1d") return {ProblemKind::kraichnan_orszag, 1, u0};
    if (name == "ko2d") return {ProblemKind::kraichnan_orszag, 2, u0};
    if (name == "ko3d") return {ProblemKind::kraichnan_orszag, 3, u0};
    throw std::invalid_argument("unknown problem name: " + name);
  }

  std::string name() const {
    if (kind == ProblemKind::linear_decay) return "ode";
    return "ko" + std::to_string(dimension) + "d";
  }
};

// Project a pointwise function of xi onto the basis by tensor quadrature.
inline std::vector<double> project_function(
    const std::function<double(std::span<const double>)>& f,
    const MultiIndexSet& set, const QuadratureRule& rule) {
  const int d = set.dimension();
  const int n = set.size();
  const int np = rule.points_per_dim();
  std::vector<double> out(n, 0.0);
  std::vector<int> q(d, 0);
  std::vector<double> pt(d);
  while (true) {
    double w = 1.0;
    for (int m = 0; m < d; ++m) {
      pt[m] = rule.nodes()[q[m]];
      w *= rule.weights()[q[m]];
    }
    const double fv = f(pt);
    for (int k = 0; k < n; ++k) out[k] += w * fv * legendre_eval(set[k], pt);
    int m = 0;
    while (m < d && ++q[m] == np) q[m++] = 0;
    if (m == d) break;
  }
  return out;
}

// Build the quadratic system on the global element [-1,1]^d. Splitting
// re-projects the parameter and initial expansions onto child elements.
inline QuadraticSystem build_problem(const ProblemSpec& spec, const MultiIndexSet& set,
                                     const QuadratureRule& rule) {
  if (set.dimension() != spec.dimension)
    throw std::invalid_argument("build_problem: basis dimension mismatch");
  const int n = set.size();
  if (spec.kind == ProblemKind::linear_decay) {
    if (spec.dimension != 1)
      throw std::invalid_argument("build_problem: linear decay is 1D only");
    // du/dt = -kappa u with kappa = xi ~ U(-1,1); Z = (kappa, u).
    QuadraticSystem sys = QuadraticSystem::zeros(1, 1, n);
    sys.add_product(0, 0, 1, -1.0);
    sys.param_coeffs[0] =
        project_function([](std::span<const double> x) { return x[0]; }, set, rule);
    const double u0 = spec.u0;
    sys.initial_coeffs[0] =
        project_function([u0](std::span<const double>) { return u0; }, set, rule);
    return sys;
  }
  // Kraichnan-Orszag: dy1 = y1 y3, dy2 = -y2 y3, dy3 = -y1^2 + y2^2
  // (the form that conserves y1^2 + y2^2 + y3^2).
  QuadraticSystem sys = QuadraticSystem::zeros(3, 0, n);
  sys.add_product(0, 0, 2, 1.0);
  sys.add_product(1, 1, 2, -1.0);
  sys.add_product(2, 0, 0, -1.0);
  sys.add_product(2, 1, 1, 1.0);
  std::function<double(std::span<const double>)> ic[3];
  switch (spec.dimension) {
    case 1:
      ic[0] = [](std::span<const double>) { return 1.0; };
      ic[1] = [](std::span<const double> x) { return 0.1 * x[0]; };
      ic[2] = [](std::span<const double>) { return 0.0; };
      break;
    case 2:
      ic[0] = [](std::span<const double>) { return 1.0; };
      ic[1] = [](std::span<const double> x) { return 0.1 * x[0]; };
      ic[2] = [](std::span<const double> x) { return x[1]; };
      break;
    case 3:
      ic[0] = [](std::span<const double> x) { return x[0]; };
      ic[1] = [](std::span<const double> x) { return x[1]; };
      ic[2] = [](std::span<const double> x) { return x[2]; };
      break;
    default:
      throw std::invalid_argument("build_problem: Kraichnan-Orszag needs d in {1,2,3}");
  }
  for (int m = 0; m < 3; ++m)
    sys.initial_coeffs[m] = project_function(ic[m], set, rule);
  return sys;
}

// Deterministic sample of the problem at a fixed xi: initial state and
// pointwise right-hand side. Used by the Monte Carlo baseline.
inline std::vector<double> sample_initial(const ProblemSpec& spec,
                                          std::span<const double> xi) {
  if (spec.kind == ProblemKind::linear_decay) return {spec.u0};
  switch (spec.dimension) {
    case 1: return {1.0, 0.1 * xi[0], 0.0};
    case 2: return {1.0, 0.1 * xi[0], xi[1]};
    default: return {xi[0], xi[1], xi[2]};
  }
}

inline void sample_rhs(const ProblemSpec& spec, std::span<const double> xi,
                       std::span<const double> y, std::span<double> dy) {
  if (spec.kind == ProblemKind::linear_decay) {
    dy[0] = -xi[0] * y[0];
    return;
  }
  dy[0] = y[0] * y[2];
  dy[1] = -y[1] * y[2];
  dy[2] = -y[0] * y[0] + y[1] * y[1];
}

// Closed-form mean and variance of u(t) = u0 exp(-kappa t), kappa ~ U(-1,1):
//   mean = u0 sinh(t)/t,  var = u0^2 [sinh(2t)/(2t) - sinh(t)^2/t^2].
// The closed forms subtract nearly equal exponentials for small t, so a short
// Taylor series takes over below t = 1e-3.
inline std::pair<double, double> exact_linear_stats(double u0, double t) {
  if (t < 0.0) throw std::invalid_argument("exact_linear_stats: t must be >= 0");
  if (t == 0.0) return {u0, 0.0};
  if (t < 1e-3) {
    // mean/u0 = sum t^{2m}/(2m+1)!,  var/u0^2 = sum 4^m (2m) t^{2m}/(2m+2)!
    double mean = 0.0, var = 0.0;
    double fact = 1.0;  // (2m+1)! running
    double pow4 = 1.0, powt = 1.0;
    for (int m = 0; m <= 5; ++m) {
      if (m > 0) {
        fact *= (2.0 * m) * (2.0 * m + 1.0);
        pow4 *= 4.0;
        powt *= t * t;
      }
      mean += powt / fact;
      var += pow4 * (2.0 * m) * powt / (fact * (2.0 * m + 2.0));
    }
    return {u0 * mean, u0 * u0 * var};
  }
  const double mean = u0 * std::sinh(t) / t;
  const double sh = std::sinh(t) / t;
  const double var = u0 * u0 * (std::sinh(2.0 * t) / (2.0 * t) - sh * sh);
  return {mean, var};
}

}  // namespace mzr
