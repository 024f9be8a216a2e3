#pragma once

#include <cmath>
#include <span>
#include <stdexcept>
#include <vector>

#include "mzr/basis.hpp"

// Quadratic stochastic ODE systems in Galerkin form, the full right-hand side
// over F u G and the t-model reduced right-hand side over F, together with the
// energy-rate and directional refinement indicators built from them.

namespace mzr {

// dy_m/dt = c_m + sum_a L_{m,a} Z_a + sum_{a,b} Q_{m,a,b} Z_a Z_b, with
// Z = (params (+) states) an extended vector of random fields. Each field is
// carried as a gPC coefficient vector on the element-local basis.
struct QuadraticSystem {
  int n_states = 0;
  int n_params = 0;
  std::vector<double> constant;                     // per state
  std::vector<std::vector<double>> linear;          // [state][n_z]
  std::vector<std::vector<double>> bilinear;        // [state], dense n_z*n_z, symmetric
  std::vector<std::vector<double>> param_coeffs;    // [param][mode]
  std::vector<std::vector<double>> initial_coeffs;  // [state][mode]

  int n_extended() const { return n_params + n_states; }

  double& q(int m, int a, int b) { return bilinear[m][a * n_extended() + b]; }
  double q(int m, int a, int b) const { return bilinear[m][a * n_extended() + b]; }

  static QuadraticSystem zeros(int n_states, int n_params, int n_modes) {
    QuadraticSystem s;
    s.n_states = n_states;
    s.n_params = n_params;
    s.constant.assign(n_states, 0.0);
    const int nz = n_states + n_params;
    s.linear.assign(n_states, std::vector<double>(nz, 0.0));
    s.bilinear.assign(n_states, std::vector<double>(nz * nz, 0.0));
    s.param_coeffs.assign(n_params, std::vector<double>(n_modes, 0.0));
    s.initial_coeffs.assign(n_states, std::vector<double>(n_modes, 0.0));
    return s;
  }

  // Set the coefficient of the product Z_a * Z_b in equation m, symmetrized.
  void add_product(int m, int a, int b, double coef) {
    q(m, a, b) += coef / 2.0;
    q(m, b, a) += coef / 2.0;
  }

  bool symmetric() const {
    const int nz = n_extended();
    for (int m = 0; m < n_states; ++m)
      for (int a = 0; a < nz; ++a)
        for (int b = a + 1; b < nz; ++b)
          if (q(m, a, b) != q(m, b, a)) return false;
    return true;
  }
};

// Coefficient vectors for all state variables over F u G, stored flat
// ([state][mode]) so time integration can treat the whole thing as one vector.
struct GalerkinState {
  double t = 0.0;
  int n_states = 0;
  int n_modes = 0;
  std::vector<double> c;

  GalerkinState() = default;
  GalerkinState(int n_states_, int n_modes_)
      : n_states(n_states_), n_modes(n_modes_),
        c(static_cast<std::size_t>(n_states_) * n_modes_, 0.0) {}

  std::span<double> var(int m) {
    return std::span<double>(c).subspan(static_cast<std::size_t>(m) * n_modes, n_modes);
  }
  std::span<const double> var(int m) const {
    return std::span<const double>(c).subspan(static_cast<std::size_t>(m) * n_modes,
                                              n_modes);
  }

  bool finite() const {
    for (double x : c)
      if (!std::isfinite(x)) return false;
    return true;
  }

  // Zero out every mode at position >= n_f.
  void restrict_to(int n_f) {
    for (int m = 0; m < n_states; ++m) {
      auto v = var(m);
      for (int k = n_f; k < n_modes; ++k) v[k] = 0.0;
    }
  }

  bool supported_on(int n_f) const {
    for (int m = 0; m < n_states; ++m) {
      auto v = var(m);
      for (int k = n_f; k < n_modes; ++k)
        if (v[k] != 0.0) return false;
    }
    return true;
  }
};

namespace detail {

inline std::span<const double> extended_field(const QuadraticSystem& sys,
                                              const GalerkinState& state, int a) {
  return a < sys.n_params ? std::span<const double>(sys.param_coeffs[a])
                          : state.var(a - sys.n_params);
}

}  // namespace detail

// Sliced contraction operators for the t-model memory term: the G-components
// of a bilinear product of resolved fields, and the F-components of a product
// against a G-supported residual. Both are restrictions of the same e-tensor;
// precomputing them avoids filtering index ranges inside the time loop.
class ContractedMemoryTensor {
public:
  struct Term {
    int h;  // index of the unperturbed field
    int w;  // index in G of the residual
    double v;
  };

  ContractedMemoryTensor(const TripleProductTensor& tensor, const MultiIndexSet& set)
      : n_modes_(set.size()), n_f_(set.resolved_size()) {
    if (tensor.size() != set.size() || tensor.order() != set.order() ||
        tensor.dimension() != set.dimension())
      throw std::invalid_argument("ContractedMemoryTensor: tensor/set mismatch");
    f_terms_.resize(n_f_);
    for (int k = 0; k < n_f_; ++k)
      for (const auto& p : tensor.pairs_for_mode(k)) {
        if (p.i == p.j) {
          if (p.i >= n_f_) f_terms_[k].push_back({p.i, p.i, p.v});
        } else {
          if (p.j >= n_f_) f_terms_[k].push_back({p.i, p.j, p.v});
          if (p.i >= n_f_) f_terms_[k].push_back({p.j, p.i, p.v});
        }
      }
    g_terms_.resize(n_modes_ - n_f_);
    for (int j = n_f_; j < n_modes_; ++j)
      g_terms_[j - n_f_] = tensor.pairs_for_mode(j);
  }

  int n_modes() const { return n_modes_; }
  int n_resolved() const { return n_f_; }

  // out_k += coef * sum_{i, j in G} h_i w_j e_ijk, k in F. w is full-length
  // with only its G entries read.
  void contract_gw_add(std::span<const double> h, std::span<const double> w,
                       double coef, std::span<double> out) const {
    for (int k = 0; k < n_f_; ++k) {
      double s = 0.0;
      for (const Term& t : f_terms_[k]) s += t.v * h[t.h] * w[t.w];
      out[k] += coef * s;
    }
  }

  // out_j += coef * sum_{s,t} f_s g_t e_stj for j in G (out is full-length).
  void project_g_add(std::span<const double> f, std::span<const double> g,
                     double coef, std::span<double> out) const {
    for (int j = n_f_; j < n_modes_; ++j) {
      double s = 0.0;
      for (const auto& p : g_terms_[j - n_f_]) {
        if (p.i == p.j)
          s += p.v * f[p.i] * g[p.i];
        else
          s += p.v * (f[p.i] * g[p.j] + f[p.j] * g[p.i]);
      }
      out[j] += coef * s;
    }
  }

private:
  int n_modes_, n_f_;
  std::vector<std::vector<Term>> f_terms_;
  std::vector<std::vector<TripleProductTensor::Pair>> g_terms_;
};

// Galerkin projection of the quadratic right-hand side over all of F u G.
// deriv is flat [state][mode], same layout as GalerkinState::c.
inline void galerkin_full_rhs(const QuadraticSystem& sys,
                              const TripleProductTensor& tensor,
                              const GalerkinState& state, std::span<double> deriv) {
  const int n = state.n_modes;
  if (tensor.size() != n || state.n_states != sys.n_states)
    throw std::invalid_argument("galerkin_full_rhs: shape mismatch");
  const int nz = sys.n_extended();
  std::fill(deriv.begin(), deriv.end(), 0.0);
  for (int m = 0; m < sys.n_states; ++m) {
    auto out = deriv.subspan(static_cast<std::size_t>(m) * n, n);
    if (sys.constant[m] != 0.0) out[0] += sys.constant[m];
    for (int a = 0; a < nz; ++a) {
      const double l = sys.linear[m][a];
      if (l == 0.0) continue;
      auto za = detail::extended_field(sys, state, a);
      for (int k = 0; k < n; ++k) out[k] += l * za[k];
    }
  }
  // Bilinear products are shared across equations.
  for (int a = 0; a < nz; ++a)
    for (int b = a; b < nz; ++b) {
      bool used = false;
      for (int m = 0; m < sys.n_states; ++m) used = used || sys.q(m, a, b) != 0.0;
      if (!used) continue;
      auto za = detail::extended_field(sys, state, a);
      auto zb = detail::extended_field(sys, state, b);
      const double sym = (a == b) ? 1.0 : 2.0;
      for (int m = 0; m < sys.n_states; ++m) {
        const double qv = sys.q(m, a, b);
        if (qv == 0.0) continue;
        auto out = deriv.subspan(static_cast<std::size_t>(m) * n, n);
        tensor.contract_add(za, zb, sym * qv, out);
      }
    }
}

// t-model right-hand side for an F-supported state:
//   du/dt = P R(u) + t P[ J_R(u) (I - P) R(u) ],
// with P the projection onto F. For the Kraichnan-Orszag system this
// reproduces the appendix reduced model term by term; for the linear decay
// problem it reproduces the closed-form reduced system. deriv is full-length
// with zero G part.
inline void t_model_rhs(const QuadraticSystem& sys, const TripleProductTensor& tensor,
                        const ContractedMemoryTensor& memory,
                        const GalerkinState& state, double t,
                        std::span<double> deriv) {
  const int n = state.n_modes;
  const int n_f = memory.n_resolved();
  if (memory.n_modes() != n)
    throw std::invalid_argument("t_model_rhs: memory tensor size mismatch");
  if (!state.supported_on(n_f))
    throw std::invalid_argument("t_model_rhs: state has nonzero unresolved support");

  // Full right-hand side of the F-supported state; its F part is the
  // Markovian term, its G part is the orthogonal residual w.
  thread_local std::vector<double> full;
  full.assign(deriv.size(), 0.0);
  galerkin_full_rhs(sys, tensor, state, full);

  std::fill(deriv.begin(), deriv.end(), 0.0);
  for (int m = 0; m < sys.n_states; ++m)
    for (int k = 0; k < n_f; ++k)
      deriv[static_cast<std::size_t>(m) * n + k] =
          full[static_cast<std::size_t>(m) * n + k];
  if (t == 0.0) return;

  // Memory term: only bilinear parts map the G-supported residual back into
  // F; linear parts of the Jacobian stay in G and project away.
  const int nz = sys.n_extended();
  auto residual = [&](int b) {  // b indexes a state variable
    return std::span<const double>(full).subspan(static_cast<std::size_t>(b) * n, n);
  };
  for (int m = 0; m < sys.n_states; ++m) {
    auto out = deriv.subspan(static_cast<std::size_t>(m) * n, n);
    for (int a = 0; a < nz; ++a)
      for (int b = 0; b < sys.n_states; ++b) {
        const double qv = sys.q(m, a, sys.n_params + b);
        if (qv == 0.0) continue;
        auto za = detail::extended_field(sys, state, a);
        memory.contract_gw_add(za, residual(b), 2.0 * t * qv, out);
      }
  }
}

enum class RhsModel { full, reduced };

// Sum of squared coefficients over the first range_modes modes, all variables.
inline double energy(const GalerkinState& state, int range_modes) {
  double e = 0.0;
  for (int m = 0; m < state.n_states; ++m) {
    auto v = state.var(m);
    for (int k = 0; k < range_modes; ++k) e += v[k] * v[k];
  }
  return e;
}

// dE/dt = 2 sum_{k in range} sum_m R_{m,k} u_{m,k}, computed from the selected
// right-hand side rather than by differencing the energy in time.
inline double energy_rate(const QuadraticSystem& sys, const TripleProductTensor& tensor,
                          const ContractedMemoryTensor& memory,
                          const GalerkinState& state, double t, RhsModel model,
                          int range_modes) {
  const int n = state.n_modes;
  std::vector<double> deriv(state.c.size(), 0.0);
  if (model == RhsModel::full)
    galerkin_full_rhs(sys, tensor, state, deriv);
  else
    t_model_rhs(sys, tensor, memory, state, t, deriv);
  double rate = 0.0;
  for (int m = 0; m < state.n_states; ++m) {
    auto v = state.var(m);
    for (int k = 0; k < range_modes; ++k)
      rate += deriv[static_cast<std::size_t>(m) * n + k] * v[k];
  }
  return 2.0 * rate;
}

// Memory contribution to the reduced energy rate: 2 sum_{k in F} (R' - P R) u,
// the flux of resolved energy into the unresolved modes. For the
// Kraichnan-Orszag system the Markovian part conserves energy, so this equals
// the whole reduced rate, -2t ||Gamma||^2.
inline double memory_energy_rate(const QuadraticSystem& sys,
                                 const TripleProductTensor& tensor,
                                 const ContractedMemoryTensor& memory,
                                 const GalerkinState& state, double t,
                                 int range_modes) {
  const int n = state.n_modes;
  std::vector<double> reduced(state.c.size(), 0.0), full(state.c.size(), 0.0);
  t_model_rhs(sys, tensor, memory, state, t, reduced);
  galerkin_full_rhs(sys, tensor, state, full);
  double rate = 0.0;
  for (int m = 0; m < state.n_states; ++m) {
    auto v = state.var(m);
    for (int k = 0; k < range_modes; ++k) {
      const std::size_t idx = static_cast<std::size_t>(m) * n + k;
      rate += (reduced[idx] - full[idx]) * v[k];
    }
  }
  return 2.0 * rate;
}

// s_i = |d|u'_{p_r e_i}|^2/dt| from the reduced right-hand side: the
// contribution of random dimension i to the resolved energy rate.
inline double directional_indicator(const QuadraticSystem& sys,
                                    const TripleProductTensor& tensor,
                                    const ContractedMemoryTensor& memory,
                                    const MultiIndexSet& set,
                                    const GalerkinState& state, double t, int dim) {
  const int k_i = set.directional_mode(dim);
  if (k_i < 0 || k_i >= set.resolved_size())
    throw std::invalid_argument("directional_indicator: mode p_r*e_i not in F");
  const int n = state.n_modes;
  std::vector<double> deriv(state.c.size(), 0.0);
  t_model_rhs(sys, tensor, memory, state, t, deriv);
  double s = 0.0;
  for (int m = 0; m < state.n_states; ++m)
    s += deriv[static_cast<std::size_t>(m) * n + k_i] * state.var(m)[k_i];
  return std::abs(2.0 * s);
}

}  // namespace mzr
