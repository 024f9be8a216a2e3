#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mzr/basis.hpp"
#include "mzr/system.hpp"

// Multi-element decomposition of [-1,1]^d: rectangular elements carrying
// local gPC coefficient vectors, exact re-projection on splits, global moment
// assembly and the refinement decision procedure.

namespace mzr {

struct Element {
  int id = 0;
  std::vector<double> lo, hi;  // half-open [lo_i, hi_i) within [-1,1]
  double probability = 1.0;
  GalerkinState state;
  QuadraticSystem system;  // parameters re-projected onto the local variable
  double birth_time = 0.0;
  GalerkinState reduced;  // co-evolved t-model state (dual-evolution mode)

  int dimension() const { return static_cast<int>(lo.size()); }

  static double measure_probability(std::span<const double> lo,
                                    std::span<const double> hi) {
    double p = 1.0;
    for (std::size_t i = 0; i < lo.size(); ++i) p *= (hi[i] - lo[i]) / 2.0;
    return p;
  }
};

struct RefineEvent {
  double time = 0.0;
  int parent = 0;
  std::vector<int> dims;      // 0-based split dimensions
  std::vector<int> children;  // empty for a degenerate trigger
  bool degenerate = false;
};

struct Mesh {
  int dimension = 0;
  std::vector<Element> elements;
  std::vector<RefineEvent> log;
  int next_id = 0;

  double total_probability() const {
    double p = 0.0;
    for (const auto& e : elements) p += e.probability;
    return p;
  }

  // Exact mirror pairing of element bounds under xi -> -xi in dimension dim.
  bool mirror_symmetric(int dim) const {
    for (const auto& e : elements) {
      bool found = false;
      for (const auto& f : elements) {
        bool match = f.lo[dim] == -e.hi[dim] && f.hi[dim] == -e.lo[dim];
        for (int m = 0; m < dimension && match; ++m)
          if (m != dim) match = f.lo[m] == e.lo[m] && f.hi[m] == e.hi[m];
        if (match) {
          found = true;
          break;
        }
      }
      if (!found) return false;
    }
    return true;
  }
};

namespace detail {

// Re-expand a polynomial given on the parent's local variable onto a child's
// local variable by quadrature. The composed affine map per dimension is
// zeta_parent = scale * zeta_child + shift.
inline std::vector<double> reproject(std::span<const double> coeffs,
                                     const MultiIndexSet& set,
                                     const QuadratureRule& rule,
                                     std::span<const double> scale,
                                     std::span<const double> shift) {
  const int d = set.dimension();
  const int n = set.size();
  const int np = rule.points_per_dim();
  std::vector<double> out(n, 0.0);
  std::vector<int> q(d, 0);
  std::vector<double> child_pt(d), parent_pt(d);
  while (true) {
    double w = 1.0;
    for (int m = 0; m < d; ++m) {
      child_pt[m] = rule.nodes()[q[m]];
      parent_pt[m] = scale[m] * child_pt[m] + shift[m];
      w *= rule.weights()[q[m]];
    }
    double u = 0.0;
    for (int i = 0; i < n; ++i)
      if (coeffs[i] != 0.0) u += coeffs[i] * legendre_eval(set[i], parent_pt);
    for (int k = 0; k < n; ++k) out[k] += w * u * legendre_eval(set[k], child_pt);
    int m = 0;
    while (m < d && ++q[m] == np) q[m++] = 0;
    if (m == d) break;
  }
  return out;
}

}  // namespace detail

// Halve elem along every dimension in dims, producing 2^|dims| children whose
// coefficient vectors (state and system parameters) are the exact re-expansion
// of the parent's degree-p_f polynomials. Requires rule with >= p_f+1 points
// per dimension so the re-projection quadrature is exact.
inline std::vector<Element> split_element(const Element& elem,
                                          const std::vector<int>& dims,
                                          const MultiIndexSet& set,
                                          const QuadratureRule& rule,
                                          int first_child_id) {
  if (dims.empty()) throw std::invalid_argument("split_element: empty dims");
  if (rule.points_per_dim() < set.order() + 1)
    throw std::invalid_argument("split_element: quadrature rule too coarse");
  const int d = elem.dimension();
  const int s = static_cast<int>(dims.size());

  std::vector<Element> children;
  for (int mask = 0; mask < (1 << s); ++mask) {
    Element child = elem;
    child.id = first_child_id++;
    // The child occupies half the parent's extent in each split dimension.
    // On local variables the parent coordinate is zeta_p = (zeta_c -+ 1)/2.
    std::vector<double> scale(d, 1.0), shift(d, 0.0);
    for (int b = 0; b < s; ++b) {
      const int m = dims[b];
      const double mid = 0.5 * (elem.lo[m] + elem.hi[m]);
      const bool upper = (mask >> b) & 1;
      if (upper) {
        child.lo[m] = mid;
        shift[m] = 0.5;
      } else {
        child.hi[m] = mid;
        shift[m] = -0.5;
      }
      scale[m] = 0.5;
    }
    child.probability = Element::measure_probability(child.lo, child.hi);
    for (int v = 0; v < elem.state.n_states; ++v) {
      auto re = detail::reproject(elem.state.var(v), set, rule, scale, shift);
      std::copy(re.begin(), re.end(), child.state.var(v).begin());
    }
    for (auto& pc : child.system.param_coeffs)
      pc = detail::reproject(pc, set, rule, scale, shift);
    for (auto& ic : child.system.initial_coeffs)
      ic = detail::reproject(ic, set, rule, scale, shift);
    if (child.reduced.n_modes > 0) {
      for (int v = 0; v < child.reduced.n_states; ++v) {
        auto re = detail::reproject(elem.reduced.var(v), set, rule, scale, shift);
        std::copy(re.begin(), re.end(), child.reduced.var(v).begin());
      }
      // A degree <= p_r polynomial stays degree <= p_r under the affine map;
      // scrub quadrature roundoff from the unresolved slots.
      child.reduced.restrict_to(set.resolved_size());
    }
    children.push_back(std::move(child));
  }
  return children;
}

// Probability-weighted assembly of global moments across elements.
// order 1: mean; order 2: second raw moment.
inline double global_moment(const Mesh& mesh, int variable, int order) {
  double s = 0.0;
  for (const auto& e : mesh.elements) {
    auto v = e.state.var(variable);
    if (order == 1) {
      s += e.probability * v[0];
    } else if (order == 2) {
      double m2 = 0.0;
      for (double x : v) m2 += x * x;
      s += e.probability * m2;
    } else {
      throw std::invalid_argument("global_moment: order must be 1 or 2");
    }
  }
  return s;
}

inline double global_mean(const Mesh& mesh, int variable) {
  return global_moment(mesh, variable, 1);
}

inline double global_variance(const Mesh& mesh, int variable) {
  const double mu = global_moment(mesh, variable, 1);
  return global_moment(mesh, variable, 2) - mu * mu;
}

enum class IndicatorMode { full_state, dual_evolution };
enum class MemoryTimeMode { global_time, element_local };

struct RefineParams {
  double tol1 = 1e-2;
  double tol2 = 0.1;
  IndicatorMode indicator_mode = IndicatorMode::full_state;
  MemoryTimeMode memory_time_mode = MemoryTimeMode::global_time;
};

// One refinement pass over the mesh at time t. Every element whose weighted
// memory energy rate reaches TOL1 is split along all dimensions whose
// directional indicator reaches TOL2 * max_j s_j. Elements triggering TOL1
// with a vanishing indicator vector are left alone and logged as degenerate.
//
// The trigger uses the memory part of the reduced rate. The memory part
// measures resolved-to-unresolved energy flux and vanishes as elements
// shrink; the Markovian part is the physical energy rate, does not shrink
// under refinement, and would refine forever on dissipative or growing
// systems. For energy-conserving systems the two coincide.
inline std::vector<RefineEvent> refine_step(Mesh& mesh, double t,
                                            const RefineParams& params,
                                            const MultiIndexSet& set,
                                            const TripleProductTensor& tensor,
                                            const ContractedMemoryTensor& memory,
                                            const QuadratureRule& split_rule) {
  const int d = mesh.dimension;
  const int n_f = set.resolved_size();
  std::vector<RefineEvent> report;
  std::vector<Element> next;
  next.reserve(mesh.elements.size());

  for (auto& elem : mesh.elements) {
    const double t_mem = params.memory_time_mode == MemoryTimeMode::global_time
                             ? t
                             : t - elem.birth_time;
    GalerkinState reduced_view;
    const GalerkinState* reduced = nullptr;
    if (params.indicator_mode == IndicatorMode::dual_evolution &&
        elem.reduced.n_modes > 0) {
      reduced = &elem.reduced;
    } else {
      reduced_view = elem.state;
      reduced_view.restrict_to(n_f);
      reduced = &reduced_view;
    }
    const double rate =
        memory_energy_rate(elem.system, tensor, memory, *reduced, t_mem, n_f);

    if (std::abs(rate) * elem.probability < params.tol1) {
      next.push_back(std::move(elem));
      continue;
    }
    std::vector<double> s(d);
    double s_max = 0.0;
    for (int i = 0; i < d; ++i) {
      s[i] = directional_indicator(elem.system, tensor, memory, set, *reduced, t_mem, i);
      s_max = std::max(s_max, s[i]);
    }
    RefineEvent ev;
    ev.time = t;
    ev.parent = elem.id;
    if (s_max <= 0.0) {
      ev.degenerate = true;
      report.push_back(ev);
      mesh.log.push_back(ev);
      next.push_back(std::move(elem));
      continue;
    }
    for (int i = 0; i < d; ++i)
      if (s[i] >= params.tol2 * s_max) ev.dims.push_back(i);
    auto children = split_element(elem, ev.dims, set, split_rule, mesh.next_id);
    mesh.next_id += static_cast<int>(children.size());
    for (auto& c : children) {
      c.birth_time = t;
      ev.children.push_back(c.id);
      next.push_back(std::move(c));
    }
    report.push_back(ev);
    mesh.log.push_back(ev);
  }
  mesh.elements = std::move(next);
  return report;
}

}  // namespace mzr
