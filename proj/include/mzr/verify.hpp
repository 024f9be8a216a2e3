#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "mzr/problems.hpp"
#include "mzr/rng.hpp"
#include "mzr/system.hpp"

// Executable checks of the structural identities behind the refinement
// criterion: the reduced energy-rate theorem, full-model energy conservation
// and the triple-product tensor catalogue.

namespace mzr {

struct CheckReport {
  std::string name;
  double max_abs = 0.0;
  double max_rel = 0.0;
  double tolerance = 0.0;
  int trials = 0;
  bool pass = false;

  std::string line() const {
    char buf[256];
    std::snprintf(buf, sizeof(buf), "%-24s %-4s  max_abs=%.3e  max_rel=%.3e  tol=%.1e  trials=%d",
                  name.c_str(), pass ? "PASS" : "FAIL", max_abs, max_rel, tolerance,
                  trials);
    return buf;
  }
};

namespace detail {

inline GalerkinState random_resolved_state(const MultiIndexSet& set, int n_states,
                                           SplitMix64& rng) {
  GalerkinState s(n_states, set.size());
  for (int m = 0; m < n_states; ++m) {
    auto v = s.var(m);
    for (int k = 0; k < set.resolved_size(); ++k) v[k] = rng.uniform_sym();
  }
  return s;
}

}  // namespace detail

// Theorem check: for the Kraichnan-Orszag system and any F-supported state,
// the reduced energy rate equals -2t ||Gamma||^2 with Gamma assembled
// independently from its definition (the unresolved components of the three
// bilinear combinations), never through the t-model right-hand side.
inline CheckReport check_rate_identity(int p_r, int p_f, int trials,
                                       std::uint64_t seed, int dimension = 1) {
  CheckReport rep{"rate_identity"};
  rep.tolerance = 1e-11;
  rep.trials = trials;
  MultiIndexSet set(dimension, p_f, p_r);
  auto tensor = shared_tensor(dimension, p_f);
  ContractedMemoryTensor memory(*tensor, set);
  QuadraticSystem sys =
      build_problem(ProblemSpec{ProblemKind::kraichnan_orszag, dimension}, set,
                    QuadratureRule(tensor_rule_points(p_f)));
  const int n = set.size();
  const int n_f = set.resolved_size();

  double max_rel = 0.0, max_abs = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    SplitMix64 rng = SplitMix64::substream(seed, trial);
    GalerkinState state = detail::random_resolved_state(set, 3, rng);
    const double t = 10.0 * rng.uniform01();

    const double lhs =
        energy_rate(sys, *tensor, memory, state, t, RhsModel::reduced, n_f);

    // Gamma_1 = (I-P)B(y1,y3), Gamma_2 = -(I-P)B(y2,y3),
    // Gamma_3 = -(I-P)B(y1,y1) + (I-P)B(y2,y2).
    std::vector<double> g1(n, 0.0), g2(n, 0.0), g3(n, 0.0);
    tensor->contract_add(state.var(0), state.var(2), 1.0, g1);
    tensor->contract_add(state.var(1), state.var(2), -1.0, g2);
    tensor->contract_add(state.var(0), state.var(0), -1.0, g3);
    tensor->contract_add(state.var(1), state.var(1), 1.0, g3);
    double gamma2 = 0.0;
    for (int k = n_f; k < n; ++k)
      gamma2 += g1[k] * g1[k] + g2[k] * g2[k] + g3[k] * g3[k];
    const double rhs = -2.0 * t * gamma2;

    const double abs_err = std::abs(lhs - rhs);
    const double scale = std::max({std::abs(lhs), std::abs(rhs), 1e-30});
    max_abs = std::max(max_abs, abs_err);
    max_rel = std::max(max_rel, abs_err / scale);
  }
  rep.max_abs = max_abs;
  rep.max_rel = max_rel;
  rep.pass = max_rel <= rep.tolerance;
  return rep;
}

// The full Kraichnan-Orszag Galerkin system conserves the total energy over
// F u G: the trilinear symmetry makes the Markovian terms cancel pairwise.
inline CheckReport check_conservation(int p_f, int trials, std::uint64_t seed,
                                      int dimension = 1) {
  CheckReport rep{"conservation"};
  rep.tolerance = 1e-11;
  rep.trials = trials;
  MultiIndexSet set(dimension, p_f, p_f);
  auto tensor = shared_tensor(dimension, p_f);
  ContractedMemoryTensor memory(*tensor, set);
  QuadraticSystem sys =
      build_problem(ProblemSpec{ProblemKind::kraichnan_orszag, dimension}, set,
                    QuadratureRule(tensor_rule_points(p_f)));

  double max_abs = 0.0, max_rel = 0.0;
  for (int trial = 0; trial < trials; ++trial) {
    SplitMix64 rng = SplitMix64::substream(seed, trial);
    GalerkinState state(3, set.size());
    for (int m = 0; m < 3; ++m)
      for (auto& x : state.var(m)) x = rng.uniform_sym();
    const double rate =
        energy_rate(sys, *tensor, memory, state, 0.0, RhsModel::full, set.size());
    const double e = energy(state, set.size());
    max_abs = std::max(max_abs, std::abs(rate));
    max_rel = std::max(max_rel, std::abs(rate) / std::max(e, 1e-30));
  }
  rep.max_abs = max_abs;
  rep.max_rel = max_rel;
  rep.pass = max_rel <= rep.tolerance;
  return rep;
}

// Tensor catalogue: permutation symmetry, e_{i,j,0} = delta_ij, 1D parity
// zeros and the closed-form entry e_112 = 2 sqrt(5)/5 against an independent
// high-order quadrature oracle.
inline CheckReport check_tensor(int p_f, int dimension) {
  CheckReport rep{"tensor"};
  rep.tolerance = 1e-12;
  MultiIndexSet set(dimension, p_f, p_f);
  auto tensor = shared_tensor(dimension, p_f);
  const int n = set.size();

  double max_abs = 0.0;
  int trials = 0;
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      // orthonormality against mode 0
      const double expect = i == j ? 1.0 : 0.0;
      max_abs = std::max(max_abs, std::abs(tensor->value(i, j, 0) - expect));
      ++trials;
      for (int k = 0; k < n && dimension == 1; ++k) {
        if ((set[i].degrees[0] + set[j].degrees[0] + set[k].degrees[0]) % 2 == 1)
          max_abs = std::max(max_abs, std::abs(tensor->value(i, j, k)));
        // permutation symmetry through the symmetric lookup
        max_abs = std::max(
            max_abs, std::abs(tensor->value(i, j, k) - tensor->value(k, i, j)));
        max_abs = std::max(
            max_abs, std::abs(tensor->value(i, j, k) - tensor->value(j, k, i)));
      }
    }

  // Independent quadrature oracle for the catalogued low-order entries.
  if (dimension == 1 && p_f >= 2) {
    QuadratureRule oracle(40);
    auto quad = [&](int a, int b, int c) {
      double s = 0.0;
      for (int q = 0; q < oracle.points_per_dim(); ++q) {
        const double x = oracle.nodes()[q];
        s += legendre_orthonormal_1d(a, x) * legendre_orthonormal_1d(b, x) *
             legendre_orthonormal_1d(c, x) * oracle.weights()[q];
      }
      return s;
    };
    max_abs = std::max(max_abs, std::abs(tensor->value(0, 0, 0) - 1.0));
    max_abs = std::max(
        max_abs, std::abs(tensor->value(1, 1, 2) - 2.0 * std::sqrt(5.0) / 5.0));
    max_abs = std::max(max_abs, std::abs(tensor->value(1, 1, 2) - quad(1, 1, 2)));
    max_abs = std::max(max_abs, std::abs(tensor->value(2, 3, 3) - quad(2, 3, 3)));
  }

  rep.trials = trials;
  rep.max_abs = max_abs;
  rep.max_rel = max_abs;
  rep.pass = max_abs <= rep.tolerance;
  return rep;
}

inline std::vector<CheckReport> run_verify_battery(std::uint64_t seed = 12345,
                                                   int trials = 100) {
  std::vector<CheckReport> reports;
  for (auto [pr, pf] : {std::pair{1, 2}, {3, 7}, {5, 11}}) {
    auto r = check_rate_identity(pr, pf, trials, seed);
    r.name += "_pr" + std::to_string(pr) + "_pf" + std::to_string(pf);
    reports.push_back(r);
  }
  {
    auto r = check_rate_identity(2, 5, trials, seed, 2);
    r.name += "_2d_pr2_pf5";
    reports.push_back(r);
  }
  for (int pf : {4, 7}) {
    auto r = check_conservation(pf, trials, seed);
    r.name += "_pf" + std::to_string(pf);
    reports.push_back(r);
  }
  {
    auto r = check_conservation(4, trials, seed, 2);
    r.name += "_2d_pf4";
    reports.push_back(r);
  }
  for (auto [pf, d] : {std::pair{7, 1}, {5, 2}, {4, 3}}) {
    auto r = check_tensor(pf, d);
    r.name += "_d" + std::to_string(d) + "_pf" + std::to_string(pf);
    reports.push_back(r);
  }
  return reports;
}

}  // namespace mzr
