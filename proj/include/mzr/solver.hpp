#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "mzr/mesh.hpp"
#include "mzr/problems.hpp"

// Time integration of all element systems with interleaved refinement:
// the end-to-end adaptive loop and the single-element global gPC baseline.

namespace mzr {

struct RefinementConfig {
  int p_r = 3;
  int p_f = 7;
  double tol1 = 1e-2;
  double tol2 = 0.1;
  double dt = 1e-2;
  double t_end = 10.0;
  double sample_dt = 0.1;
  IndicatorMode indicator_mode = IndicatorMode::full_state;
  MemoryTimeMode memory_time_mode = MemoryTimeMode::global_time;
  int refine_stride = 1;
  int max_elements = 10000;
  int threads = 1;

  void validate() const {
    if (tol1 <= 0.0) throw std::invalid_argument("RefinementConfig: TOL1 > 0");
    if (tol2 <= 0.0 || tol2 > 1.0)
      throw std::invalid_argument("RefinementConfig: 0 < TOL2 <= 1");
    if (dt <= 0.0) throw std::invalid_argument("RefinementConfig: dt > 0");
    if (p_r < 0 || p_f < p_r)
      throw std::invalid_argument("RefinementConfig: need 0 <= p_r <= p_f");
    const bool refining = std::isfinite(tol1);
    if (refining && p_r >= p_f)
      throw std::invalid_argument("RefinementConfig: p_r < p_f required when refining");
    if (refine_stride < 1)
      throw std::invalid_argument("RefinementConfig: refine_stride >= 1");
  }
};

struct Trajectory {
  std::vector<double> times;
  std::vector<std::vector<double>> mean;      // [variable][time]
  std::vector<std::vector<double>> variance;  // [variable][time]
  std::vector<int> n_elements;
  std::vector<double> total_energy;  // sum_k Pr_k * energy over F u G
  Mesh final_mesh;
};

// Classical fixed-step RK4 on a flat coefficient vector.
template <typename Rhs>
void rk4_step(const Rhs& rhs, std::vector<double>& y, double t, double dt,
              std::vector<double>& k1, std::vector<double>& k2,
              std::vector<double>& k3, std::vector<double>& k4,
              std::vector<double>& tmp) {
  const std::size_t n = y.size();
  rhs(y, t, k1);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k1[i];
  rhs(tmp, t + 0.5 * dt, k2);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + 0.5 * dt * k2[i];
  rhs(tmp, t + 0.5 * dt, k3);
  for (std::size_t i = 0; i < n; ++i) tmp[i] = y[i] + dt * k3[i];
  rhs(tmp, t + dt, k4);
  for (std::size_t i = 0; i < n; ++i)
    y[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

// Convenience overload allocating its own stage buffers.
template <typename Rhs>
void rk4_step(const Rhs& rhs, std::vector<double>& y, double t, double dt) {
  std::vector<double> k1(y.size()), k2(y.size()), k3(y.size()), k4(y.size()),
      tmp(y.size());
  rk4_step(rhs, y, t, dt, k1, k2, k3, k4, tmp);
}

namespace detail {

struct ElementWorkspace {
  std::vector<double> k1, k2, k3, k4, tmp;
  void resize(std::size_t n) {
    k1.resize(n);
    k2.resize(n);
    k3.resize(n);
    k4.resize(n);
    tmp.resize(n);
  }
};

inline void advance_element(Element& elem, const TripleProductTensor& tensor,
                            const ContractedMemoryTensor& memory,
                            const RefinementConfig& cfg, double t, double dt,
                            bool dual, ElementWorkspace& ws) {
  ws.resize(elem.state.c.size());
  GalerkinState scratch = elem.state;  // shape carrier for the rhs callbacks
  auto full_rhs = [&](const std::vector<double>& y, double, std::vector<double>& dy) {
    scratch.c = y;
    galerkin_full_rhs(elem.system, tensor, scratch, dy);
  };
  rk4_step(full_rhs, elem.state.c, t, dt, ws.k1, ws.k2, ws.k3, ws.k4, ws.tmp);
  elem.state.t = t + dt;
  if (!elem.state.finite())
    throw std::runtime_error("integration failure in element " +
                             std::to_string(elem.id) + " at t=" + std::to_string(t));
  if (dual) {
    const double t_off =
        cfg.memory_time_mode == MemoryTimeMode::global_time ? 0.0 : elem.birth_time;
    GalerkinState rscratch = elem.reduced;
    auto reduced_rhs = [&](const std::vector<double>& y, double ts,
                           std::vector<double>& dy) {
      rscratch.c = y;
      t_model_rhs(elem.system, tensor, memory, rscratch, ts - t_off, dy);
    };
    rk4_step(reduced_rhs, elem.reduced.c, t, dt, ws.k1, ws.k2, ws.k3, ws.k4, ws.tmp);
    elem.reduced.t = t + dt;
    if (!elem.reduced.finite())
      throw std::runtime_error("integration failure (reduced) in element " +
                               std::to_string(elem.id) + " at t=" + std::to_string(t));
  }
}

inline void record(Trajectory& traj, const Mesh& mesh, double t, int n_states,
                   int n_modes) {
  traj.times.push_back(t);
  for (int v = 0; v < n_states; ++v) {
    traj.mean[v].push_back(global_mean(mesh, v));
    traj.variance[v].push_back(global_variance(mesh, v));
  }
  traj.n_elements.push_back(static_cast<int>(mesh.elements.size()));
  double e = 0.0;
  for (const auto& elem : mesh.elements)
    e += elem.probability * energy(elem.state, n_modes);
  traj.total_energy.push_back(e);
}

}  // namespace detail

// The adaptive loop: advance every element's full Galerkin system, evaluate
// the reduced-model indicators, refine, record probability-weighted moments.
inline Trajectory run_adaptive(const ProblemSpec& spec, const RefinementConfig& cfg) {
  cfg.validate();
  const int d = spec.dimension;
  const int nv = spec.n_states();
  MultiIndexSet set(d, cfg.p_f, cfg.p_r);
  auto tensor = shared_tensor(d, cfg.p_f);
  ContractedMemoryTensor memory(*tensor, set);
  QuadratureRule split_rule(cfg.p_f + 1);
  const int n = set.size();
  const bool dual = cfg.indicator_mode == IndicatorMode::dual_evolution;

  Mesh mesh;
  mesh.dimension = d;
  Element root;
  root.id = 0;
  root.lo.assign(d, -1.0);
  root.hi.assign(d, 1.0);
  root.probability = 1.0;
  root.system = build_problem(spec, set, QuadratureRule(tensor_rule_points(cfg.p_f)));
  root.state = GalerkinState(nv, n);
  for (int v = 0; v < nv; ++v) {
    auto dst = root.state.var(v);
    std::copy(root.system.initial_coeffs[v].begin(),
              root.system.initial_coeffs[v].end(), dst.begin());
  }
  if (dual) {
    root.reduced = root.state;
    root.reduced.restrict_to(set.resolved_size());
  }
  mesh.elements.push_back(std::move(root));
  mesh.next_id = 1;

  RefineParams rp{cfg.tol1, cfg.tol2, cfg.indicator_mode, cfg.memory_time_mode};
  const long long n_steps = std::llround(cfg.t_end / cfg.dt);
  const long long sample_stride =
      std::max(1ll, std::llround(cfg.sample_dt / cfg.dt));

  Trajectory traj;
  traj.mean.assign(nv, {});
  traj.variance.assign(nv, {});
  detail::record(traj, mesh, 0.0, nv, n);

  std::vector<detail::ElementWorkspace> workspaces(std::max(1, cfg.threads));
  for (long long step = 0; step < n_steps; ++step) {
    const double t = step * cfg.dt;
    const int nelem = static_cast<int>(mesh.elements.size());
    const int nthreads =
        std::max(1, std::min<int>(cfg.threads, nelem / 4 > 0 ? nelem / 4 : 1));
    if (nthreads <= 1) {
      for (auto& elem : mesh.elements)
        detail::advance_element(elem, *tensor, memory, cfg, t, cfg.dt, dual,
                                workspaces[0]);
    } else {
      std::vector<std::thread> pool;
      std::exception_ptr err;
      std::mutex err_mtx;
      for (int w = 0; w < nthreads; ++w)
        pool.emplace_back([&, w]() {
          try {
            for (int e = w; e < nelem; e += nthreads)
              detail::advance_element(mesh.elements[e], *tensor, memory, cfg, t,
                                      cfg.dt, dual, workspaces[w]);
          } catch (...) {
            std::lock_guard<std::mutex> lock(err_mtx);
            if (!err) err = std::current_exception();
          }
        });
      for (auto& th : pool) th.join();
      if (err) std::rethrow_exception(err);
    }
    const double t_new = (step + 1) * cfg.dt;
    if ((step + 1) % cfg.refine_stride == 0 && std::isfinite(cfg.tol1)) {
      refine_step(mesh, t_new, rp, set, *tensor, memory, split_rule);
      if (static_cast<int>(mesh.elements.size()) > cfg.max_elements)
        throw std::runtime_error("refinement runaway: " +
                                 std::to_string(mesh.elements.size()) +
                                 " elements at t=" + std::to_string(t_new));
    }
    if ((step + 1) % sample_stride == 0 || step + 1 == n_steps)
      detail::record(traj, mesh, t_new, nv, n);
  }
  traj.final_mesh = std::move(mesh);
  return traj;
}

// Single-element global gPC run of order p; the non-adaptive baseline.
inline Trajectory run_global_gpc(const ProblemSpec& spec, int p, double t_end,
                                 double dt, double sample_dt = 0.1) {
  RefinementConfig cfg;
  cfg.p_r = p;
  cfg.p_f = p;
  cfg.tol1 = std::numeric_limits<double>::infinity();
  cfg.dt = dt;
  cfg.t_end = t_end;
  cfg.sample_dt = sample_dt;
  return run_adaptive(spec, cfg);
}

}  // namespace mzr
