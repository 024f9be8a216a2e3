#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mzr/problems.hpp"
#include "mzr/rng.hpp"

// Seeded Monte Carlo reference statistics: i.i.d. uniform draws of the random
// inputs, one deterministic RK4 trajectory per sample, online central moments
// per (time, variable). Deterministic for a fixed seed.

namespace mzr {

struct McConfig {
  std::uint64_t n_samples = 100000;
  std::uint64_t seed = 12345;
  double dt = 1e-2;
  std::vector<double> sample_times;  // must be non-decreasing, start >= 0

  void validate() const {
    if (n_samples < 1) throw std::invalid_argument("McConfig: n_samples >= 1");
    if (dt <= 0.0) throw std::invalid_argument("McConfig: dt > 0");
    if (sample_times.empty()) throw std::invalid_argument("McConfig: no sample times");
    for (std::size_t i = 1; i < sample_times.size(); ++i)
      if (sample_times[i] < sample_times[i - 1])
        throw std::invalid_argument("McConfig: sample times must be non-decreasing");
  }
};

struct McResult {
  std::vector<double> times;
  // [variable][time]
  std::vector<std::vector<double>> mean, variance, stderr_mean, stderr_var;
  std::uint64_t n_samples = 0;
};

namespace detail {

// Online central moments up to order four (mean, M2..M4).
struct MomentAccumulator {
  double n = 0, mean = 0, m2 = 0, m3 = 0, m4 = 0;

  void add(double x) {
    const double n1 = n;
    n += 1;
    const double delta = x - mean;
    const double dn = delta / n;
    const double dn2 = dn * dn;
    const double t1 = delta * dn * n1;
    mean += dn;
    m4 += t1 * dn2 * (n * n - 3 * n + 3) + 6 * dn2 * m2 - 4 * dn * m3;
    m3 += t1 * dn * (n - 2) - 3 * dn * m2;
    m2 += t1;
  }

  double variance() const { return n > 1 ? m2 / (n - 1) : 0.0; }
  double se_mean() const { return n > 1 ? std::sqrt(variance() / n) : 0.0; }
  // Standard error of the unbiased variance from the fourth central moment.
  double se_variance() const {
    if (n < 4) return 0.0;
    const double s2 = variance();
    const double mu4 = m4 / n;
    const double v = (mu4 - (n - 3) / (n - 1) * s2 * s2) / n;
    return v > 0.0 ? std::sqrt(v) : 0.0;
  }
};

}  // namespace detail

inline McResult mc_stats(const ProblemSpec& spec, const McConfig& cfg) {
  cfg.validate();
  const int d = spec.dimension;
  const int nv = spec.n_states();
  const std::size_t nt = cfg.sample_times.size();

  std::vector<std::vector<detail::MomentAccumulator>> acc(
      nv, std::vector<detail::MomentAccumulator>(nt));

  std::vector<double> xi(d), y(nv), k1(nv), k2(nv), k3(nv), k4(nv), tmp(nv);
  for (std::uint64_t s = 0; s < cfg.n_samples; ++s) {
    SplitMix64 rng = SplitMix64::substream(cfg.seed, s);
    for (int m = 0; m < d; ++m) xi[m] = rng.uniform_sym();
    auto y0 = sample_initial(spec, xi);
    std::copy(y0.begin(), y0.end(), y.begin());
    double t = 0.0;
    std::size_t next_sample = 0;
    auto record_until = [&](double t_now) {
      while (next_sample < nt && cfg.sample_times[next_sample] <= t_now + 0.5 * cfg.dt) {
        for (int v = 0; v < nv; ++v) acc[v][next_sample].add(y[v]);
        ++next_sample;
      }
    };
    record_until(t);
    const double t_end = cfg.sample_times.back();
    while (next_sample < nt) {
      sample_rhs(spec, xi, y, k1);
      for (int v = 0; v < nv; ++v) tmp[v] = y[v] + 0.5 * cfg.dt * k1[v];
      sample_rhs(spec, xi, tmp, k2);
      for (int v = 0; v < nv; ++v) tmp[v] = y[v] + 0.5 * cfg.dt * k2[v];
      sample_rhs(spec, xi, tmp, k3);
      for (int v = 0; v < nv; ++v) tmp[v] = y[v] + cfg.dt * k3[v];
      sample_rhs(spec, xi, tmp, k4);
      for (int v = 0; v < nv; ++v) {
        y[v] += cfg.dt / 6.0 * (k1[v] + 2.0 * k2[v] + 2.0 * k3[v] + k4[v]);
        if (!std::isfinite(y[v]))
          throw std::runtime_error("mc_stats: integration failure at sample " +
                                   std::to_string(s) + ", t=" + std::to_string(t) +
                                   ", xi[0]=" + std::to_string(xi[0]));
      }
      t += cfg.dt;
      record_until(t);
      if (t > t_end + cfg.dt) break;
    }
  }

  McResult res;
  res.times = cfg.sample_times;
  res.n_samples = cfg.n_samples;
  res.mean.assign(nv, std::vector<double>(nt));
  res.variance.assign(nv, std::vector<double>(nt));
  res.stderr_mean.assign(nv, std::vector<double>(nt));
  res.stderr_var.assign(nv, std::vector<double>(nt));
  for (int v = 0; v < nv; ++v)
    for (std::size_t i = 0; i < nt; ++i) {
      res.mean[v][i] = acc[v][i].mean;
      res.variance[v][i] = acc[v][i].variance();
      res.stderr_mean[v][i] = acc[v][i].se_mean();
      res.stderr_var[v][i] = acc[v][i].se_variance();
    }
  return res;
}

}  // namespace mzr
