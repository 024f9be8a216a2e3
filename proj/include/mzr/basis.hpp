#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <stdexcept>
#include <unordered_map>
#include <vector>

// Orthonormal Legendre chaos on [-1,1]^d with uniform density 2^{-d}:
// multi-index bookkeeping, Gauss-Legendre quadrature and the triple-product
// tensor that drives every Galerkin contraction in this library.

namespace mzr {

struct MultiIndex {
  std::vector<int> degrees;

  int total() const {
    int s = 0;
    for (int d : degrees) s += d;
    return s;
  }
  int dimension() const { return static_cast<int>(degrees.size()); }

  bool operator==(const MultiIndex&) const = default;
};

// Graded total-degree index set. Indices are ordered by total degree first,
// then lexicographically (first dimension most significant, descending), so
// the resolved set F = { i : |i| <= p_r } is a contiguous prefix.
class MultiIndexSet {
public:
  MultiIndexSet(int dimension, int order, int resolved_order)
      : d_(dimension), p_(order), p_r_(resolved_order) {
    if (d_ < 1) throw std::invalid_argument("MultiIndexSet: dimension must be >= 1");
    if (p_r_ < 0 || p_r_ > p_)
      throw std::invalid_argument("MultiIndexSet: need 0 <= p_r <= p");
    std::vector<int> deg(d_, 0);
    for (int total = 0; total <= p_; ++total) enumerate(deg, 0, total);
    for (int i = 0; i < static_cast<int>(indices_.size()); ++i)
      position_[indices_[i].degrees] = i;
    n_resolved_ = 0;
    while (n_resolved_ < size() && indices_[n_resolved_].total() <= p_r_)
      ++n_resolved_;
  }

  int dimension() const { return d_; }
  int order() const { return p_; }
  int resolved_order() const { return p_r_; }
  int size() const { return static_cast<int>(indices_.size()); }
  int resolved_size() const { return n_resolved_; }

  const MultiIndex& operator[](int i) const { return indices_[i]; }

  // Position of a degree vector in the set ordering, -1 if absent.
  int find(const std::vector<int>& degrees) const {
    auto it = position_.find(degrees);
    return it == position_.end() ? -1 : it->second;
  }

  // Index with degree p_r in dimension dim (0-based) and zero elsewhere.
  int directional_mode(int dim) const {
    std::vector<int> deg(d_, 0);
    deg[dim] = p_r_;
    return find(deg);
  }

private:
  void enumerate(std::vector<int>& deg, int dim, int remaining) {
    if (dim == d_ - 1) {
      deg[dim] = remaining;
      indices_.push_back(MultiIndex{deg});
      return;
    }
    for (int k = remaining; k >= 0; --k) {
      deg[dim] = k;
      enumerate(deg, dim + 1, remaining - k);
    }
  }

  int d_, p_, p_r_;
  int n_resolved_ = 0;
  std::vector<MultiIndex> indices_;
  std::map<std::vector<int>, int> position_;
};

// Gauss-Legendre rule on [-1,1], weights normalized to the density 1/2
// (they sum to one per dimension). Tensorized across dimensions by callers.
class QuadratureRule {
public:
  explicit QuadratureRule(int points_per_dim) : n_(points_per_dim) {
    if (n_ < 1) throw std::invalid_argument("QuadratureRule: need >= 1 point");
    nodes_.resize(n_);
    weights_.resize(n_);
    for (int i = 0; i < n_; ++i) {
      // Newton iteration on P_n from the Chebyshev-like initial guess.
      double x = std::cos(M_PI * (i + 0.75) / (n_ + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        if (n_ == 1) p1 = x;
        for (int k = 2; k <= n_; ++k) {
          double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        double pn = (n_ == 1) ? x : p1;
        double pm = (n_ == 1) ? 1.0 : p0;
        dp = n_ * (x * pn - pm) / (x * x - 1.0);
        double dx = pn / dp;
        x -= dx;
        if (std::abs(dx) < 1e-15) break;
      }
      nodes_[i] = x;
      weights_[i] = 1.0 / ((1.0 - x * x) * dp * dp);  // 2/((1-x^2)P'^2) / 2
    }
    std::reverse(nodes_.begin(), nodes_.end());
    std::reverse(weights_.begin(), weights_.end());
  }

  int points_per_dim() const { return n_; }
  std::span<const double> nodes() const { return nodes_; }
  std::span<const double> weights() const { return weights_; }

  // Exact for 1D polynomials up to this degree.
  int exact_degree() const { return 2 * n_ - 1; }

private:
  int n_;
  std::vector<double> nodes_, weights_;
};

// Orthonormal 1D basis value: sqrt(2n+1) * P_n(x), three-term recurrence.
inline double legendre_orthonormal_1d(int n, double x) {
  double p0 = 1.0;
  if (n == 0) return 1.0;
  double p1 = x;
  for (int k = 2; k <= n; ++k) {
    double p2 = ((2 * k - 1) * x * p1 - (k - 1) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  return std::sqrt(2.0 * n + 1.0) * p1;
}

// Product basis value at a point of [-1,1]^d.
inline double legendre_eval(const MultiIndex& index, std::span<const double> point) {
  double v = 1.0;
  for (int m = 0; m < index.dimension(); ++m)
    v *= legendre_orthonormal_1d(index.degrees[m], point[m]);
  return v;
}

// Sparse symmetric tensor e_ijk = <Phi_i Phi_j Phi_k>. Canonical entries are
// stored for set positions i <= j <= k; lookups symmetrize. A per-k adjacency
// list (pairs i <= j) backs the bilinear contractions.
class TripleProductTensor {
public:
  struct Pair {
    int i, j;
    double v;
  };

  TripleProductTensor(const MultiIndexSet& set, const QuadratureRule& rule,
                      double drop_tolerance = 1e-14)
      : d_(set.dimension()), p_(set.order()), n_(set.size()) {
    if (rule.exact_degree() < 3 * p_)
      throw std::invalid_argument(
          "TripleProductTensor: quadrature rule cannot integrate degree 3*p_f");

    // 1D table by quadrature; the tensorized rule factorizes over dimensions.
    const int np = rule.points_per_dim();
    std::vector<std::vector<double>> phi(p_ + 1, std::vector<double>(np));
    for (int n = 0; n <= p_; ++n)
      for (int q = 0; q < np; ++q)
        phi[n][q] = legendre_orthonormal_1d(n, rule.nodes()[q]);
    std::vector<double> e1((p_ + 1) * (p_ + 1) * (p_ + 1), 0.0);
    auto at1 = [&](int a, int b, int c) -> double& {
      return e1[(a * (p_ + 1) + b) * (p_ + 1) + c];
    };
    for (int a = 0; a <= p_; ++a)
      for (int b = a; b <= p_; ++b)
        for (int c = b; c <= p_; ++c) {
          double s = 0.0;
          for (int q = 0; q < np; ++q)
            s += phi[a][q] * phi[b][q] * phi[c][q] * rule.weights()[q];
          at1(a, b, c) = at1(a, c, b) = at1(b, a, c) = at1(b, c, a) =
              at1(c, a, b) = at1(c, b, a) = s;
        }

    by_k_.resize(n_);
    for (int i = 0; i < n_; ++i)
      for (int j = i; j < n_; ++j)
        for (int k = j; k < n_; ++k) {
          double v = 1.0;
          for (int m = 0; m < d_; ++m) {
            v *= at1(set[i].degrees[m], set[j].degrees[m], set[k].degrees[m]);
            if (v == 0.0) break;
          }
          if (std::abs(v) <= drop_tolerance) continue;
          entries_[pack(i, j, k)] = v;
          // Distinct (pair, k) role assignments of the canonical triple.
          add_pair(k, i, j, v);
          if (k != j) add_pair(j, i, k, v);
          if (j != i && i != k) add_pair(i, j, k, v);
        }
  }

  int dimension() const { return d_; }
  int order() const { return p_; }
  int size() const { return n_; }
  std::size_t stored_entries() const { return entries_.size(); }

  double value(int i, int j, int k) const {
    int a = i, b = j, c = k;
    if (a > b) std::swap(a, b);
    if (b > c) std::swap(b, c);
    if (a > b) std::swap(a, b);
    auto it = entries_.find(pack(a, b, c));
    return it == entries_.end() ? 0.0 : it->second;
  }

  const std::vector<Pair>& pairs_for_mode(int k) const { return by_k_[k]; }

  // out_k += coef * sum_{i,j} f_i g_j e_ijk for k in [0, k_limit).
  void contract_add(std::span<const double> f, std::span<const double> g,
                    double coef, std::span<double> out,
                    int k_limit = -1) const {
    if (k_limit < 0) k_limit = n_;
    for (int k = 0; k < k_limit; ++k) {
      double s = 0.0;
      for (const Pair& t : by_k_[k]) {
        if (t.i == t.j)
          s += t.v * f[t.i] * g[t.i];
        else
          s += t.v * (f[t.i] * g[t.j] + f[t.j] * g[t.i]);
      }
      out[k] += coef * s;
    }
  }

private:
  static std::uint64_t pack(int i, int j, int k) {
    return (static_cast<std::uint64_t>(i) << 42) |
           (static_cast<std::uint64_t>(j) << 21) | static_cast<std::uint64_t>(k);
  }
  void add_pair(int k, int i, int j, double v) { by_k_[k].push_back({i, j, v}); }

  int d_, p_, n_;
  std::unordered_map<std::uint64_t, double> entries_;
  std::vector<std::vector<Pair>> by_k_;
};

inline int tensor_rule_points(int p_f) { return (3 * p_f + 1 + 1) / 2; }

// The tensor depends only on (d, p_f); the same immutable instance serves
// every element after the affine map to local coordinates.
inline std::shared_ptr<const TripleProductTensor> shared_tensor(int d, int p_f) {
  static std::mutex mtx;
  static std::map<std::pair<int, int>, std::shared_ptr<const TripleProductTensor>> cache;
  std::lock_guard<std::mutex> lock(mtx);
  auto key = std::make_pair(d, p_f);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  MultiIndexSet set(d, p_f, p_f);
  auto t = std::make_shared<const TripleProductTensor>(
      set, QuadratureRule(tensor_rule_points(p_f)));
  cache[key] = t;
  return t;
}

}  // namespace mzr
