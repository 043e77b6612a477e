#pragma once

#include <atomic>
#include <cstddef>
#include <functional>
#include <limits>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace xvac {

/// Interpolation nodes, ascending, with optional quadrature weights.
struct node_set {
  std::vector<double> nodes;
  std::vector<double> weights;  // empty when the nodes carry no quadrature rule
  std::string distribution;

  std::size_t size() const { return nodes.size(); }
};

/// Counts calls of the expensive valuator. Shared by reference between fits.
class valuation_counter {
 public:
  void add(std::size_t n) { count_.fetch_add(n, std::memory_order_relaxed); }
  std::size_t count() const { return count_.load(std::memory_order_relaxed); }

 private:
  std::atomic<std::size_t> count_{0};
};

using valuator = std::function<double(double)>;

/// Gauss rule of the distribution with raw moments m_0..m_{2N-1} (m_0 = 1).
node_set golub_welsch(std::span<const double> moments, std::size_t n);

/// Gauss rule from three-term recurrence coefficients (alpha_k, beta_k), beta_0 = total mass.
node_set gauss_from_recurrence(std::span<const double> alpha, std::span<const double> beta);

/// mu + sigma * zeros of He_N, weights normalized to one.
node_set hermite_nodes(double mu, double sigma, std::size_t n);

/// Raw moments m_0..m_order of X | X < upper with X ~ N(mu, sigma^2).
std::vector<double> truncated_normal_moments(double mu, double sigma, double upper, std::size_t order);

/// Moments of Z | Z < beta for standard normal Z; beta may be +inf.
std::vector<double> truncated_standard_normal_moments(double beta, std::size_t order);

/// Raw moments m_0..m_order of N(mu, sigma^2).
std::vector<double> normal_moments(double mu, double sigma, std::size_t order);

enum class chebyshev_kind { lobatto, roots };

node_set chebyshev_nodes(double a, double b, std::size_t n, chebyshev_kind kind = chebyshev_kind::lobatto);

/// Inner d of N nodes, dropping alternately from either end (upper end first).
node_set nested_subset(const node_set& full, std::size_t d);

/// Degree N-1 polynomial through (x_k, v_k), barycentric form.
class polynomial_approx {
 public:
  polynomial_approx() = default;
  polynomial_approx(node_set nodes, std::vector<double> values);

  const node_set& nodes() const { return nodes_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> barycentric_weights() const { return bary_; }
  std::size_t degree() const { return values_.empty() ? 0 : values_.size() - 1; }
  double lower() const { return nodes_.nodes.front(); }
  double upper() const { return nodes_.nodes.back(); }
  bool extrapolates(double x) const { return x < lower() || x > upper(); }

  double operator()(double x) const { return evaluate(x); }
  double evaluate(double x) const { return static_cast<double>(evaluate_wide(x)); }
  /// Same interpolant accumulated in extended precision; differences of nearby
  /// surrogates (shocked minus unshocked) are taken in this form.
  long double evaluate_wide(double x) const;

 private:
  node_set nodes_;
  std::vector<double> values_;
  std::vector<double> bary_;
  std::vector<long double> bary_wide_;
};

/// Shocked-market surrogate g + h where h interpolates (V_i - g) on d nodes.
class difference_approx {
 public:
  difference_approx(std::shared_ptr<const polynomial_approx> base, polynomial_approx correction);

  const polynomial_approx& base() const { return *base_; }
  const polynomial_approx& correction() const { return correction_; }
  double operator()(double x) const { return evaluate(x); }
  double evaluate(double x) const {
    return static_cast<double>(base_->evaluate_wide(x) + correction_.evaluate_wide(x));
  }

 private:
  std::shared_ptr<const polynomial_approx> base_;
  polynomial_approx correction_;
};

/// Calls `exact` once per node.
polynomial_approx fit(const node_set& nodes, const valuator& exact, valuation_counter* counter = nullptr);

/// Spends exactly d = nodes_d.size() calls of `shocked`.
difference_approx fit_difference(std::shared_ptr<const polynomial_approx> base, const node_set& nodes_d,
                                 const valuator& shocked, valuation_counter* counter = nullptr);

/// Plain Lagrange-form evaluation; O(N^2), kept as an independent check of the barycentric path.
double lagrange_evaluate(std::span<const double> nodes, std::span<const double> values, double x);

}  // namespace xvac
