#include "xvac/interp.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "xvac/errors.hpp"

namespace xvac {

namespace {

constexpr double kEigenTolerance = 1e-14;

double binomial(std::size_t n, std::size_t k) {
  double r = 1.0;
  for (std::size_t i = 1; i <= k; ++i) r = r * static_cast<double>(n - k + i) / static_cast<double>(i);
  return r;
}

// Implicit QL on a symmetric tridiagonal matrix. diag is overwritten by the
// eigenvalues, first_row receives the first component of each normalized eigenvector.
void tridiagonal_eigen(std::vector<double>& diag, std::vector<double> off, std::vector<double>& first_row) {
  const std::size_t n = diag.size();
  std::vector<double> z(n * n, 0.0);
  for (std::size_t i = 0; i < n; ++i) z[i * n + i] = 1.0;
  off.push_back(0.0);

  for (std::size_t l = 0; l < n; ++l) {
    int iterations = 0;
    std::size_t m;
    do {
      for (m = l; m + 1 < n; ++m) {
        const double dd = std::abs(diag[m]) + std::abs(diag[m + 1]);
        if (std::abs(off[m]) <= kEigenTolerance * dd) break;
      }
      if (m != l) {
        if (++iterations > 60) throw solver_error("tridiagonal eigensolver did not converge", std::abs(off[l]));
        double g = (diag[l + 1] - diag[l]) / (2.0 * off[l]);
        double r = std::hypot(g, 1.0);
        g = diag[m] - diag[l] + off[l] / (g + std::copysign(r, g));
        double s = 1.0;
        double c = 1.0;
        double p = 0.0;
        std::size_t i = m;
        bool underflow = false;
        while (i-- > l) {
          double f = s * off[i];
          const double b = c * off[i];
          r = std::hypot(f, g);
          off[i + 1] = r;
          if (r == 0.0) {
            diag[i + 1] -= p;
            off[m] = 0.0;
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = diag[i + 1] - p;
          r = (diag[i] - g) * s + 2.0 * c * b;
          p = s * r;
          diag[i + 1] = g + p;
          g = c * r - b;
          for (std::size_t k = 0; k < n; ++k) {
            f = z[k * n + i + 1];
            z[k * n + i + 1] = s * z[k * n + i] + c * f;
            z[k * n + i] = c * z[k * n + i] - s * f;
          }
        }
        if (underflow) continue;
        diag[l] -= p;
        off[l] = g;
        off[m] = 0.0;
      }
    } while (m != l);
  }
  first_row.assign(z.begin(), z.begin() + static_cast<std::ptrdiff_t>(n));
}

// Probabilists' Hermite He_n and He_{n-1} at x.
std::pair<double, double> hermite_pair(std::size_t n, double x) {
  double prev = 1.0;
  double cur = x;
  if (n == 0) return {1.0, 0.0};
  for (std::size_t k = 1; k < n; ++k) {
    const double next = x * cur - static_cast<double>(k) * prev;
    prev = cur;
    cur = next;
  }
  return {cur, prev};
}

std::vector<long double> barycentric_weights_of(std::span<const double> x) {
  std::vector<long double> w(x.size(), 1.0L);
  for (std::size_t k = 0; k < x.size(); ++k)
    for (std::size_t l = 0; l < x.size(); ++l)
      if (l != k) w[k] /= (static_cast<long double>(x[k]) - x[l]);
  return w;
}

void require_increasing(std::span<const double> x, const char* where) {
  for (std::size_t k = 1; k < x.size(); ++k) {
    if (x[k] == x[k - 1]) throw validation_error(std::string(where) + ": duplicate interpolation node");
    if (!(x[k] > x[k - 1])) throw validation_error(std::string(where) + ": nodes must be ascending");
  }
}

}  // namespace

node_set gauss_from_recurrence(std::span<const double> alpha, std::span<const double> beta) {
  const std::size_t n = alpha.size();
  if (n == 0 || beta.size() != n) throw validation_error("gauss_from_recurrence: inconsistent coefficient lengths");
  std::vector<double> diag(alpha.begin(), alpha.end());
  std::vector<double> off(n > 0 ? n - 1 : 0);
  for (std::size_t k = 1; k < n; ++k) off[k - 1] = std::sqrt(beta[k]);
  std::vector<double> first;
  tridiagonal_eigen(diag, off, first);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return diag[a] < diag[b]; });
  node_set out;
  out.nodes.reserve(n);
  out.weights.reserve(n);
  for (std::size_t k : order) {
    out.nodes.push_back(diag[k]);
    out.weights.push_back(beta[0] * first[k] * first[k]);
  }
  out.distribution = "recurrence";
  return out;
}

node_set golub_welsch(std::span<const double> moments, std::size_t n) {
  if (n == 0) throw validation_error("golub_welsch: need at least one node");
  if (moments.size() < 2 * n) throw validation_error("golub_welsch: need moments m_0..m_{2N-1}");
  if (std::abs(moments[0] - 1.0) > 1e-12) throw validation_error("golub_welsch: m_0 must equal 1");
  const double mean = moments[1];
  if (n == 1) return node_set{{mean}, {1.0}, "moments"};

  // Work with the standardized variable; raw monomial moments lose digits quickly.
  const double variance = moments[2] - mean * mean;
  if (!(variance > 0.0))
    throw validation_error("golub_welsch: Hankel moment matrix not positive definite (leading minor of order 2)");
  const double scale = std::sqrt(variance);
  const std::size_t len = 2 * n;
  std::vector<double> z(len);
  for (std::size_t k = 0; k < len; ++k) {
    double c = 0.0;
    for (std::size_t j = 0; j <= k; ++j)
      c += binomial(k, j) * moments[j] * std::pow(-mean, static_cast<double>(k - j));
    z[k] = c / std::pow(scale, static_cast<double>(k));
  }

  // Chebyshev algorithm: recurrence coefficients from moments.
  std::vector<double> alpha(n), beta(n);
  std::vector<double> sigma_prev(len, 0.0);
  std::vector<double> sigma_cur(z);
  alpha[0] = z[1] / z[0];
  beta[0] = z[0];
  for (std::size_t k = 1; k < n; ++k) {
    std::vector<double> sigma_next(len, 0.0);
    for (std::size_t l = k; l < len - k; ++l)
      sigma_next[l] = sigma_cur[l + 1] - alpha[k - 1] * sigma_cur[l] - beta[k - 1] * sigma_prev[l];
    if (!(sigma_next[k] > 0.0)) {
      std::ostringstream msg;
      msg << "golub_welsch: Hankel moment matrix not positive definite (leading minor of order " << k + 1 << ")";
      throw validation_error(msg.str());
    }
    alpha[k] = sigma_next[k + 1] / sigma_next[k] - sigma_cur[k] / sigma_cur[k - 1];
    beta[k] = sigma_next[k] / sigma_cur[k - 1];
    sigma_prev = std::move(sigma_cur);
    sigma_cur = std::move(sigma_next);
  }

  node_set rule = gauss_from_recurrence(alpha, beta);
  for (double& x : rule.nodes) x = mean + scale * x;
  rule.distribution = "moments";
  return rule;
}

node_set hermite_nodes(double mu, double sigma, std::size_t n) {
  if (!(sigma > 0.0)) throw validation_error("hermite_nodes: sigma must be positive");
  if (n == 0) throw validation_error("hermite_nodes: need at least one node");
  std::vector<double> alpha(n, 0.0), beta(n);
  beta[0] = 1.0;
  for (std::size_t k = 1; k < n; ++k) beta[k] = static_cast<double>(k);
  node_set rule = gauss_from_recurrence(alpha, beta);

  // Newton polish on He_n, then the closed-form weights n! / (n^2 He_{n-1}(x)^2).
  double factorial = 1.0;
  for (std::size_t k = 2; k <= n; ++k) factorial *= static_cast<double>(k);
  for (std::size_t k = 0; k < n; ++k) {
    double x = rule.nodes[k];
    for (int it = 0; it < 3; ++it) {
      const auto [hn, hn1] = hermite_pair(n, x);
      if (hn1 == 0.0) break;
      x -= hn / (static_cast<double>(n) * hn1);
    }
    const double hn1 = hermite_pair(n, x).second;
    rule.nodes[k] = x;
    rule.weights[k] = n == 1 ? 1.0 : factorial / (static_cast<double>(n * n) * hn1 * hn1);
  }
  // Exact symmetry about zero.
  for (std::size_t k = 0; k < n / 2; ++k) {
    const double x = 0.5 * (rule.nodes[n - 1 - k] - rule.nodes[k]);
    const double w = 0.5 * (rule.weights[n - 1 - k] + rule.weights[k]);
    rule.nodes[k] = -x;
    rule.nodes[n - 1 - k] = x;
    rule.weights[k] = rule.weights[n - 1 - k] = w;
  }
  if (n % 2 == 1) rule.nodes[n / 2] = 0.0;
  const double total = std::accumulate(rule.weights.begin(), rule.weights.end(), 0.0);
  for (double& w : rule.weights) w /= total;
  for (double& x : rule.nodes) x = mu + sigma * x;
  rule.distribution = "normal";
  return rule;
}

std::vector<double> truncated_standard_normal_moments(double beta, std::size_t order) {
  std::vector<double> m(order + 1, 0.0);
  m[0] = 1.0;
  if (std::isinf(beta) && beta > 0.0) {
    for (std::size_t k = 2; k <= order; ++k) m[k] = static_cast<double>(k - 1) * m[k - 2];
    return m;
  }
  const double mass = 0.5 * std::erfc(-beta / std::numbers::sqrt2);
  if (mass < 1e-12) throw validation_error("truncated_normal_moments: degenerate truncation (mass below 1e-12)");
  const double density = std::exp(-0.5 * beta * beta) / std::sqrt(2.0 * std::numbers::pi);
  const double ratio = density / mass;
  double beta_power = 1.0;  // beta^{k-1}
  for (std::size_t k = 1; k <= order; ++k) {
    const double prev2 = k >= 2 ? m[k - 2] : 0.0;
    m[k] = static_cast<double>(k - 1) * prev2 - beta_power * ratio;
    beta_power *= beta;
  }
  return m;
}

std::vector<double> truncated_normal_moments(double mu, double sigma, double upper, std::size_t order) {
  if (!(sigma > 0.0)) throw validation_error("truncated_normal_moments: sigma must be positive");
  const double beta = std::isinf(upper) && upper > 0.0 ? upper : (upper - mu) / sigma;
  const auto z = truncated_standard_normal_moments(beta, order);
  std::vector<double> m(order + 1, 0.0);
  for (std::size_t k = 0; k <= order; ++k) {
    double acc = 0.0;
    for (std::size_t j = 0; j <= k; ++j)
      acc += binomial(k, j) * std::pow(mu, static_cast<double>(k - j)) * std::pow(sigma, static_cast<double>(j)) * z[j];
    m[k] = acc;
  }
  m[0] = 1.0;
  return m;
}

std::vector<double> normal_moments(double mu, double sigma, std::size_t order) {
  return truncated_normal_moments(mu, sigma, std::numeric_limits<double>::infinity(), order);
}

node_set chebyshev_nodes(double a, double b, std::size_t n, chebyshev_kind kind) {
  if (!(a < b)) throw validation_error("chebyshev_nodes: need a < b");
  if (n < 2) throw validation_error("chebyshev_nodes: need at least two nodes");
  node_set out;
  out.nodes.resize(n);
  const double nn = static_cast<double>(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double kk = static_cast<double>(k);
    // sine form: ascending and exactly symmetric
    const double c = kind == chebyshev_kind::lobatto
                         ? std::sin(std::numbers::pi * (2.0 * kk - (nn - 1.0)) / (2.0 * (nn - 1.0)))
                         : std::sin(std::numbers::pi * (2.0 * kk - (nn - 1.0)) / (2.0 * nn));
    out.nodes[k] = a + (b - a) * 0.5 * (c + 1.0);
  }
  out.nodes.front() = kind == chebyshev_kind::lobatto ? a : out.nodes.front();
  out.nodes.back() = kind == chebyshev_kind::lobatto ? b : out.nodes.back();
  out.distribution = kind == chebyshev_kind::lobatto ? "chebyshev_lobatto" : "chebyshev_roots";
  return out;
}

node_set nested_subset(const node_set& full, std::size_t d) {
  const std::size_t n = full.size();
  if (d < 1 || d > n)
    throw validation_error("nested_subset: need 1 <= d <= N (d=" + std::to_string(d) + ", N=" + std::to_string(n) + ")");
  if (d == n) return full;
  const std::size_t first = (n - d) / 2;
  node_set out;
  out.nodes.assign(full.nodes.begin() + static_cast<std::ptrdiff_t>(first),
                   full.nodes.begin() + static_cast<std::ptrdiff_t>(first + d));
  out.distribution = full.distribution + "/nested";
  return out;
}

polynomial_approx::polynomial_approx(node_set nodes, std::vector<double> values)
    : nodes_(std::move(nodes)), values_(std::move(values)) {
  if (nodes_.nodes.empty()) throw validation_error("polynomial_approx: no nodes");
  if (nodes_.nodes.size() != values_.size()) throw validation_error("polynomial_approx: node/value size mismatch");
  require_increasing(nodes_.nodes, "polynomial_approx");
  bary_wide_ = barycentric_weights_of(nodes_.nodes);
  bary_.assign(bary_wide_.begin(), bary_wide_.end());
}

long double polynomial_approx::evaluate_wide(double x) const {
  const auto& xs = nodes_.nodes;
  const std::size_t n = xs.size();
  if (n == 1) return values_[0];
  if (x < xs.front() || x > xs.back()) {
    // First (modified Lagrange) form, stable away from the nodes.
    long double ell = 1.0L;
    long double acc = 0.0L;
    for (std::size_t k = 0; k < n; ++k) {
      const long double dx = static_cast<long double>(x) - xs[k];
      ell *= dx;
      acc += bary_wide_[k] * values_[k] / dx;
    }
    return ell * acc;
  }
  long double num = 0.0L;
  long double den = 0.0L;
  for (std::size_t k = 0; k < n; ++k) {
    const long double dx = static_cast<long double>(x) - xs[k];
    if (dx == 0.0L) return values_[k];
    const long double t = bary_wide_[k] / dx;
    num += t * values_[k];
    den += t;
  }
  return num / den;
}

difference_approx::difference_approx(std::shared_ptr<const polynomial_approx> base, polynomial_approx correction)
    : base_(std::move(base)), correction_(std::move(correction)) {
  if (!base_) throw validation_error("difference_approx: base approximation is null");
}

polynomial_approx fit(const node_set& nodes, const valuator& exact, valuation_counter* counter) {
  require_increasing(nodes.nodes, "fit");
  std::vector<double> values(nodes.size());
  for (std::size_t k = 0; k < nodes.size(); ++k) values[k] = exact(nodes.nodes[k]);
  if (counter) counter->add(nodes.size());
  return polynomial_approx(nodes, std::move(values));
}

difference_approx fit_difference(std::shared_ptr<const polynomial_approx> base, const node_set& nodes_d,
                                 const valuator& shocked, valuation_counter* counter) {
  if (!base) throw validation_error("fit_difference: base approximation is null");
  if (nodes_d.size() == 0) throw validation_error("fit_difference: need at least one node");
  require_increasing(nodes_d.nodes, "fit_difference");
  std::vector<double> diff(nodes_d.size());
  for (std::size_t k = 0; k < nodes_d.size(); ++k)
    diff[k] = static_cast<double>(shocked(nodes_d.nodes[k]) - base->evaluate_wide(nodes_d.nodes[k]));
  if (counter) counter->add(nodes_d.size());
  node_set stripped{nodes_d.nodes, {}, nodes_d.distribution};
  return difference_approx(std::move(base), polynomial_approx(std::move(stripped), std::move(diff)));
}

double lagrange_evaluate(std::span<const double> nodes, std::span<const double> values, double x) {
  double acc = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) {
    double basis = 1.0;
    for (std::size_t l = 0; l < nodes.size(); ++l)
      if (l != k) basis *= (x - nodes[l]) / (nodes[k] - nodes[l]);
    acc += values[k] * basis;
  }
  return acc;
}

}  // namespace xvac
