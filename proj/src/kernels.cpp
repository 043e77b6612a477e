#include "xvac/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <mutex>

#include "xvac/errors.hpp"

namespace xvac::kernels {

namespace {

void require_same(std::size_t a, std::size_t b, const char* where) {
  if (a != b) throw validation_error(std::string(where) + ": length mismatch");
}

// Sum and sum of squares of term(j), chunked for a thread-count independent result.
template <class Term>
std::pair<double, double> chunked_moments(std::size_t n, Term&& term) {
  const std::size_t chunks = (n + chunk - 1) / chunk;
  std::vector<double> s1(chunks, 0.0), s2(chunks, 0.0);
  const auto c = static_cast<long long>(chunks);
#pragma omp parallel for schedule(static)
  for (long long q = 0; q < c; ++q) {
    const std::size_t lo = static_cast<std::size_t>(q) * chunk;
    const std::size_t hi = std::min(n, lo + chunk);
    double a = 0.0, b = 0.0;
    for (std::size_t j = lo; j < hi; ++j) {
      const double x = term(j);
      a += x;
      b += x * x;
    }
    s1[static_cast<std::size_t>(q)] = a;
    s2[static_cast<std::size_t>(q)] = b;
  }
  double a = 0.0, b = 0.0;
  for (std::size_t q = 0; q < chunks; ++q) {
    a += s1[q];
    b += s2[q];
  }
  return {a, b};
}

sample_mean finish(std::size_t n, std::pair<double, double> sums) {
  if (n == 0) throw validation_error("mean of an empty sample");
  const auto m = static_cast<double>(n);
  const double mean = sums.first / m;
  sample_mean out{mean, 0.0};
  if (n > 1) {
    const double var = std::max(sums.second / m - mean * mean, 0.0) * m / (m - 1.0);
    out.std_error = std::sqrt(var / m);
  }
  return out;
}

}  // namespace

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body) {
  std::exception_ptr failure;
  std::mutex guard;
  const auto count = static_cast<long long>(n);
#pragma omp parallel for schedule(dynamic, 1)
  for (long long i = 0; i < count; ++i) {
    try {
      body(static_cast<std::size_t>(i));
    } catch (...) {
      std::lock_guard<std::mutex> lock(guard);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

void evaluate(const valuator& f, std::span<const double> x, std::span<double> out) {
  require_same(x.size(), out.size(), "evaluate");
  const auto n = static_cast<long long>(x.size());
#pragma omp parallel for schedule(static)
  for (long long j = 0; j < n; ++j) out[static_cast<std::size_t>(j)] = f(x[static_cast<std::size_t>(j)]);
}

void evaluate_branches(const valuator& first, const valuator& second, std::span<const unsigned char> use_second,
                       std::span<const double> x, std::span<double> out) {
  require_same(x.size(), out.size(), "evaluate_branches");
  if (use_second.empty()) return evaluate(first, x, out);
  require_same(x.size(), use_second.size(), "evaluate_branches");
  const auto n = static_cast<long long>(x.size());
#pragma omp parallel for schedule(static)
  for (long long jj = 0; jj < n; ++jj) {
    const auto j = static_cast<std::size_t>(jj);
    out[j] = use_second[j] ? second(x[j]) : first(x[j]);
  }
}

sample_mean discounted_positive_mean(std::span<const double> df, std::span<const double> v) {
  require_same(df.size(), v.size(), "discounted_positive_mean");
  return finish(v.size(), chunked_moments(v.size(), [&](std::size_t j) { return df[j] * std::max(v[j], 0.0); }));
}

sample_mean sensitivity_mean(std::span<const double> df, std::span<const double> df_i, std::span<const double> v,
                             std::span<const double> v_i, double dk) {
  require_same(df.size(), v.size(), "sensitivity_mean");
  require_same(df_i.size(), v.size(), "sensitivity_mean");
  require_same(v_i.size(), v.size(), "sensitivity_mean");
  if (dk == 0.0) throw validation_error("sensitivity_mean: zero shock size");
  return finish(v.size(), chunked_moments(v.size(), [&](std::size_t j) {
                  const double vp = std::max(v[j], 0.0);
                  const double vip = std::max(v_i[j], 0.0);
                  return (df_i[j] - df[j]) / dk * vp + df[j] * (vip - vp) / dk;
                }));
}

sample_mean mean_and_stderr(std::span<const double> x) {
  return finish(x.size(), chunked_moments(x.size(), [&](std::size_t j) { return x[j]; }));
}

double rms(std::span<const double> x) {
  if (x.empty()) throw validation_error("rms of an empty sample");
  return std::sqrt(chunked_moments(x.size(), [&](std::size_t j) { return x[j]; }).second /
                   static_cast<double>(x.size()));
}

double rms_difference(std::span<const double> x, std::span<const double> y) {
  require_same(x.size(), y.size(), "rms_difference");
  if (x.empty()) throw validation_error("rms of an empty sample");
  return std::sqrt(chunked_moments(x.size(), [&](std::size_t j) { return x[j] - y[j]; }).second /
                   static_cast<double>(x.size()));
}

}  // namespace xvac::kernels
