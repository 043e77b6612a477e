#include <algorithm>
#include <cmath>

#include "xvac/errors.hpp"
#include "xvac/kernels.hpp"

namespace xvac::reference {

namespace {

sample_mean summarize(const std::vector<double>& x) {
  if (x.empty()) throw validation_error("mean of an empty sample");
  const auto n = static_cast<double>(x.size());
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= n;
  double ss = 0.0;
  for (double v : x) ss += (v - mean) * (v - mean);
  return {mean, x.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0};
}

}  // namespace

void evaluate(const valuator& f, std::span<const double> x, std::span<double> out) {
  if (x.size() != out.size()) throw validation_error("evaluate: length mismatch");
  for (std::size_t j = 0; j < x.size(); ++j) out[j] = f(x[j]);
}

void evaluate_branches(const valuator& first, const valuator& second, std::span<const unsigned char> use_second,
                       std::span<const double> x, std::span<double> out) {
  if (x.size() != out.size() || (!use_second.empty() && use_second.size() != x.size()))
    throw validation_error("evaluate_branches: length mismatch");
  for (std::size_t j = 0; j < x.size(); ++j)
    out[j] = (!use_second.empty() && use_second[j]) ? second(x[j]) : first(x[j]);
}

sample_mean discounted_positive_mean(std::span<const double> df, std::span<const double> v) {
  if (df.size() != v.size()) throw validation_error("discounted_positive_mean: length mismatch");
  std::vector<double> terms(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) terms[j] = df[j] * std::max(v[j], 0.0);
  return summarize(terms);
}

sample_mean sensitivity_mean(std::span<const double> df, std::span<const double> df_i, std::span<const double> v,
                             std::span<const double> v_i, double dk) {
  if (df.size() != v.size() || df_i.size() != v.size() || v_i.size() != v.size())
    throw validation_error("sensitivity_mean: length mismatch");
  if (dk == 0.0) throw validation_error("sensitivity_mean: zero shock size");
  std::vector<double> terms(v.size());
  for (std::size_t j = 0; j < v.size(); ++j) {
    const double vp = std::max(v[j], 0.0);
    terms[j] = (df_i[j] - df[j]) / dk * vp + df[j] * (std::max(v_i[j], 0.0) - vp) / dk;
  }
  return summarize(terms);
}

sample_mean mean_and_stderr(std::span<const double> x) { return summarize({x.begin(), x.end()}); }

double rms(std::span<const double> x) {
  if (x.empty()) throw validation_error("rms of an empty sample");
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s / static_cast<double>(x.size()));
}

double rms_difference(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size()) throw validation_error("rms_difference: length mismatch");
  if (x.empty()) throw validation_error("rms of an empty sample");
  double s = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j) s += (x[j] - y[j]) * (x[j] - y[j]);
  return std::sqrt(s / static_cast<double>(x.size()));
}

}  // namespace xvac::reference
