#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "xvac/interp.hpp"

namespace xvac {

struct sample_mean {
  double value = 0.0;
  double std_error = 0.0;
};

// Path-loop kernels. The `kernels` versions run under OpenMP and reduce in
// fixed-size chunks summed in chunk order, so results do not depend on the
// thread count. The `reference` versions are plain serial loops kept as the
// test oracle.
namespace kernels {

inline constexpr std::size_t chunk = 1024;

/// body(i) for i in [0, n) across threads; the first exception is rethrown.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& body);

/// out[j] = f(x[j])
void evaluate(const valuator& f, std::span<const double> x, std::span<double> out);

/// out[j] = (use_second[j] ? second : first)(x[j]); `use_second` may be empty.
void evaluate_branches(const valuator& first, const valuator& second, std::span<const unsigned char> use_second,
                       std::span<const double> x, std::span<double> out);

/// Mean and standard error of df[j] * max(v[j], 0).
sample_mean discounted_positive_mean(std::span<const double> df, std::span<const double> v);

/// Mean of (df_i - df)/dk * v+ + df * (v_i+ - v+)/dk.
sample_mean sensitivity_mean(std::span<const double> df, std::span<const double> df_i, std::span<const double> v,
                             std::span<const double> v_i, double dk);

sample_mean mean_and_stderr(std::span<const double> x);

/// sqrt(mean(x^2)), or sqrt(mean((x - y)^2)) for the two-argument form.
double rms(std::span<const double> x);
double rms_difference(std::span<const double> x, std::span<const double> y);

}  // namespace kernels

namespace reference {

void evaluate(const valuator& f, std::span<const double> x, std::span<double> out);
void evaluate_branches(const valuator& first, const valuator& second, std::span<const unsigned char> use_second,
                       std::span<const double> x, std::span<double> out);
sample_mean discounted_positive_mean(std::span<const double> df, std::span<const double> v);
sample_mean sensitivity_mean(std::span<const double> df, std::span<const double> df_i, std::span<const double> v,
                             std::span<const double> v_i, double dk);
sample_mean mean_and_stderr(std::span<const double> x);
double rms(std::span<const double> x);
double rms_difference(std::span<const double> x, std::span<const double> y);

}  // namespace reference

}  // namespace xvac
