#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace xvac {

/// Par swap quoted in the market; one per curve knot.
struct market_instrument {
  int index = 0;           // 1-based position in the instrument set
  double maturity = 0.0;   // year fraction from t0
  double quote = 0.0;      // par rate, decimal
  double frequency = 1.0;  // fixed-leg payments per year
};

/// Bump of one market quote before re-bootstrapping.
struct shock_spec {
  int index = 0;  // 1-based
  double shift = 1e-4;
};

enum class curve_interpolation { log_linear };

std::string to_string(curve_interpolation rule);

/// Zero-coupon bond curve P(t0, .) on [t0, T_n], knots at the instrument maturities.
///
/// Immutable after construction. `discount` refuses to extrapolate; the
/// `*_extended` accessors continue the last forward flat beyond T_n for
/// model components that need bond prices past the last quote.
class yield_curve {
 public:
  yield_curve(std::vector<double> knot_times, std::vector<double> knot_discounts,
              curve_interpolation rule, std::vector<market_instrument> instruments,
              std::optional<shock_spec> shock);

  double t0() const { return times_.front(); }
  double last_time() const { return times_.back(); }
  std::span<const double> knot_times() const { return times_; }
  std::span<const double> knot_discounts() const { return discounts_; }
  curve_interpolation interpolation() const { return rule_; }
  std::span<const market_instrument> instruments() const { return instruments_; }
  const std::optional<shock_spec>& shock() const { return shock_; }

  double discount(double s) const;
  double zero_yield(double s) const;
  /// Right-limit forward at knots.
  double instantaneous_forward(double t) const;

  double log_discount_extended(double s) const;
  double forward_extended(double t) const;

 private:
  std::size_t segment(double t) const;

  std::vector<double> times_;
  std::vector<double> discounts_;
  std::vector<double> log_discounts_;
  curve_interpolation rule_;
  std::vector<market_instrument> instruments_;
  std::optional<shock_spec> shock_;
};

/// Sequential Newton bootstrap of par swaps (tolerance 1e-12, 100 iterations).
yield_curve bootstrap(std::span<const market_instrument> instruments);

/// Bootstrap with quote `shock.index` moved by `shock.shift`.
yield_curve shocked_curve(std::span<const market_instrument> instruments, const shock_spec& shock);

double par_swap_rate(const yield_curve& curve, double start, double maturity, double frequency);

/// Equally spaced payment dates after `start` up to `maturity`.
std::vector<double> payment_schedule(double start, double maturity, double frequency);

}  // namespace xvac
