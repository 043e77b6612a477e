#include "xvac/curve.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "xvac/errors.hpp"

namespace xvac {

namespace {

constexpr double kBootstrapTolerance = 1e-12;
constexpr int kBootstrapMaxIterations = 100;
constexpr double kDomainSlack = 1e-12;

void validate_instruments(std::span<const market_instrument> instruments) {
  if (instruments.empty()) throw validation_error("bootstrap: instrument set is empty");
  double previous = 0.0;
  for (const auto& inst : instruments) {
    if (!(inst.maturity > 0.0))
      throw validation_error("bootstrap: instrument " + std::to_string(inst.index) +
                             " has non-positive maturity");
    if (!(inst.frequency > 0.0))
      throw validation_error("bootstrap: instrument " + std::to_string(inst.index) +
                             " has non-positive payment frequency");
    if (!(inst.maturity > previous))
      throw validation_error("bootstrap: maturities must be strictly increasing (instrument " +
                             std::to_string(inst.index) + ")");
    previous = inst.maturity;
  }
}

}  // namespace

std::string to_string(curve_interpolation rule) {
  switch (rule) {
    case curve_interpolation::log_linear:
      return "log_linear";
  }
  return "unknown";
}

std::vector<double> payment_schedule(double start, double maturity, double frequency) {
  if (!(maturity > start)) throw validation_error("payment_schedule: start must precede maturity");
  if (!(frequency > 0.0)) throw validation_error("payment_schedule: frequency must be positive");
  const auto periods = std::max<long long>(1, std::llround((maturity - start) * frequency));
  std::vector<double> dates(static_cast<std::size_t>(periods));
  const double step = (maturity - start) / static_cast<double>(periods);
  for (long long k = 1; k < periods; ++k) dates[static_cast<std::size_t>(k - 1)] = start + k * step;
  dates.back() = maturity;
  return dates;
}

yield_curve::yield_curve(std::vector<double> knot_times, std::vector<double> knot_discounts,
                         curve_interpolation rule, std::vector<market_instrument> instruments,
                         std::optional<shock_spec> shock)
    : times_(std::move(knot_times)),
      discounts_(std::move(knot_discounts)),
      rule_(rule),
      instruments_(std::move(instruments)),
      shock_(shock) {
  if (times_.size() < 2 || times_.size() != discounts_.size())
    throw validation_error("yield_curve: need at least two knots with matching discount factors");
  if (discounts_.front() != 1.0) throw validation_error("yield_curve: P(t0,t0) must equal 1");
  for (std::size_t k = 1; k < times_.size(); ++k)
    if (!(times_[k] > times_[k - 1])) throw validation_error("yield_curve: knots must increase");
  log_discounts_.reserve(discounts_.size());
  for (double p : discounts_) {
    if (!(p > 0.0) || !std::isfinite(p))
      throw validation_error("yield_curve: discount factors must be positive and finite");
    log_discounts_.push_back(std::log(p));
  }
}

std::size_t yield_curve::segment(double t) const {
  // Index j with times_[j] <= t < times_[j+1], clamped to the last segment.
  const auto it = std::upper_bound(times_.begin(), times_.end(), t);
  const auto j = static_cast<std::size_t>(std::distance(times_.begin(), it));
  if (j == 0) return 0;
  return std::min(j - 1, times_.size() - 2);
}

double yield_curve::log_discount_extended(double s) const {
  if (s < t0() - kDomainSlack) {
    std::ostringstream msg;
    msg << "yield_curve: time " << s << " precedes t0";
    throw domain_error(msg.str());
  }
  if (s <= t0()) return 0.0;
  const std::size_t j = segment(s);
  const double w = (s - times_[j]) / (times_[j + 1] - times_[j]);
  if (w == 1.0) return log_discounts_[j + 1];
  return log_discounts_[j] + w * (log_discounts_[j + 1] - log_discounts_[j]);
}

double yield_curve::forward_extended(double t) const {
  if (t < t0() - kDomainSlack) throw domain_error("yield_curve: forward requested before t0");
  const std::size_t j = segment(t);
  return -(log_discounts_[j + 1] - log_discounts_[j]) / (times_[j + 1] - times_[j]);
}

double yield_curve::discount(double s) const {
  if (s > last_time() + kDomainSlack || s < t0() - kDomainSlack) {
    std::ostringstream msg;
    msg << "yield_curve: discount at " << s << " outside [" << t0() << ", " << last_time() << "]";
    throw domain_error(msg.str());
  }
  const auto it = std::find(times_.begin(), times_.end(), s);
  if (it != times_.end()) return discounts_[static_cast<std::size_t>(it - times_.begin())];
  return std::exp(log_discount_extended(s));
}

double yield_curve::zero_yield(double s) const {
  const double p = discount(s);
  if (s - t0() <= 0.0) return instantaneous_forward(t0());
  return -std::log(p) / (s - t0());
}

double yield_curve::instantaneous_forward(double t) const {
  if (t > last_time() + kDomainSlack || t < t0() - kDomainSlack)
    throw domain_error("yield_curve: forward outside curve domain");
  return forward_extended(t);
}

yield_curve bootstrap(std::span<const market_instrument> instruments) {
  validate_instruments(instruments);
  std::vector<double> times{0.0};
  std::vector<double> log_p{0.0};
  double worst = 0.0;

  // Log-linear value between the last solved knot and the trial value x at T_i.
  auto log_discount_at = [&](double s, double t_new, double x) {
    if (s >= t_new) return x;
    const auto it = std::upper_bound(times.begin(), times.end(), s);
    const auto j = static_cast<std::size_t>(std::distance(times.begin(), it)) - 1;
    if (j + 1 < times.size()) {
      const double w = (s - times[j]) / (times[j + 1] - times[j]);
      return log_p[j] + w * (log_p[j + 1] - log_p[j]);
    }
    const double w = (s - times.back()) / (t_new - times.back());
    return log_p.back() + w * (x - log_p.back());
  };

  for (const auto& inst : instruments) {
    const auto dates = payment_schedule(0.0, inst.maturity, inst.frequency);
    const double t_prev = times.back();
    double x = log_p.back() - inst.quote * (inst.maturity - t_prev);
    bool converged = false;
    double residual = 0.0;
    for (int iter = 0; iter < kBootstrapMaxIterations; ++iter) {
      double annuity = 0.0;
      double d_annuity = 0.0;
      double previous = 0.0;
      for (double s : dates) {
        const double tau = s - previous;
        previous = s;
        const double p = std::exp(log_discount_at(s, inst.maturity, x));
        annuity += tau * p;
        if (s > t_prev) d_annuity += tau * p * (s - t_prev) / (inst.maturity - t_prev);
      }
      const double p_end = std::exp(x);
      const double value = 1.0 - p_end - inst.quote * annuity;
      residual = value / annuity;
      if (std::abs(residual) < kBootstrapTolerance) {
        converged = true;
        break;
      }
      const double slope = -p_end - inst.quote * d_annuity;
      x -= value / slope;
    }
    worst = std::max(worst, std::abs(residual));
    if (!converged) {
      std::ostringstream msg;
      msg << "bootstrap: Newton did not converge for instrument " << inst.index
          << " (residual " << residual << ")";
      throw solver_error(msg.str(), worst);
    }
    times.push_back(inst.maturity);
    log_p.push_back(x);
  }

  std::vector<double> discounts(log_p.size());
  std::transform(log_p.begin(), log_p.end(), discounts.begin(), [](double v) { return std::exp(v); });
  return yield_curve(std::move(times), std::move(discounts), curve_interpolation::log_linear,
                     {instruments.begin(), instruments.end()}, std::nullopt);
}

yield_curve shocked_curve(std::span<const market_instrument> instruments, const shock_spec& shock) {
  if (shock.index < 1 || static_cast<std::size_t>(shock.index) > instruments.size())
    throw validation_error("shocked_curve: shock index " + std::to_string(shock.index) +
                           " outside 1.." + std::to_string(instruments.size()));
  std::vector<market_instrument> bumped(instruments.begin(), instruments.end());
  bumped[static_cast<std::size_t>(shock.index - 1)].quote += shock.shift;
  const yield_curve base = bootstrap(bumped);
  std::vector<double> times(base.knot_times().begin(), base.knot_times().end());
  std::vector<double> dfs(base.knot_discounts().begin(), base.knot_discounts().end());
  return yield_curve(std::move(times), std::move(dfs), base.interpolation(), std::move(bumped), shock);
}

double par_swap_rate(const yield_curve& curve, double start, double maturity, double frequency) {
  if (!(start < maturity)) throw validation_error("par_swap_rate: start must precede maturity");
  const auto dates = payment_schedule(start, maturity, frequency);
  double annuity = 0.0;
  double previous = start;
  for (double s : dates) {
    annuity += (s - previous) * curve.discount(s);
    previous = s;
  }
  if (annuity == 0.0) throw arithmetic_error("par_swap_rate: zero annuity");
  return (curve.discount(start) - curve.discount(maturity)) / annuity;
}

}  // namespace xvac
