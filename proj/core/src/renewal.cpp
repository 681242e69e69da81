#include "cogmac/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

#include "cogmac/errors.hpp"

namespace cogmac {

void PeriodPair::validate() const {
  if (!(t_free > 0.0) || !std::isfinite(t_free)) throw ConfigError("periods: t_free must be positive and finite");
  if (!(t_busy >= 0.0) || !std::isfinite(t_busy)) throw ConfigError("periods: t_busy must be non-negative and finite");
}

namespace {

// t + (exp(-s t) - 1) / s, accurate for small s t.
double ramp(double s, double t) {
  const double x = s * t;
  if (x < 1e-5) return t * x * (0.5 - x / 6.0);
  return t + std::expm1(-x) / s;
}

}  // namespace

double delta(const UnslottedChannelParams& params, ChannelState from, double t) {
  params.validate();
  if (!(t >= 0.0)) throw DomainError("delta: t must be non-negative");
  const double u = utilization(params);
  const double r = ramp(params.total_rate(), t);
  return from == ChannelState::busy ? (1.0 - u) * r : t - u * r;
}

Density Density::exponential(double rate) {
  if (!(rate > 0.0)) throw DomainError("Density::exponential: rate must be positive");
  return {[rate](double x) { return x < 0.0 ? 0.0 : rate * std::exp(-rate * x); }, 60.0 / rate};
}

namespace {

struct Moments {
  double mass;
  double mean;
};

// Composite Simpson over the support.
Moments moments(const Density& d) {
  if (!(d.support_end > 0.0) || !d.pdf) throw ConfigError("delta_numeric: density needs a pdf and a positive support");
  constexpr std::size_t n = 200000;
  const double h = d.support_end / static_cast<double>(n);
  double mass = 0.0;
  double mean = 0.0;
  for (std::size_t k = 0; k <= n; ++k) {
    const double x = static_cast<double>(k) * h;
    const double w = (k == 0 || k == n) ? 1.0 : (k % 2 == 1 ? 4.0 : 2.0);
    const double f = d.pdf(x);
    mass += w * f;
    mean += w * x * f;
  }
  return {mass * h / 3.0, mean * h / 3.0};
}

// One trapezoid solve on n intervals.
double delta_trapezoid(const Density& free_pdf, const Density& busy_pdf, const Moments& m1, const Moments& m0,
                       ChannelState from, double t, std::size_t n) {
  const double h = t / static_cast<double>(n);
  std::vector<double> f1(n + 1), f0(n + 1), surv1(n + 1), surv0(n + 1), first1(n + 1);
  for (std::size_t k = 0; k <= n; ++k) {
    const double x = static_cast<double>(k) * h;
    f1[k] = free_pdf.pdf(x);
    f0[k] = busy_pdf.pdf(x);
  }
  // survival functions and int_0^x s f1(s) ds by cumulative trapezoid
  surv1[0] = surv0[0] = 1.0;
  first1[0] = 0.0;
  for (std::size_t k = 1; k <= n; ++k) {
    surv1[k] = surv1[k - 1] - 0.5 * h * (f1[k - 1] + f1[k]);
    surv0[k] = surv0[k - 1] - 0.5 * h * (f0[k - 1] + f0[k]);
    const double x0 = static_cast<double>(k - 1) * h;
    const double x1 = static_cast<double>(k) * h;
    first1[k] = first1[k - 1] + 0.5 * h * (x0 * f1[k - 1] + x1 * f1[k]);
  }

  // Fresh-renewal functions: r1 starts with a new free period, r0 with a new busy one.
  std::vector<double> r1(n + 1, 0.0), r0(n + 1, 0.0);
  const double c1 = 0.5 * h * f1[0];
  const double c0 = 0.5 * h * f0[0];
  for (std::size_t k = 1; k <= n; ++k) {
    const double tk = static_cast<double>(k) * h;
    double conv1 = 0.0;
    double conv0 = 0.0;
    for (std::size_t m = 1; m < k; ++m) {
      conv1 += f1[m] * r0[k - m];
      conv0 += f0[m] * r1[k - m];
    }
    // endpoint m = k multiplies r(0) = 0
    const double a1 = tk * surv1[k] + first1[k] + h * conv1;
    const double a0 = h * conv0;
    r1[k] = (a1 + c1 * a0) / (1.0 - c1 * c0);
    r0[k] = a0 + c0 * r1[k];
  }

  // Equilibrium start: residual sojourn density (1 - F(x)) / E[T].
  if (from == ChannelState::free) {
    double tail = 0.0;  // int_0^t g1
    double acc = 0.0;
    for (std::size_t m = 0; m <= n; ++m) {
      const double w = (m == 0 || m == n) ? 0.5 : 1.0;
      const double x = static_cast<double>(m) * h;
      const double g = surv1[m] / m1.mean;
      tail += w * g;
      acc += w * g * (x + r0[n - m]);
    }
    return t * (1.0 - h * tail) + h * acc;
  }
  double acc = 0.0;
  for (std::size_t m = 0; m <= n; ++m) {
    const double w = (m == 0 || m == n) ? 0.5 : 1.0;
    acc += w * (surv0[m] / m0.mean) * r1[n - m];
  }
  return h * acc;
}

}  // namespace

double delta_numeric(const Density& free_pdf, const Density& busy_pdf, ChannelState from, double t,
                     std::size_t steps) {
  if (!(t >= 0.0) || !std::isfinite(t)) throw DomainError("delta_numeric: t must be finite and non-negative");
  if (steps < 100) throw DomainError("delta_numeric: grid too coarse (step above t/100)");
  const Moments m1 = moments(free_pdf);
  const Moments m0 = moments(busy_pdf);
  if (std::abs(m1.mass - 1.0) > 1e-6 || std::abs(m0.mass - 1.0) > 1e-6) {
    throw ConfigError("delta_numeric: densities must integrate to 1 within 1e-6");
  }
  if (t == 0.0) return 0.0;
  const std::size_t fine = steps + (steps % 2);
  const double a = delta_trapezoid(free_pdf, busy_pdf, m1, m0, from, t, fine);
  const double b = delta_trapezoid(free_pdf, busy_pdf, m1, m0, from, t, fine / 2);
  return (4.0 * a - b) / 3.0;
}

double steady_state_sense_free(const UnslottedChannelParams& params, const PeriodPair& periods) {
  periods.validate();
  const double p01 = transition_prob(params, ChannelState::busy, periods.t_busy);
  const double p11 = transition_prob(params, ChannelState::free, periods.t_free);
  const double den = 1.0 - p11 + p01;
  if (!(den > 0.0)) throw DomainError("steady_state_sense_free: degenerate sensing chain");
  return p01 / den;
}

double mean_sense_interval(const UnslottedChannelParams& params, const PeriodPair& periods,
                           const SensingModel& sensing) {
  const double pss = steady_state_sense_free(params, periods);
  const double tf = periods.t_free;
  const double tb = periods.t_busy;
  return pss * ((1.0 - sensing.p_fa) * tf + sensing.p_fa * tb) +
         (1.0 - pss) * (sensing.p_md * tf + (1.0 - sensing.p_md) * tb);
}

ChannelMetrics channel_metrics(const UnslottedChannelParams& params, const PeriodPair& periods,
                               const SensingModel& sensing, std::span<const double> all_mean_intervals,
                               double sensing_time, OverheadReading reading) {
  if (!(sensing_time >= 0.0)) throw DomainError("channel_metrics: sensing time must be non-negative");
  for (double mu : all_mean_intervals) {
    if (!(mu > 0.0)) throw DomainError("channel_metrics: mean sensing intervals must be positive");
  }
  ChannelMetrics m;
  m.p_ss = steady_state_sense_free(params, periods);
  m.mean_interval = mean_sense_interval(params, periods, sensing);
  if (!(m.mean_interval > 0.0)) throw DomainError("channel_metrics: mean sensing interval must be positive");
  const double pss = m.p_ss;
  const double mu = m.mean_interval;
  const double tf = periods.t_free;
  const double tb = periods.t_busy;
  const double pfa = sensing.p_fa;
  const double pmd = sensing.p_md;

  m.secondary_utilization = ((1.0 - pfa) * pss + pmd * (1.0 - pss)) * tf / mu;
  m.unexplored = (1.0 - pmd) * (1.0 - pss) * delta(params, ChannelState::busy, tb) / mu +
                 pfa * pss * delta(params, ChannelState::free, tb) / mu;
  m.interference = (1.0 - pfa) * pss * (tf - delta(params, ChannelState::free, tf)) / mu +
                   pmd * (1.0 - pss) * (tf - delta(params, ChannelState::busy, tf)) / mu;

  double rate = 0.0;
  if (reading == OverheadReading::cross_channel) {
    for (double mu_j : all_mean_intervals) rate += sensing_time / mu_j;
  } else {
    rate = static_cast<double>(all_mean_intervals.size()) * sensing_time / mu;
  }
  m.overhead = (m.secondary_utilization - m.interference) * rate;
  return m;
}

std::vector<ChannelMetrics> network_metrics(std::span<const UnslottedChannelParams> params,
                                            std::span<const PeriodPair> periods, const SensingModel& sensing,
                                            double sensing_time, OverheadReading reading) {
  if (params.size() != periods.size()) throw DimensionError("network_metrics: one period pair per channel");
  std::vector<double> mu(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) mu[i] = mean_sense_interval(params[i], periods[i], sensing);
  std::vector<ChannelMetrics> out;
  out.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    out.push_back(channel_metrics(params[i], periods[i], sensing, mu, sensing_time, reading));
  }
  return out;
}

double network_throughput(std::span<const UnslottedChannelParams> params, std::span<const PeriodPair> periods,
                          const SensingModel& sensing, double sensing_time, OverheadReading reading) {
  const auto metrics = network_metrics(params, periods, sensing, sensing_time, reading);
  double rate = 0.0;
  double alt = 0.0;
  for (std::size_t i = 0; i < metrics.size(); ++i) {
    const auto& m = metrics[i];
    rate += m.throughput();
    alt += (1.0 - utilization(params[i])) - m.unexplored - m.overhead;
  }
  if (sensing.perfect() && std::abs(rate - alt) > 1e-9) {
    throw std::logic_error("network_throughput: the two throughput expressions disagree by " +
                           std::to_string(rate - alt));
  }
  return rate;
}

}  // namespace cogmac
