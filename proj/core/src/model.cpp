#include "cogmac/model.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "cogmac/errors.hpp"

namespace cogmac {

namespace {

bool is_probability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

std::string_view to_string(ChannelState s) noexcept { return s == ChannelState::free ? "free" : "busy"; }

void SlottedChannelParams::validate() const {
  if (!is_probability(p01) || !is_probability(p11)) {
    throw ConfigError("slotted channel: transition probabilities must lie in [0, 1]");
  }
  if (!(bandwidth >= 0.0) || !std::isfinite(bandwidth)) {
    throw ConfigError("slotted channel: bandwidth must be a finite non-negative number");
  }
  if (p01 == 0.0 && p11 == 1.0) {
    throw ConfigError("slotted channel: p01 = 0 with p11 = 1 has no unique stationary distribution");
  }
}

void UnslottedChannelParams::validate() const {
  if (!(lambda_free > 0.0) || !(lambda_busy > 0.0) || !std::isfinite(lambda_free) ||
      !std::isfinite(lambda_busy)) {
    throw ConfigError("unslotted channel: rates must be finite and positive");
  }
}

void SensingModel::validate() const {
  if (!(p_fa >= 0.0 && p_fa < 1.0) || !(p_md >= 0.0 && p_md < 1.0)) {
    throw ConfigError("sensing: p_fa and p_md must lie in [0, 1)");
  }
  if (!(sensing_time >= 0.0) || !std::isfinite(sensing_time)) {
    throw ConfigError("sensing: sensing_time must be finite and non-negative");
  }
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw DomainError("normal_quantile: p must lie strictly inside (0, 1)");
  }
  // Acklam's coefficients.
  constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                          1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
  constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                          6.680131188771972e+01,  -1.328068155288572e+01};
  constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                          -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
  constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                          3.754408661907416e+00};
  constexpr double p_low = 0.02425;

  double x = 0.0;
  if (p < p_low) {
    const double q = std::sqrt(-2.0 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  } else if (p <= 1.0 - p_low) {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
  } else {
    const double q = std::sqrt(-2.0 * std::log1p(-p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
  }

  // Halley refinement.
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2.0 * std::numbers::pi) * std::exp(x * x / 2.0);
  return x - u / (1.0 + x * u / 2.0);
}

double inverse_q(double p) { return -normal_quantile(p); }

double db_to_linear(double db) noexcept { return std::pow(10.0, db / 10.0); }

double compute_sensing_time(double p_fa, double p_md, double snr, double sampling_freq) {
  if (!(p_fa > 0.0 && p_fa < 1.0) || !(p_md > 0.0 && p_md < 1.0)) {
    throw DomainError("compute_sensing_time: p_fa and p_md must lie strictly inside (0, 1)");
  }
  if (!(snr > 0.0) || !(sampling_freq > 0.0)) {
    throw DomainError("compute_sensing_time: snr and sampling_freq must be positive");
  }
  const double bracket = inverse_q(p_fa) - inverse_q(1.0 - p_md) * std::sqrt(1.0 + 2.0 * snr);
  return 2.0 / sampling_freq * bracket * bracket / (snr * snr);
}

double utilization(const UnslottedChannelParams& params) {
  return params.lambda_free / (params.lambda_free + params.lambda_busy);
}

double transition_prob(const UnslottedChannelParams& params, ChannelState from, double elapsed) {
  if (!(elapsed >= 0.0)) {
    throw DomainError("transition_prob: elapsed time must be non-negative");
  }
  const double u = utilization(params);
  const double decay = std::exp(-params.total_rate() * elapsed);
  return from == ChannelState::free ? (1.0 - u) + u * decay : (1.0 - u) * (1.0 - decay);
}

double steady_state_free_prob(const SlottedChannelParams& params) {
  const double denom = params.p01 + (1.0 - params.p11);
  if (!(denom > 0.0)) {
    throw DomainError("steady_state_free_prob: chain with p01 = 0 and p11 = 1 is not ergodic");
  }
  return params.p01 / denom;
}

double total_opportunity(std::span<const UnslottedChannelParams> channels) {
  double sum = 0.0;
  for (const auto& ch : channels) sum += 1.0 - utilization(ch);
  return sum;
}

}  // namespace cogmac
