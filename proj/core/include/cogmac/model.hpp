#pragma once

#include <cstdint>
#include <span>
#include <string_view>

namespace cogmac {

/// Occupancy of a primary channel. Numeric values follow the usual 0 = busy,
/// 1 = free convention so they can be used directly as indicators.
enum class ChannelState : std::uint8_t { busy = 0, free = 1 };

constexpr double indicator(ChannelState s) noexcept { return s == ChannelState::free ? 1.0 : 0.0; }
std::string_view to_string(ChannelState s) noexcept;

/// Two-state Markov (Gilbert-Elliott) channel used by the slotted protocols.
struct SlottedChannelParams {
  double p01 = 0.5;  ///< Pr(free at j+1 | busy at j)
  double p11 = 0.5;  ///< Pr(free at j+1 | free at j)
  double bandwidth = 1.0;

  /// Throws ConfigError on out-of-range fields or a chain that never mixes
  /// (p01 = 0 and p11 = 1).
  void validate() const;
};

/// Alternating renewal channel with exponential free and busy sojourns.
struct UnslottedChannelParams {
  double lambda_free = 1.0;  ///< rate of the free-period distribution, 1/E[T^1]
  double lambda_busy = 1.0;  ///< rate of the busy-period distribution, 1/E[T^0]

  void validate() const;
  double total_rate() const noexcept { return lambda_free + lambda_busy; }
  double mean_free() const noexcept { return 1.0 / lambda_free; }
  double mean_busy() const noexcept { return 1.0 / lambda_busy; }
};

/// Detector operating point. `snr` is a linear power ratio.
struct SensingModel {
  double p_fa = 0.0;
  double p_md = 0.0;
  double sampling_freq = 0.0;
  double snr = 0.0;
  double sensing_time = 0.0;

  bool perfect() const noexcept { return p_fa == 0.0 && p_md == 0.0; }
  void validate() const;

  static SensingModel perfect_sensing(double sensing_time = 0.0) {
    SensingModel m;
    m.sensing_time = sensing_time;
    return m;
  }
};

/// Standard normal quantile (inverse CDF). Acklam's rational approximation
/// refined with one Halley step against erfc; absolute error below 1e-12.
double normal_quantile(double p);

/// Inverse of the Gaussian tail function Q(x) = Pr(N(0,1) > x).
double inverse_q(double p);

double db_to_linear(double db) noexcept;

/// Minimum energy-detector sensing time meeting (p_fa, p_md) at the given
/// linear SNR and sampling frequency. Throws DomainError for probabilities
/// at 0 or 1 and non-positive snr / sampling_freq.
double compute_sensing_time(double p_fa, double p_md, double snr, double sampling_freq);

/// Long-run fraction of time the channel is busy.
double utilization(const UnslottedChannelParams& params);

/// Pr(free after `elapsed` | `from` at time 0) for the exponential model.
double transition_prob(const UnslottedChannelParams& params, ChannelState from, double elapsed);

/// Stationary probability of the free state. Throws DomainError when the
/// chain has no unique stationary distribution.
double steady_state_free_prob(const SlottedChannelParams& params);

/// Sum over channels of the long-run free fraction 1 - u_i.
double total_opportunity(std::span<const UnslottedChannelParams> channels);

}  // namespace cogmac
