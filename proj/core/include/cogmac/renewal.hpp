#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "cogmac/model.hpp"

namespace cogmac {

/// Sensing-dependent periods of one channel: wait t_free after sensing it
/// free, t_busy after sensing it busy. t_busy = 0 is the single-channel case.
struct PeriodPair {
  double t_free = 1.0;
  double t_busy = 1.0;

  void validate() const;
  friend bool operator==(const PeriodPair&, const PeriodPair&) = default;
};

/// Expected free time in [ts, ts + t] given the channel was in `from` at ts
/// (exponential sojourns, closed form).
double delta(const UnslottedChannelParams& params, ChannelState from, double t);

/// A sojourn-time density on [0, support_end]; mass beyond support_end is
/// treated as negligible.
struct Density {
  std::function<double(double)> pdf;
  double support_end = 0.0;

  static Density exponential(double rate);
};

/// Same quantity for arbitrary free/busy sojourn densities, by solving the
/// coupled renewal equations (fresh-renewal and equilibrium-start variants)
/// with the trapezoid rule on `steps` intervals over [0, t], followed by one
/// Richardson step against the half-resolution solution.
///
/// Throws ConfigError if a density does not integrate to 1 within 1e-6 and
/// DomainError if steps < 100 (step above t/100) or t < 0.
double delta_numeric(const Density& free_pdf, const Density& busy_pdf, ChannelState from, double t,
                     std::size_t steps = 4000);

/// Fraction of sensing events that find the channel free:
/// P01(TB) / (1 - P11(TF) + P01(TB)).
double steady_state_sense_free(const UnslottedChannelParams& params, const PeriodPair& periods);

/// Mean time between consecutive sensing events of one channel.
double mean_sense_interval(const UnslottedChannelParams& params, const PeriodPair& periods,
                           const SensingModel& sensing);

/// How the aggregate sensing overhead factor is read.
enum class OverheadReading : std::uint8_t {
  cross_channel,  ///< sum_j Ts / mu_j
  literal,        ///< N Ts / mu_i
};

struct ChannelMetrics {
  double secondary_utilization = 0.0;  ///< T^SU
  double unexplored = 0.0;             ///< T^U
  double interference = 0.0;           ///< T^I
  double overhead = 0.0;               ///< T^O
  double p_ss = 0.0;
  double mean_interval = 0.0;          ///< mu, time units

  double throughput() const noexcept { return secondary_utilization - interference - overhead; }
};

/// Steady-state fractions for one channel. `all_mean_intervals` holds mu_j of
/// every channel in the network (this one included). Throws DomainError if
/// any mu_j <= 0.
ChannelMetrics channel_metrics(const UnslottedChannelParams& params, const PeriodPair& periods,
                               const SensingModel& sensing, std::span<const double> all_mean_intervals,
                               double sensing_time, OverheadReading reading = OverheadReading::cross_channel);

/// Metrics for every channel of the network.
std::vector<ChannelMetrics> network_metrics(std::span<const UnslottedChannelParams> params,
                                            std::span<const PeriodPair> periods, const SensingModel& sensing,
                                            double sensing_time,
                                            OverheadReading reading = OverheadReading::cross_channel);

/// Sum over channels of T^SU - T^I - T^O. Under perfect sensing the
/// equivalent form sum of (1 - u) - T^U - T^O is evaluated too and the two
/// must agree within 1e-9 (std::logic_error otherwise).
double network_throughput(std::span<const UnslottedChannelParams> params, std::span<const PeriodPair> periods,
                          const SensingModel& sensing, double sensing_time,
                          OverheadReading reading = OverheadReading::cross_channel);

}  // namespace cogmac
