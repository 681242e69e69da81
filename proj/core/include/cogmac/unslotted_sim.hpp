#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cogmac/model.hpp"
#include "cogmac/renewal.hpp"

namespace cogmac {

enum class ActivityKind : std::uint8_t { sense, handshake, transmit };

/// One interval of secondary-user activity on the timeline.
struct Activity {
  ActivityKind kind = ActivityKind::sense;
  std::size_t channel = 0;
  double start = 0.0;
  double end = 0.0;
};

/// Measured counterparts of the analytic per-channel fractions, all relative
/// to the measurement horizon except `interference` in single-channel mode
/// (busy share of the channel's access time).
struct ChannelEmpirical {
  double secondary_utilization = 0.0;
  double unexplored = 0.0;
  double interference = 0.0;
  double overhead = 0.0;
  double throughput = 0.0;
  double free_fraction = 0.0;     ///< true free time / horizon
  double discovered_free = 0.0;   ///< utilized and free / horizon
  double access_time = 0.0;       ///< single-channel: time in complete access blocks
  std::uint64_t blocks = 0;       ///< single-channel: complete access blocks
};

struct EmpiricalMetrics {
  std::vector<ChannelEmpirical> channels;
  double throughput = 0.0;  ///< free, unpaused transmission time / horizon, summed over channels
  std::uint64_t sensing_events = 0;
  // single-channel mode
  std::uint64_t visits = 0;              ///< sense + handshake steps
  std::uint64_t handshake_failures = 0;  ///< sensed free but no CTS came back
  std::uint64_t sync_failures = 0;       ///< steps where the two ends sat on different channels
  double mean_search_delay = 0.0;        ///< from search start to transmission start
  std::vector<Activity> activities;      ///< filled when requested
  std::vector<double> binned_throughput; ///< per-bin useful transmission time / bin length
};

struct UnslottedSimOptions {
  bool record_activities = false;
  /// Number of equal time bins for EmpiricalMetrics::binned_throughput (0 = none).
  std::size_t bins = 0;
  /// Single-channel mode: the transmitter conditions gamma on the handshake
  /// outcome (CTS = free, otherwise busy) instead of its raw sensing result,
  /// so both ends always hold identical channel views.
  bool handshake_view_update = false;
};

/// Multi-channel periodic sensing with sensing-dependent periods over
/// [0, horizon]. Sensing events share one antenna and are served FIFO by
/// scheduled time (ties by channel index); every transmission pauses while
/// any channel is being sensed. Throws ConfigError when the horizon is below
/// 100 times the longest period.
EmpiricalMetrics simulate_multi(std::span<const UnslottedChannelParams> params, std::span<const PeriodPair> periods,
                                const SensingModel& sensing, double sensing_time, double horizon, std::uint64_t seed,
                                const UnslottedSimOptions& options = {});

/// Single-channel hopping: sense channels in descending gamma order until one
/// is sensed free, handshake with RTS/CTS, access it for its period, repeat.
/// Transmitter and receiver keep separate channel views; the receiver learns
/// only from RTS arrival or timeout.
EmpiricalMetrics simulate_single(std::span<const UnslottedChannelParams> params,
                                 std::span<const double> access_periods, const SensingModel& sensing,
                                 double sensing_time, double rts_cts_duration, double horizon, std::uint64_t seed,
                                 const UnslottedSimOptions& options = {});

}  // namespace cogmac
