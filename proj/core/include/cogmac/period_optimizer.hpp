#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "cogmac/model.hpp"
#include "cogmac/renewal.hpp"

namespace cogmac {

/// Per-channel upper bounds on the interference ratio T^I.
struct InterferenceConstraint {
  std::vector<double> per_channel_max;

  /// factor * u_i for every channel.
  static InterferenceConstraint fraction_of_utilization(std::span<const UnslottedChannelParams> params,
                                                        double factor);
};

struct OptimizerOptions {
  std::size_t starts = 8;          ///< start 0 is grid-seeded, the rest random
  std::size_t grid_points = 40;    ///< per axis, log-spaced
  double improvement_tol = 1e-8;   ///< stop when a full sweep gains less than this
  double feasibility_tol = 1e-6;
  std::size_t max_sweeps = 200;
  double min_period = 0.0;         ///< 0 selects max(sensing_time, 1e-6)
  double max_period_scale = 1e4;   ///< upper bound = scale * max_i max(1/lambda)
  std::uint64_t seed = 0x5eed;
  OverheadReading reading = OverheadReading::cross_channel;
};

struct OptimizationResult {
  std::vector<PeriodPair> periods;
  double objective = 0.0;                ///< sum of T^SU - T^I - T^O
  std::vector<double> constraint_slack;  ///< T^Imax_i - T^I_i
  std::size_t iterations = 0;            ///< sweeps of the winning start
  bool converged = false;
  std::size_t best_start = 0;
};

/// Maximizes the network throughput over (T^F_i, T^B_i) subject to
/// T^I_i <= T^Imax_i by block-coordinate ascent with multi-starts.
/// Throws InfeasibleError when some channel admits no feasible period pair
/// within the bounds and ConvergenceError when no start converges.
OptimizationResult optimize_two_periods(std::span<const UnslottedChannelParams> params, const SensingModel& sensing,
                                        double sensing_time, const InterferenceConstraint& constraint,
                                        const OptimizerOptions& options = {});

/// Same problem restricted to T^F_i = T^B_i.
OptimizationResult optimize_single_period(std::span<const UnslottedChannelParams> params,
                                          const SensingModel& sensing, double sensing_time,
                                          const InterferenceConstraint& constraint,
                                          const OptimizerOptions& options = {});

/// Interference ratio of a single-channel access block of length t_free.
double single_channel_interference(const UnslottedChannelParams& params, double t_free,
                                   const SensingModel& sensing);

/// Largest access period meeting single_channel_interference = t_imax, by
/// bisection (residual below 1e-9). Throws InfeasibleError when no finite
/// root exists below `max_period`.
double solve_access_period(const UnslottedChannelParams& params, const SensingModel& sensing, double t_imax,
                           double max_period = std::numeric_limits<double>::infinity());

/// Channels sorted by gamma_i = P^{s_i 1}(now - t_i) / Ts descending, where
/// s_i is the last sensed state; ties by lowest index.
std::vector<std::size_t> channel_priority_order(std::span<const ChannelState> last_states,
                                                std::span<const double> last_sense_times, double now,
                                                std::span<const UnslottedChannelParams> params,
                                                double sensing_time);

}  // namespace cogmac
