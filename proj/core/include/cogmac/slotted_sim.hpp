#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "cogmac/belief.hpp"
#include "cogmac/model.hpp"
#include "cogmac/policies.hpp"

namespace cogmac {

enum class SlottedPolicy : std::uint8_t {
  full_sensing_blind,     ///< L = N, greedy on shared belief, learned transitions
  full_sensing_informed,  ///< L = N, greedy on shared belief, true transitions
  whittle_blind,          ///< Whittle sense set, learned transitions
  whittle_informed,       ///< Whittle sense set, true transitions
  greedy_informed,        ///< top-L shared belief, true transitions
  ucb,                    ///< UCB access, senses only the accessed channel
  fixed_baseline,         ///< always the channel with the best stationary free probability
  iid_blind,              ///< L = N, channels assumed i.i.d., free probability n1 / j
};

std::string_view to_string(SlottedPolicy p) noexcept;
/// Throws ConfigError on an unknown name.
SlottedPolicy parse_slotted_policy(std::string_view name);
bool is_blind(SlottedPolicy p) noexcept;

struct SlottedConfig {
  std::vector<SlottedChannelParams> channels;
  SensingModel sensing;
  std::size_t sense_count = 1;  ///< L
  std::uint64_t horizon = 10000;
  SlottedPolicy policy = SlottedPolicy::full_sensing_informed;
  std::uint64_t learning_period = 0;  ///< LP, blind policies only
  std::uint64_t seed = 1;
  std::uint64_t block_count = 1;
  double whittle_discount = 0.9999;
  /// Count a transition only for the accessed channel when it was also
  /// accessed in the previous slot (instead of every channel sensed twice in a row).
  bool strict_transition_counting = false;
  std::size_t estimation_window = 0;  ///< sliding window in transitions, 0 = unbounded
  /// Attempt access on the sensed group during the learning phase.
  bool access_during_learning = false;
  bool record_log = false;
  unsigned threads = 0;  ///< Monte Carlo workers, 0 = hardware concurrency

  void validate() const;
  std::vector<double> bandwidths() const;
};

/// Content of a data packet. Delivered only in slots where the transmitter
/// accessed a truly free channel.
struct Packet {
  SensingOutcome phi;
  std::vector<TransitionEstimate> estimates;
  std::vector<double> resync_belief;  ///< non-empty on the first success after failures
};

/// Message-log entry: what the receiver could observe in one slot plus the
/// transmitter's channel for comparison.
struct SlotRecord {
  std::uint64_t slot = 0;
  bool learning = false;
  std::size_t tx_channel = 0;
  std::size_t rx_channel = 0;
  bool delivered = false;
  std::optional<Packet> packet;  ///< data packet, or the handshake at the end of learning
};

struct RunResult {
  std::vector<double> throughput_per_slot;  ///< cumulative average reward after each slot
  std::uint64_t total_successes = 0;
  std::uint64_t collisions = 0;       ///< accessed while truly busy
  std::uint64_t resync_events = 0;    ///< successes that followed at least one failure
  std::uint64_t sync_violations = 0;  ///< slots where receiver and transmitter channels differ
  std::uint64_t impossible_evidence = 0;
  std::vector<SlotRecord> log;

  double mean_throughput() const;
};

/// One run of the slotted protocol. Deterministic given (config, seed).
RunResult simulate_slotted(const SlottedConfig& config, std::uint64_t seed);

/// Channel sequence of a receiver rebuilt from `config` and the delivered
/// packets of `log` alone.
std::vector<std::size_t> replay_receiver(const SlottedConfig& config, const std::vector<SlotRecord>& log);

struct MonteCarloResult {
  std::vector<double> mean_trace;    ///< element-wise mean of the runs' cumulative traces
  std::vector<double> stderr_trace;  ///< standard error of mean_trace
  std::vector<double> run_means;     ///< each run's overall mean throughput, in run order
  double mean_throughput = 0.0;
  double standard_error = 0.0;
  std::uint64_t total_successes = 0;
  std::uint64_t collisions = 0;
  std::uint64_t resync_events = 0;
  std::uint64_t sync_violations = 0;
};

/// `block_count` runs with seeds derive_seed(config.seed, run). Reduction is
/// done in run order so the result does not depend on the thread count.
MonteCarloResult monte_carlo(const SlottedConfig& config);

/// Mean per-slot reward over slots [from, to) recovered from a cumulative
/// average trace.
double window_mean(const std::vector<double>& cumulative, std::size_t from, std::size_t to);

}  // namespace cogmac
