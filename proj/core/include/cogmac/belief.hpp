#pragma once

#include <cstdint>
#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "cogmac/model.hpp"

namespace cogmac {

/// Pair of Markov transition probabilities toward the free state.
struct TransitionEstimate {
  double p01 = 0.5;
  double p11 = 0.5;

  friend bool operator==(const TransitionEstimate&, const TransitionEstimate&) = default;
};

/// One-step belief propagation for a channel that was not observed:
/// omega * p11 + (1 - omega) * p01.
double propagate_belief(double omega, const TransitionEstimate& p) noexcept;

/// Evidence available about a channel at the end of a slot.
enum class Evidence : std::uint8_t {
  sensed_free,  ///< detector reported free
  sensed_busy,  ///< detector reported busy
  no_ack,       ///< access channel, no acknowledgement received
};

/// Pr(channel free | evidence) given prior belief `omega`.
/// Throws IndeterminatePosterior when the evidence has zero probability.
double sensing_posterior(double omega, Evidence evidence, const SensingModel& sensing);

/// Per-slot sensing vector. `not_sensed` marks channels outside the sense set.
enum class Observation : std::uint8_t { busy = 0, free = 1, not_sensed = 2 };

struct SensingOutcome {
  std::vector<Observation> sensed;

  bool was_sensed(std::size_t i) const { return sensed.at(i) != Observation::not_sensed; }
  std::size_t sensed_count() const;
};

/// Belief bookkeeping of the secondary pair.
///  - shared_belief: the degraded vector both ends can compute
///  - tx_belief: the transmitter's own vector built from every observation
///  - shared_estimates: transition estimates last delivered to the receiver
struct BeliefState {
  std::vector<double> tx_belief;
  std::vector<double> shared_belief;
  std::vector<TransitionEstimate> shared_estimates;
  bool last_ack = true;
  std::uint64_t impossible_evidence = 0;

  static BeliefState initial(std::vector<double> belief, std::vector<TransitionEstimate> estimates);
  std::size_t size() const noexcept { return shared_belief.size(); }
};

/// End-of-slot belief update. `estimates` are the transmitter's fresh
/// estimates (carried in the data packet when the slot succeeds).
///
/// On an acknowledged slot that follows one or more failures the shared
/// vector is first reset to the transmitter's vector; the same packet also
/// refreshes `shared_estimates`. Posteriors whose evidence is impossible under
/// `sensing` fall back to unobserved propagation and bump
/// `impossible_evidence`.
BeliefState update_beliefs(const BeliefState& state, std::size_t access_channel,
                           const SensingOutcome& outcome, bool ack,
                           std::span<const TransitionEstimate> estimates, const SensingModel& sensing);

/// Shared-vector half of update_beliefs, run identically by both ends.
/// `resync_belief` is the transmitter's vector carried by a resync packet.
void update_shared_belief(BeliefState& state, std::size_t access_channel, const SensingOutcome& outcome,
                          bool ack, std::span<const TransitionEstimate> packet_estimates,
                          std::span<const double> resync_belief, const SensingModel& sensing);

/// Transmitter update for a slot with no access attempt (learning phase):
/// sensed channels take posterior-then-propagate, the rest propagate.
void update_tx_belief_unaccessed(BeliefState& state, const SensingOutcome& outcome,
                                 std::span<const TransitionEstimate> estimates, const SensingModel& sensing);

/// Transition counts over sensed states of a single channel.
struct TransitionCounts {
  std::uint64_t n00 = 0;
  std::uint64_t n01 = 0;
  std::uint64_t n10 = 0;
  std::uint64_t n11 = 0;
  std::uint64_t n1 = 0;              ///< slots sensed free
  std::uint64_t slots_observed = 0;  ///< slots sensed at all

  friend bool operator==(const TransitionCounts&, const TransitionCounts&) = default;
};

/// Increments exactly one of n00/n01/n10/n11.
TransitionCounts record_transition(TransitionCounts counts, ChannelState prev, ChannelState cur) noexcept;

/// Increments slots_observed and, for a free observation, n1.
TransitionCounts record_observation(TransitionCounts counts, ChannelState state) noexcept;

/// Posterior means under uniform priors: (n01+1)/(n00+n01+2), (n11+1)/(n10+n11+2).
TransitionEstimate estimate_transitions(const TransitionCounts& counts) noexcept;

enum class TransitionKind : std::uint8_t { p01, p11 };

/// Beta(n_x1 + 1, n_x0 + 1) posterior density of the chosen transition
/// probability evaluated at x.
double posterior_density(const TransitionCounts& counts, TransitionKind which, double x);

/// n1 / slots_observed; throws DomainError before any observation.
double iid_free_estimate(const TransitionCounts& counts);

/// Maintains TransitionCounts for one channel, optionally over a sliding
/// window of the most recent `window` transitions (0 = unbounded).
class TransitionCounter {
 public:
  explicit TransitionCounter(std::size_t window = 0) : window_(window) {}

  void observe_transition(ChannelState prev, ChannelState cur);
  void observe_state(ChannelState state);

  const TransitionCounts& counts() const noexcept { return counts_; }
  TransitionEstimate estimate() const noexcept { return estimate_transitions(counts_); }

 private:
  std::size_t window_;
  TransitionCounts counts_;
  std::deque<std::pair<ChannelState, ChannelState>> transitions_;
  std::deque<ChannelState> states_;
};

/// Expected per-slot throughput when both ends know every channel's state in
/// the previous slot (enumerates all 2^N joint states; N <= 20).
double genie_throughput_bound(std::span<const SlottedChannelParams> channels);

}  // namespace cogmac
