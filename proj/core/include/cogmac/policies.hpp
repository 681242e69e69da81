#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cogmac/belief.hpp"
#include "cogmac/model.hpp"
#include "cogmac/whittle.hpp"

namespace cogmac {

/// Channel to access and the set of channels to sense in a slot.
/// `sense_set` is sorted ascending and always contains `access_channel`.
struct PolicyDecision {
  std::size_t access_channel = 0;
  std::vector<std::size_t> sense_set;

  friend bool operator==(const PolicyDecision&, const PolicyDecision&) = default;
};

/// argmax_i belief_i * B_i, lowest index on ties.
std::size_t greedy_access(std::span<const double> shared_belief, std::span<const double> bandwidths);

/// Access channel argmax W_i B_i plus the L-1 other channels with the largest
/// W_i - omega_i (lowest index on ties).
PolicyDecision select_sense_set(std::span<const double> whittle, std::span<const double> shared_belief,
                                std::span<const double> bandwidths, std::size_t sense_count);

/// Greedy counterpart: access argmax omega_i B_i and sense the top-L channels
/// by omega_i B_i.
PolicyDecision select_greedy(std::span<const double> shared_belief, std::span<const double> bandwidths,
                             std::size_t sense_count);

/// W_{i*} + sum over the exploration set of (W_i - omega_i).
double whittle_slot_reward(const PolicyDecision& decision, std::span<const double> whittle,
                           std::span<const double> shared_belief);

struct UcbState {
  std::vector<std::uint64_t> successes;  ///< X_i
  std::vector<std::uint64_t> attempts;   ///< Y_i
  std::uint64_t slot = 1;                ///< j

  explicit UcbState(std::size_t channels = 0) : successes(channels, 0), attempts(channels, 0) {}
  void record(std::size_t channel, bool success);
};

/// X_i / Y_i + sqrt(2 ln j / Y_i). Throws DomainError when Y_i = 0 or j = 0.
double ucb_index(const UcbState& state, std::size_t channel);

/// argmax_i ucb_index * B_i after round-robin seeding of the first N slots.
std::size_t ucb_access(const UcbState& state, std::span<const double> bandwidths);

struct LearningPhase {
  std::uint64_t first_slot = 0;  ///< zero-based
  std::uint64_t length = 0;
  std::vector<std::size_t> channels;
};

/// ceil(N/L) consecutive phases of `period` slots; phase g senses channels
/// [g L, min(N, (g+1) L)).
std::vector<LearningPhase> learning_schedule(std::size_t channels, std::size_t sense_count, std::uint64_t period);

/// Static choice of the channel with the largest stationary free probability
/// times bandwidth.
std::size_t fixed_sequence_baseline(std::span<const SlottedChannelParams> channels);

}  // namespace cogmac
