#include "cogmac/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cogmac/errors.hpp"

namespace cogmac {

namespace {

std::size_t argmax_weighted(std::span<const double> values, std::span<const double> weights) {
  if (values.empty()) throw DomainError("argmax: empty input");
  if (values.size() != weights.size()) throw DimensionError("argmax: values and weights differ in length");
  std::size_t best = 0;
  double best_value = values[0] * weights[0];
  for (std::size_t i = 1; i < values.size(); ++i) {
    const double v = values[i] * weights[i];
    if (v > best_value) {
      best = i;
      best_value = v;
    }
  }
  return best;
}

// Indices other than `skip`, ordered by descending key then ascending index.
std::vector<std::size_t> ranked_others(std::span<const double> key, std::size_t skip) {
  std::vector<std::size_t> order;
  order.reserve(key.size());
  for (std::size_t i = 0; i < key.size(); ++i) {
    if (i != skip) order.push_back(i);
  }
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return key[a] > key[b]; });
  return order;
}

PolicyDecision finish(std::size_t access, std::vector<std::size_t> ranked, std::size_t sense_count) {
  PolicyDecision d;
  d.access_channel = access;
  d.sense_set.push_back(access);
  for (std::size_t k = 0; k + 1 < sense_count && k < ranked.size(); ++k) d.sense_set.push_back(ranked[k]);
  std::sort(d.sense_set.begin(), d.sense_set.end());
  return d;
}

void check_sense_count(std::size_t sense_count, std::size_t n) {
  if (sense_count < 1 || sense_count > n) throw DomainError("sense count must lie in [1, N]");
}

}  // namespace

std::size_t greedy_access(std::span<const double> shared_belief, std::span<const double> bandwidths) {
  return argmax_weighted(shared_belief, bandwidths);
}

PolicyDecision select_sense_set(std::span<const double> whittle, std::span<const double> shared_belief,
                                std::span<const double> bandwidths, std::size_t sense_count) {
  if (whittle.size() != shared_belief.size()) {
    throw DimensionError("select_sense_set: whittle and belief differ in length");
  }
  check_sense_count(sense_count, whittle.size());
  const std::size_t access = argmax_weighted(whittle, bandwidths);
  std::vector<double> learning(whittle.size());
  for (std::size_t i = 0; i < whittle.size(); ++i) learning[i] = whittle[i] - shared_belief[i];
  return finish(access, ranked_others(learning, access), sense_count);
}

PolicyDecision select_greedy(std::span<const double> shared_belief, std::span<const double> bandwidths,
                             std::size_t sense_count) {
  check_sense_count(sense_count, shared_belief.size());
  const std::size_t access = argmax_weighted(shared_belief, bandwidths);
  std::vector<double> weighted(shared_belief.size());
  for (std::size_t i = 0; i < weighted.size(); ++i) weighted[i] = shared_belief[i] * bandwidths[i];
  return finish(access, ranked_others(weighted, access), sense_count);
}

double whittle_slot_reward(const PolicyDecision& decision, std::span<const double> whittle,
                           std::span<const double> shared_belief) {
  if (whittle.size() != shared_belief.size()) {
    throw DimensionError("whittle_slot_reward: whittle and belief differ in length");
  }
  double reward = whittle[decision.access_channel];
  for (std::size_t i : decision.sense_set) {
    if (i != decision.access_channel) reward += whittle[i] - shared_belief[i];
  }
  return reward;
}

void UcbState::record(std::size_t channel, bool success) {
  attempts.at(channel) += 1;
  if (success) successes.at(channel) += 1;
  ++slot;
}

double ucb_index(const UcbState& state, std::size_t channel) {
  const auto attempts = static_cast<double>(state.attempts.at(channel));
  if (attempts == 0.0) throw DomainError("ucb_index: channel has not been attempted yet");
  if (state.slot == 0) throw DomainError("ucb_index: slot index must be at least 1");
  const double mean = static_cast<double>(state.successes.at(channel)) / attempts;
  return mean + std::sqrt(2.0 * std::log(static_cast<double>(state.slot)) / attempts);
}

std::size_t ucb_access(const UcbState& state, std::span<const double> bandwidths) {
  const std::size_t n = state.attempts.size();
  if (n == 0 || bandwidths.size() != n) throw DimensionError("ucb_access: bandwidths must match channel count");
  for (std::size_t i = 0; i < n; ++i) {
    if (state.attempts[i] == 0) return i;
  }
  std::vector<double> index(n);
  for (std::size_t i = 0; i < n; ++i) index[i] = ucb_index(state, i);
  return argmax_weighted(index, bandwidths);
}

std::vector<LearningPhase> learning_schedule(std::size_t channels, std::size_t sense_count, std::uint64_t period) {
  check_sense_count(sense_count, channels);
  const std::size_t groups = (channels + sense_count - 1) / sense_count;
  std::vector<LearningPhase> phases(groups);
  for (std::size_t g = 0; g < groups; ++g) {
    phases[g].first_slot = g * period;
    phases[g].length = period;
    for (std::size_t i = g * sense_count; i < std::min(channels, (g + 1) * sense_count); ++i) {
      phases[g].channels.push_back(i);
    }
  }
  return phases;
}

std::size_t fixed_sequence_baseline(std::span<const SlottedChannelParams> channels) {
  if (channels.empty()) throw DomainError("fixed_sequence_baseline: no channels");
  std::vector<double> pi(channels.size());
  std::vector<double> bandwidth(channels.size());
  for (std::size_t i = 0; i < channels.size(); ++i) {
    pi[i] = steady_state_free_prob(channels[i]);
    bandwidth[i] = channels[i].bandwidth;
  }
  return argmax_weighted(pi, bandwidth);
}

}  // namespace cogmac
