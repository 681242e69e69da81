#include "cogmac/belief.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cogmac/errors.hpp"

namespace cogmac {

double propagate_belief(double omega, const TransitionEstimate& p) noexcept {
  return omega * p.p11 + (1.0 - omega) * p.p01;
}

double sensing_posterior(double omega, Evidence evidence, const SensingModel& sensing) {
  // Likelihood of the evidence under "free" and under "busy".
  double like_free = 0.0;
  double like_busy = 0.0;
  switch (evidence) {
    case Evidence::sensed_free:
      like_free = 1.0 - sensing.p_fa;
      like_busy = sensing.p_md;
      break;
    case Evidence::sensed_busy:
      like_free = sensing.p_fa;
      like_busy = 1.0 - sensing.p_md;
      break;
    case Evidence::no_ack:
      // A free channel yields no ACK only when it was (wrongly) sensed busy.
      like_free = sensing.p_fa;
      like_busy = 1.0;
      break;
  }
  const double num = like_free * omega;
  const double den = num + like_busy * (1.0 - omega);
  if (!(den > 0.0)) {
    throw IndeterminatePosterior("sensing_posterior: evidence has zero probability under the prior");
  }
  return num / den;
}

std::size_t SensingOutcome::sensed_count() const {
  return static_cast<std::size_t>(
      std::count_if(sensed.begin(), sensed.end(), [](Observation o) { return o != Observation::not_sensed; }));
}

BeliefState BeliefState::initial(std::vector<double> belief, std::vector<TransitionEstimate> estimates) {
  if (belief.size() != estimates.size()) {
    throw DimensionError("BeliefState::initial: belief and estimates differ in length");
  }
  BeliefState s;
  s.tx_belief = belief;
  s.shared_belief = std::move(belief);
  s.shared_estimates = std::move(estimates);
  return s;
}

namespace {

Evidence evidence_for(Observation o) {
  return o == Observation::free ? Evidence::sensed_free : Evidence::sensed_busy;
}

// Posterior-then-propagate; impossible evidence degrades to plain propagation.
double observe_and_propagate(double omega, Evidence evidence, const TransitionEstimate& p,
                             const SensingModel& sensing, std::uint64_t& impossible) {
  try {
    return propagate_belief(sensing_posterior(omega, evidence, sensing), p);
  } catch (const IndeterminatePosterior&) {
    ++impossible;
    return propagate_belief(omega, p);
  }
}

void check_dimensions(const BeliefState& state, std::size_t access_channel, const SensingOutcome& outcome,
                      std::size_t estimates) {
  const std::size_t n = state.size();
  if (state.tx_belief.size() != n || state.shared_estimates.size() != n || outcome.sensed.size() != n ||
      estimates != n) {
    throw DimensionError("update_beliefs: state, outcome and estimates must have one entry per channel");
  }
  if (access_channel >= n) {
    throw DimensionError("update_beliefs: access channel out of range");
  }
}

}  // namespace

void update_shared_belief(BeliefState& state, std::size_t access_channel, const SensingOutcome& outcome,
                          bool ack, std::span<const TransitionEstimate> packet_estimates,
                          std::span<const double> resync_belief, const SensingModel& sensing) {
  const std::size_t n = state.size();
  auto& shared = state.shared_belief;

  if (ack) {
    if (!state.last_ack) {
      if (resync_belief.size() != n) {
        throw DimensionError("update_shared_belief: resync packet without a belief vector");
      }
      shared.assign(resync_belief.begin(), resync_belief.end());
    }
    state.shared_estimates.assign(packet_estimates.begin(), packet_estimates.end());
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = state.shared_estimates[i];
      if (i == access_channel) {
        shared[i] = p.p11;
      } else if (outcome.was_sensed(i)) {
        shared[i] = observe_and_propagate(shared[i], evidence_for(outcome.sensed[i]), p, sensing,
                                          state.impossible_evidence);
      } else {
        shared[i] = propagate_belief(shared[i], p);
      }
    }
  } else {
    for (std::size_t i = 0; i < n; ++i) {
      const auto& p = state.shared_estimates[i];
      shared[i] = i == access_channel
                      ? observe_and_propagate(shared[i], Evidence::no_ack, p, sensing, state.impossible_evidence)
                      : propagate_belief(shared[i], p);
    }
  }
  state.last_ack = ack;
}

BeliefState update_beliefs(const BeliefState& state, std::size_t access_channel, const SensingOutcome& outcome,
                           bool ack, std::span<const TransitionEstimate> estimates, const SensingModel& sensing) {
  check_dimensions(state, access_channel, outcome, estimates.size());
  const std::size_t n = state.size();

  BeliefState next = state;
  update_shared_belief(next, access_channel, outcome, ack, estimates, state.tx_belief, sensing);

  if (ack) {
    next.tx_belief = next.shared_belief;
    return next;
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double omega = state.tx_belief[i];
    const auto& p = estimates[i];
    if (i == access_channel) {
      next.tx_belief[i] = observe_and_propagate(omega, Evidence::no_ack, p, sensing, next.impossible_evidence);
    } else if (outcome.was_sensed(i)) {
      next.tx_belief[i] =
          observe_and_propagate(omega, evidence_for(outcome.sensed[i]), p, sensing, next.impossible_evidence);
    } else {
      next.tx_belief[i] = propagate_belief(omega, p);
    }
  }
  return next;
}

void update_tx_belief_unaccessed(BeliefState& state, const SensingOutcome& outcome,
                                 std::span<const TransitionEstimate> estimates, const SensingModel& sensing) {
  const std::size_t n = state.tx_belief.size();
  if (outcome.sensed.size() != n || estimates.size() != n) {
    throw DimensionError("update_tx_belief_unaccessed: outcome and estimates must have one entry per channel");
  }
  for (std::size_t i = 0; i < n; ++i) {
    double& omega = state.tx_belief[i];
    omega = outcome.was_sensed(i)
                ? observe_and_propagate(omega, evidence_for(outcome.sensed[i]), estimates[i], sensing,
                                        state.impossible_evidence)
                : propagate_belief(omega, estimates[i]);
  }
}

TransitionCounts record_transition(TransitionCounts counts, ChannelState prev, ChannelState cur) noexcept {
  const bool from_free = prev == ChannelState::free;
  const bool to_free = cur == ChannelState::free;
  if (from_free) {
    (to_free ? counts.n11 : counts.n10) += 1;
  } else {
    (to_free ? counts.n01 : counts.n00) += 1;
  }
  return counts;
}

TransitionCounts record_observation(TransitionCounts counts, ChannelState state) noexcept {
  ++counts.slots_observed;
  if (state == ChannelState::free) ++counts.n1;
  return counts;
}

TransitionEstimate estimate_transitions(const TransitionCounts& c) noexcept {
  return {static_cast<double>(c.n01 + 1) / static_cast<double>(c.n00 + c.n01 + 2),
          static_cast<double>(c.n11 + 1) / static_cast<double>(c.n11 + c.n10 + 2)};
}

double posterior_density(const TransitionCounts& counts, TransitionKind which, double x) {
  if (!(x >= 0.0 && x <= 1.0)) {
    throw DomainError("posterior_density: x must lie in [0, 1]");
  }
  const auto to_free = static_cast<double>(which == TransitionKind::p01 ? counts.n01 : counts.n11);
  const auto to_busy = static_cast<double>(which == TransitionKind::p01 ? counts.n00 : counts.n10);
  // (a+b+1)! / (a! b!) x^a (1-x)^b, evaluated in log space.
  const double log_norm = std::lgamma(to_free + to_busy + 2.0) - std::lgamma(to_free + 1.0) - std::lgamma(to_busy + 1.0);
  if ((x == 0.0 && to_free > 0.0) || (x == 1.0 && to_busy > 0.0)) return 0.0;
  const double log_kernel =
      (to_free > 0.0 ? to_free * std::log(x) : 0.0) + (to_busy > 0.0 ? to_busy * std::log1p(-x) : 0.0);
  return std::exp(log_norm + log_kernel);
}

double iid_free_estimate(const TransitionCounts& counts) {
  if (counts.slots_observed == 0) {
    throw DomainError("iid_free_estimate: no observations yet");
  }
  return static_cast<double>(counts.n1) / static_cast<double>(counts.slots_observed);
}

void TransitionCounter::observe_transition(ChannelState prev, ChannelState cur) {
  counts_ = record_transition(counts_, prev, cur);
  if (window_ == 0) return;
  transitions_.emplace_back(prev, cur);
  if (transitions_.size() > window_) {
    const auto [old_prev, old_cur] = transitions_.front();
    transitions_.pop_front();
    const bool from_free = old_prev == ChannelState::free;
    const bool to_free = old_cur == ChannelState::free;
    if (from_free) {
      (to_free ? counts_.n11 : counts_.n10) -= 1;
    } else {
      (to_free ? counts_.n01 : counts_.n00) -= 1;
    }
  }
}

void TransitionCounter::observe_state(ChannelState state) {
  counts_ = record_observation(counts_, state);
  if (window_ == 0) return;
  states_.push_back(state);
  if (states_.size() > window_) {
    if (states_.front() == ChannelState::free) --counts_.n1;
    --counts_.slots_observed;
    states_.pop_front();
  }
}

double genie_throughput_bound(std::span<const SlottedChannelParams> channels) {
  const std::size_t n = channels.size();
  if (n == 0 || n > 20) {
    throw DomainError("genie_throughput_bound: channel count must lie in [1, 20]");
  }
  std::vector<double> pi(n);
  for (std::size_t i = 0; i < n; ++i) pi[i] = steady_state_free_prob(channels[i]);

  double total = 0.0;
  const std::uint32_t states = 1u << n;
  for (std::uint32_t mask = 0; mask < states; ++mask) {
    double prob = 1.0;
    double best = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const bool free = (mask >> i) & 1u;
      prob *= free ? pi[i] : 1.0 - pi[i];
      const double to_free = free ? channels[i].p11 : channels[i].p01;
      best = std::max(best, to_free * channels[i].bandwidth);
    }
    total += prob * best;
  }
  return total;
}

}  // namespace cogmac
