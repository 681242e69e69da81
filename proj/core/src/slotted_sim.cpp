#include "cogmac/slotted_sim.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "cogmac/errors.hpp"
#include "cogmac/random.hpp"
#include "cogmac/whittle.hpp"

namespace cogmac {

namespace {

constexpr std::array<std::pair<SlottedPolicy, std::string_view>, 8> kPolicyNames{{
    {SlottedPolicy::full_sensing_blind, "full_sensing_blind"},
    {SlottedPolicy::full_sensing_informed, "full_sensing_informed"},
    {SlottedPolicy::whittle_blind, "whittle_blind"},
    {SlottedPolicy::whittle_informed, "whittle_informed"},
    {SlottedPolicy::greedy_informed, "greedy_informed"},
    {SlottedPolicy::ucb, "ucb"},
    {SlottedPolicy::fixed_baseline, "fixed_baseline"},
    {SlottedPolicy::iid_blind, "iid_blind"},
}};

bool needs_full_sensing(SlottedPolicy p) {
  return p == SlottedPolicy::full_sensing_blind || p == SlottedPolicy::full_sensing_informed ||
         p == SlottedPolicy::iid_blind;
}

}  // namespace

std::string_view to_string(SlottedPolicy p) noexcept {
  for (const auto& [policy, name] : kPolicyNames) {
    if (policy == p) return name;
  }
  return "unknown";
}

SlottedPolicy parse_slotted_policy(std::string_view name) {
  for (const auto& [policy, n] : kPolicyNames) {
    if (n == name) return policy;
  }
  throw ConfigError("unknown slotted policy '" + std::string(name) + "'");
}

bool is_blind(SlottedPolicy p) noexcept {
  return p == SlottedPolicy::full_sensing_blind || p == SlottedPolicy::whittle_blind ||
         p == SlottedPolicy::iid_blind;
}

void SlottedConfig::validate() const {
  if (channels.empty()) throw ConfigError("slotted: at least one channel is required");
  for (const auto& c : channels) c.validate();
  sensing.validate();
  const std::size_t n = channels.size();
  if (sense_count < 1 || sense_count > n) throw ConfigError("slotted: sense_count must lie in [1, N]");
  if (needs_full_sensing(policy) && sense_count != n) {
    throw ConfigError("slotted: policy " + std::string(to_string(policy)) + " senses every channel (L = N)");
  }
  if (horizon < 1) throw ConfigError("slotted: horizon must be at least one slot");
  if (block_count < 1) throw ConfigError("slotted: block_count must be at least 1");
  if (!(whittle_discount >= 0.0 && whittle_discount < 1.0)) {
    throw ConfigError("slotted: whittle_discount must lie in [0, 1)");
  }
}

std::vector<double> SlottedConfig::bandwidths() const {
  std::vector<double> b;
  b.reserve(channels.size());
  for (const auto& c : channels) b.push_back(c.bandwidth);
  return b;
}

double RunResult::mean_throughput() const {
  return throughput_per_slot.empty() ? 0.0 : throughput_per_slot.back();
}

double window_mean(const std::vector<double>& cumulative, std::size_t from, std::size_t to) {
  if (from >= to || to > cumulative.size()) throw DomainError("window_mean: empty or out-of-range window");
  const double head = from == 0 ? 0.0 : cumulative[from - 1] * static_cast<double>(from);
  return (cumulative[to - 1] * static_cast<double>(to) - head) / static_cast<double>(to - from);
}

namespace {

// Decision state that both ends hold identically: shared belief, shared
// estimates and UCB counters. Everything the receiver knows arrives through
// `end_slot` and `handshake`.
class Endpoint {
 public:
  Endpoint(const SlottedConfig& cfg, BeliefState initial)
      : cfg_(cfg), bandwidths_(cfg.bandwidths()), state_(std::move(initial)), ucb_(cfg.channels.size()),
        fixed_(fixed_sequence_baseline(cfg.channels)) {}

  PolicyDecision decide() const {
    const std::size_t n = bandwidths_.size();
    const auto& omega = state_.shared_belief;
    switch (cfg_.policy) {
      case SlottedPolicy::full_sensing_blind:
      case SlottedPolicy::full_sensing_informed:
      case SlottedPolicy::iid_blind: {
        PolicyDecision d;
        d.access_channel = greedy_access(omega, bandwidths_);
        d.sense_set.resize(n);
        for (std::size_t i = 0; i < n; ++i) d.sense_set[i] = i;
        return d;
      }
      case SlottedPolicy::greedy_informed:
        return select_greedy(omega, bandwidths_, cfg_.sense_count);
      case SlottedPolicy::whittle_blind:
      case SlottedPolicy::whittle_informed: {
        std::vector<double> w(n);
        for (std::size_t i = 0; i < n; ++i) {
          w[i] = threshold_whittle_index(omega[i], state_.shared_estimates[i], cfg_.whittle_discount);
        }
        return select_sense_set(w, omega, bandwidths_, cfg_.sense_count);
      }
      case SlottedPolicy::ucb: {
        const std::size_t i = ucb_access(ucb_, bandwidths_);
        return {i, {i}};
      }
      case SlottedPolicy::fixed_baseline:
        return {fixed_, {fixed_}};
    }
    throw ConfigError("slotted: unhandled policy");
  }

  // Receiver-side end of slot.
  void end_slot(std::size_t access, const Packet* packet) {
    if (packet != nullptr) {
      update_shared_belief(state_, access, packet->phi, true, packet->estimates, packet->resync_belief,
                           cfg_.sensing);
    } else {
      update_shared_belief(state_, access, SensingOutcome{}, false, {}, {}, cfg_.sensing);
    }
    ucb_.record(access, packet != nullptr);
  }

  void handshake(const Packet& packet) {
    state_.shared_belief = packet.resync_belief;
    state_.shared_estimates = packet.estimates;
    state_.last_ack = true;
  }

  BeliefState& state() { return state_; }
  UcbState& ucb() { return ucb_; }

 private:
  const SlottedConfig& cfg_;
  std::vector<double> bandwidths_;
  BeliefState state_;
  UcbState ucb_;
  std::size_t fixed_;
};

BeliefState initial_state(const SlottedConfig& cfg) {
  const std::size_t n = cfg.channels.size();
  if (is_blind(cfg.policy)) {
    return BeliefState::initial(std::vector<double>(n, 0.5), std::vector<TransitionEstimate>(n));
  }
  std::vector<double> belief(n);
  std::vector<TransitionEstimate> est(n);
  for (std::size_t i = 0; i < n; ++i) {
    belief[i] = steady_state_free_prob(cfg.channels[i]);
    est[i] = {cfg.channels[i].p01, cfg.channels[i].p11};
  }
  return BeliefState::initial(std::move(belief), std::move(est));
}

std::uint64_t learning_slots(const SlottedConfig& cfg, const std::vector<LearningPhase>& phases) {
  if (!is_blind(cfg.policy) || cfg.learning_period == 0) return 0;
  return std::min<std::uint64_t>(cfg.horizon, phases.size() * cfg.learning_period);
}

std::vector<LearningPhase> schedule_for(const SlottedConfig& cfg) {
  return learning_schedule(cfg.channels.size(), cfg.sense_count, cfg.learning_period);
}

}  // namespace

RunResult simulate_slotted(const SlottedConfig& cfg, std::uint64_t seed) {
  cfg.validate();
  const std::size_t n = cfg.channels.size();
  const std::vector<double> bw = cfg.bandwidths();
  const auto phases = schedule_for(cfg);
  const std::uint64_t learn_end = learning_slots(cfg, phases);
  constexpr auto never = std::numeric_limits<std::uint64_t>::max();

  // Streams: one per channel plus one for sensing noise, so the channel
  // sample paths do not depend on the policy.
  const std::uint64_t channel_root = derive_seed(seed, 0);
  std::vector<Rng> channel_rng;
  channel_rng.reserve(n);
  for (std::size_t i = 0; i < n; ++i) channel_rng.emplace_back(derive_seed(channel_root, i));
  Rng sensing_rng(derive_seed(seed, 1));

  std::vector<ChannelState> truth(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pi = steady_state_free_prob(cfg.channels[i]);
    truth[i] = channel_rng[i].uniform() < pi ? ChannelState::free : ChannelState::busy;
  }

  std::vector<TransitionCounter> counters(n, TransitionCounter(cfg.estimation_window));
  auto fresh_estimates = [&] {
    std::vector<TransitionEstimate> est(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (!is_blind(cfg.policy)) {
        est[i] = {cfg.channels[i].p01, cfg.channels[i].p11};
      } else if (cfg.policy == SlottedPolicy::iid_blind) {
        const auto& c = counters[i].counts();
        const double q = c.slots_observed == 0 ? 0.5 : iid_free_estimate(c);
        est[i] = {q, q};
      } else {
        est[i] = counters[i].estimate();
      }
    }
    return est;
  };

  Endpoint tx(cfg, initial_state(cfg));
  Endpoint rx(cfg, initial_state(cfg));

  RunResult result;
  result.throughput_per_slot.resize(cfg.horizon);
  std::vector<std::uint64_t> last_sensed(n, never);
  std::vector<ChannelState> last_sensed_state(n, ChannelState::busy);
  std::size_t prev_access = n;
  std::vector<double> sense_noise(n);
  double total_reward = 0.0;

  for (std::uint64_t j = 0; j < cfg.horizon; ++j) {
    for (auto& u : sense_noise) u = sensing_rng.uniform();
    auto sense = [&](std::size_t i) {
      const bool flip = truth[i] == ChannelState::free ? sense_noise[i] < cfg.sensing.p_fa
                                                       : sense_noise[i] < cfg.sensing.p_md;
      const bool free = (truth[i] == ChannelState::free) != flip;
      return free ? ChannelState::free : ChannelState::busy;
    };

    SensingOutcome outcome;
    outcome.sensed.assign(n, Observation::not_sensed);
    double reward = 0.0;
    SlotRecord record;
    record.slot = j;

    if (j < learn_end) {
      const auto& group = phases[j / cfg.learning_period].channels;
      for (std::size_t i : group) {
        const ChannelState s = sense(i);
        outcome.sensed[i] = s == ChannelState::free ? Observation::free : Observation::busy;
        if (j > 0 && last_sensed[i] == j - 1) counters[i].observe_transition(last_sensed_state[i], s);
        counters[i].observe_state(s);
      }
      std::size_t chosen = n;
      if (cfg.access_during_learning) {
        for (std::size_t i : group) {
          if (outcome.sensed[i] != Observation::free) continue;
          if (chosen == n || tx.state().tx_belief[i] * bw[i] > tx.state().tx_belief[chosen] * bw[chosen]) {
            chosen = i;
          }
        }
        if (chosen != n) {
          if (truth[chosen] == ChannelState::free) {
            reward = bw[chosen];
            ++result.total_successes;
          } else {
            ++result.collisions;
          }
        }
      }
      const auto est = fresh_estimates();
      update_tx_belief_unaccessed(tx.state(), outcome, est, cfg.sensing);
      record.learning = true;
      record.tx_channel = record.rx_channel = chosen == n ? group.front() : chosen;
      if (j + 1 == learn_end) {
        // Handshake closing the learning phase: both ends adopt the
        // transmitter's belief and estimates as the shared state.
        Packet hello{SensingOutcome{}, est, tx.state().tx_belief};
        tx.handshake(hello);
        rx.handshake(hello);
        if (cfg.record_log) record.packet = std::move(hello);
      }
    } else {
      const PolicyDecision d = tx.decide();
      const std::size_t rx_channel = rx.decide().access_channel;
      const std::size_t a = d.access_channel;
      if (rx_channel != a) ++result.sync_violations;

      for (std::size_t i : d.sense_set) {
        const ChannelState s = sense(i);
        outcome.sensed[i] = s == ChannelState::free ? Observation::free : Observation::busy;
        const bool consecutive = j > 0 && last_sensed[i] == j - 1;
        const bool counted =
            cfg.strict_transition_counting ? consecutive && i == a && prev_access == a : consecutive;
        if (counted) counters[i].observe_transition(last_sensed_state[i], s);
        counters[i].observe_state(s);
      }
      const bool transmitted = outcome.sensed[a] == Observation::free;
      const bool ack = transmitted && truth[a] == ChannelState::free && rx_channel == a;
      if (transmitted && truth[a] == ChannelState::busy) ++result.collisions;
      if (ack) {
        reward = bw[a];
        ++result.total_successes;
      }

      const auto est = fresh_estimates();
      std::optional<Packet> packet;
      if (ack) {
        packet = Packet{outcome, est, {}};
        if (!tx.state().last_ack) {
          packet->resync_belief = tx.state().tx_belief;
          ++result.resync_events;
        }
      }
      tx.state() = update_beliefs(tx.state(), a, outcome, ack, est, cfg.sensing);
      tx.ucb().record(a, ack);
      rx.end_slot(rx_channel, packet ? &*packet : nullptr);
      prev_access = a;

      record.tx_channel = a;
      record.rx_channel = rx_channel;
      record.delivered = ack;
      if (cfg.record_log && packet) record.packet = std::move(packet);
    }

    for (std::size_t i = 0; i < n; ++i) {
      if (outcome.sensed[i] == Observation::not_sensed) continue;
      last_sensed[i] = j;
      last_sensed_state[i] = outcome.sensed[i] == Observation::free ? ChannelState::free : ChannelState::busy;
    }
    total_reward += reward;
    result.throughput_per_slot[j] = total_reward / static_cast<double>(j + 1);
    if (cfg.record_log) result.log.push_back(std::move(record));

    for (std::size_t i = 0; i < n; ++i) {
      const auto& c = cfg.channels[i];
      const double p_free = truth[i] == ChannelState::free ? c.p11 : c.p01;
      truth[i] = channel_rng[i].uniform() < p_free ? ChannelState::free : ChannelState::busy;
    }
  }
  result.impossible_evidence = tx.state().impossible_evidence;
  return result;
}

std::vector<std::size_t> replay_receiver(const SlottedConfig& cfg, const std::vector<SlotRecord>& log) {
  cfg.validate();
  Endpoint rx(cfg, initial_state(cfg));
  std::vector<std::size_t> channels;
  channels.reserve(log.size());
  for (const auto& r : log) {
    if (r.learning) {
      channels.push_back(r.rx_channel);
      if (r.packet) rx.handshake(*r.packet);
      continue;
    }
    const std::size_t ch = rx.decide().access_channel;
    channels.push_back(ch);
    const bool heard = r.delivered && r.packet && r.tx_channel == ch;
    rx.end_slot(ch, heard ? &*r.packet : nullptr);
  }
  return channels;
}

MonteCarloResult monte_carlo(const SlottedConfig& cfg) {
  cfg.validate();
  const std::size_t horizon = cfg.horizon;
  const std::uint64_t runs = cfg.block_count;
  unsigned workers = cfg.threads == 0 ? std::max(1u, std::thread::hardware_concurrency()) : cfg.threads;
  workers = static_cast<unsigned>(std::min<std::uint64_t>(workers, runs));

  SlottedConfig run_cfg = cfg;
  run_cfg.record_log = false;

  MonteCarloResult out;
  std::vector<double> sum(horizon, 0.0);
  std::vector<double> sum_sq(horizon, 0.0);
  out.run_means.reserve(runs);

  std::vector<RunResult> batch(workers);
  for (std::uint64_t first = 0; first < runs; first += workers) {
    const auto count = static_cast<unsigned>(std::min<std::uint64_t>(workers, runs - first));
    if (count == 1) {
      batch[0] = simulate_slotted(run_cfg, derive_seed(cfg.seed, first));
    } else {
      std::vector<std::thread> pool;
      std::vector<std::exception_ptr> errors(count);
      for (unsigned w = 0; w < count; ++w) {
        pool.emplace_back([&, w] {
          try {
            batch[w] = simulate_slotted(run_cfg, derive_seed(cfg.seed, first + w));
          } catch (...) {
            errors[w] = std::current_exception();
          }
        });
      }
      for (auto& t : pool) t.join();
      for (auto& e : errors) {
        if (e) std::rethrow_exception(e);
      }
    }
    // fixed reduction order: run index
    for (unsigned w = 0; w < count; ++w) {
      const RunResult& r = batch[w];
      for (std::size_t j = 0; j < horizon; ++j) {
        sum[j] += r.throughput_per_slot[j];
        sum_sq[j] += r.throughput_per_slot[j] * r.throughput_per_slot[j];
      }
      out.run_means.push_back(r.mean_throughput());
      out.total_successes += r.total_successes;
      out.collisions += r.collisions;
      out.resync_events += r.resync_events;
      out.sync_violations += r.sync_violations;
    }
  }

  const auto r = static_cast<double>(runs);
  out.mean_trace.resize(horizon);
  out.stderr_trace.resize(horizon);
  for (std::size_t j = 0; j < horizon; ++j) {
    const double mean = sum[j] / r;
    out.mean_trace[j] = mean;
    const double var = runs > 1 ? std::max(0.0, (sum_sq[j] - r * mean * mean) / (r - 1.0)) : 0.0;
    out.stderr_trace[j] = std::sqrt(var / r);
  }
  out.mean_throughput = out.mean_trace.back();
  out.standard_error = out.stderr_trace.back();
  return out;
}

}  // namespace cogmac
