#include "cogmac/unslotted_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <tuple>

#include "cogmac/errors.hpp"
#include "cogmac/period_optimizer.hpp"
#include "cogmac/random.hpp"

namespace cogmac {

namespace {

// Alternating renewal sample path on [0, horizon] with a stationary start.
class ChannelPath {
 public:
  ChannelPath(const UnslottedChannelParams& p, double horizon, Rng rng) {
    const double u = utilization(p);
    initial_ = rng.uniform() < 1.0 - u ? ChannelState::free : ChannelState::busy;
    ChannelState s = initial_;
    double t = 0.0;
    while (true) {
      t += rng.exponential(s == ChannelState::free ? p.lambda_free : p.lambda_busy);
      if (t >= horizon) break;
      epochs_.push_back(t);
      s = s == ChannelState::free ? ChannelState::busy : ChannelState::free;
    }
  }

  ChannelState state_at(double t) const {
    const auto flips = std::upper_bound(epochs_.begin(), epochs_.end(), t) - epochs_.begin();
    return flips % 2 == 0 ? initial_ : flip(initial_);
  }

  // Free time inside [a, b].
  double free_time(double a, double b) const {
    if (b <= a) return 0.0;
    auto it = std::upper_bound(epochs_.begin(), epochs_.end(), a);
    ChannelState s = (it - epochs_.begin()) % 2 == 0 ? initial_ : flip(initial_);
    double t = a;
    double acc = 0.0;
    for (; it != epochs_.end() && *it < b; ++it) {
      if (s == ChannelState::free) acc += *it - t;
      t = *it;
      s = flip(s);
    }
    if (s == ChannelState::free) acc += b - t;
    return acc;
  }

  ChannelState initial() const { return initial_; }
  const std::vector<double>& epochs() const { return epochs_; }

 private:
  static ChannelState flip(ChannelState s) {
    return s == ChannelState::free ? ChannelState::busy : ChannelState::free;
  }

  ChannelState initial_ = ChannelState::busy;
  std::vector<double> epochs_;
};

std::vector<ChannelPath> make_paths(std::span<const UnslottedChannelParams> params, double horizon,
                                    std::uint64_t seed) {
  const std::uint64_t root = derive_seed(seed, 0);
  std::vector<ChannelPath> paths;
  paths.reserve(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) paths.emplace_back(params[i], horizon, Rng(derive_seed(root, i)));
  return paths;
}

ChannelState sense_with_errors(ChannelState truth, const SensingModel& sensing, Rng& rng) {
  const double u = rng.uniform();
  if (truth == ChannelState::free) return u < sensing.p_fa ? ChannelState::busy : ChannelState::free;
  return u < sensing.p_md ? ChannelState::free : ChannelState::busy;
}

// Union of disjoint, sorted windows with O(log n) coverage queries.
class WindowSet {
 public:
  void add(double a, double b) {
    starts_.push_back(a);
    ends_.push_back(b);
    cumulative_.push_back((cumulative_.empty() ? 0.0 : cumulative_.back()) + (b - a));
  }

  // Covered length inside [0, x].
  double coverage(double x) const {
    const auto k = static_cast<std::size_t>(std::upper_bound(starts_.begin(), starts_.end(), x) - starts_.begin());
    if (k == 0) return 0.0;
    const double before = k >= 2 ? cumulative_[k - 2] : 0.0;
    return before + std::min(x, ends_[k - 1]) - starts_[k - 1];
  }

  double covered(double a, double b) const { return b > a ? coverage(b) - coverage(a) : 0.0; }

  const std::vector<double>& starts() const { return starts_; }
  const std::vector<double>& ends() const { return ends_; }

 private:
  std::vector<double> starts_;
  std::vector<double> ends_;
  std::vector<double> cumulative_;
};

// Accumulates per-bin amounts of a quantity integrated over [a, b).
class Bins {
 public:
  Bins(std::size_t count, double horizon) : width_(count > 0 ? horizon / static_cast<double>(count) : 0.0), sums_(count, 0.0) {}

  bool enabled() const { return !sums_.empty(); }

  // `measure(x, y)` gives the amount inside [x, y].
  template <typename Measure>
  void add(double a, double b, Measure measure) {
    if (!enabled() || b <= a) return;
    auto k = std::min(static_cast<std::size_t>(a / width_), sums_.size() - 1);
    while (a < b && k < sums_.size()) {
      const double edge = k + 1 == sums_.size() ? b : std::min(b, width_ * static_cast<double>(k + 1));
      sums_[k] += measure(a, edge);
      a = edge;
      ++k;
    }
  }

  std::vector<double> normalized() const {
    std::vector<double> out(sums_);
    for (auto& v : out) v /= width_;
    return out;
  }

 private:
  double width_;
  std::vector<double> sums_;
};

}  // namespace

EmpiricalMetrics simulate_multi(std::span<const UnslottedChannelParams> params, std::span<const PeriodPair> periods,
                                const SensingModel& sensing, double sensing_time, double horizon, std::uint64_t seed,
                                const UnslottedSimOptions& options) {
  const std::size_t n = params.size();
  if (n == 0) throw ConfigError("simulate_multi: at least one channel is required");
  if (periods.size() != n) throw DimensionError("simulate_multi: one period pair per channel");
  for (const auto& p : params) p.validate();
  double longest = 0.0;
  for (const auto& pp : periods) {
    pp.validate();
    if (!(pp.t_busy > 0.0)) throw ConfigError("simulate_multi: t_busy must be positive");
    longest = std::max({longest, pp.t_free, pp.t_busy});
  }
  sensing.validate();
  if (!(sensing_time >= 0.0)) throw ConfigError("simulate_multi: sensing time must be non-negative");
  if (!(horizon >= 100.0 * longest)) throw ConfigError("simulate_multi: horizon must be at least 100 periods");

  const auto paths = make_paths(params, horizon, seed);
  Rng sensing_rng(derive_seed(seed, 1));

  // Mode change points per channel: (time, utilized).
  std::vector<std::vector<std::pair<double, bool>>> modes(n, {{0.0, false}});
  WindowSet windows;
  EmpiricalMetrics out;

  using Entry = std::tuple<double, std::size_t>;  // scheduled start, channel
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> queue;
  for (std::size_t i = 0; i < n; ++i) queue.emplace(0.0, i);
  double antenna_free = 0.0;
  while (!queue.empty()) {
    const auto [scheduled, i] = queue.top();
    queue.pop();
    const double start = std::max(scheduled, antenna_free);
    if (start >= horizon) continue;
    const double end = start + sensing_time;
    antenna_free = end;
    if (end > start) windows.add(start, std::min(end, horizon));
    if (end >= horizon) continue;
    ++out.sensing_events;
    const ChannelState seen = sense_with_errors(paths[i].state_at(end), sensing, sensing_rng);
    const bool use = seen == ChannelState::free;
    if (modes[i].back().second != use) modes[i].emplace_back(end, use);
    const double period = use ? periods[i].t_free : periods[i].t_busy;
    queue.emplace(end + std::max(0.0, period - sensing_time), i);
  }

  out.channels.resize(n);
  Bins bins(options.bins, horizon);
  for (std::size_t i = 0; i < n; ++i) {
    const auto& path = paths[i];
    const auto& mode = modes[i];
    ChannelEmpirical& m = out.channels[i];
    double utilized = 0.0, utilized_busy = 0.0, idle_free = 0.0, paused_free = 0.0, free_total = 0.0, useful = 0.0;
    // Walk the merged breakpoints of the mode and state signals.
    std::size_t mk = 0;
    std::size_t ek = 0;
    const auto& epochs = path.epochs();
    ChannelState s = path.initial();
    double t = 0.0;
    while (t < horizon) {
      const double next_mode = mk + 1 < mode.size() ? mode[mk + 1].first : horizon;
      const double next_state = ek < epochs.size() ? epochs[ek] : horizon;
      const double b = std::min({next_mode, next_state, horizon});
      const double len = b - t;
      const bool use = mode[mk].second;
      const bool free = s == ChannelState::free;
      if (free) free_total += len;
      if (use) {
        utilized += len;
        if (free) {
          const double paused = windows.covered(t, b);
          paused_free += paused;
          useful += len - paused;
          bins.add(t, b, [&](double x, double y) { return (y - x) - windows.covered(x, y); });
        } else {
          utilized_busy += len;
        }
      } else if (free) {
        idle_free += len;
      }
      if (b == next_mode && mk + 1 < mode.size()) ++mk;
      if (b == next_state && ek < epochs.size()) {
        ++ek;
        s = s == ChannelState::free ? ChannelState::busy : ChannelState::free;
      }
      t = b;
    }
    m.secondary_utilization = utilized / horizon;
    m.interference = utilized_busy / horizon;
    m.unexplored = idle_free / horizon;
    m.overhead = paused_free / horizon;
    m.throughput = useful / horizon;
    m.free_fraction = free_total / horizon;
    m.discovered_free = (utilized - utilized_busy) / horizon;
    out.throughput += m.throughput;
  }
  if (bins.enabled()) out.binned_throughput = bins.normalized();

  if (options.record_activities) {
    for (std::size_t k = 0; k < windows.starts().size(); ++k) {
      out.activities.push_back({ActivityKind::sense, 0, windows.starts()[k], windows.ends()[k]});
    }
    // Transmission: utilized intervals with every sensing window cut out.
    const auto& ws = windows.starts();
    const auto& we = windows.ends();
    for (std::size_t i = 0; i < n; ++i) {
      const auto& mode = modes[i];
      for (std::size_t k = 0; k < mode.size(); ++k) {
        if (!mode[k].second) continue;
        double a = mode[k].first;
        const double b = k + 1 < mode.size() ? mode[k + 1].first : horizon;
        auto w = static_cast<std::size_t>(std::upper_bound(we.begin(), we.end(), a) - we.begin());
        for (; w < ws.size() && ws[w] < b; ++w) {
          if (ws[w] > a) out.activities.push_back({ActivityKind::transmit, i, a, ws[w]});
          a = std::max(a, we[w]);
        }
        if (b > a) out.activities.push_back({ActivityKind::transmit, i, a, b});
      }
    }
  }
  return out;
}

EmpiricalMetrics simulate_single(std::span<const UnslottedChannelParams> params,
                                 std::span<const double> access_periods, const SensingModel& sensing,
                                 double sensing_time, double rts_cts_duration, double horizon, std::uint64_t seed,
                                 const UnslottedSimOptions& options) {
  const std::size_t n = params.size();
  if (n == 0) throw ConfigError("simulate_single: at least one channel is required");
  if (access_periods.size() != n) throw DimensionError("simulate_single: one access period per channel");
  for (const auto& p : params) p.validate();
  for (double t : access_periods) {
    if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("simulate_single: access periods must be positive");
  }
  sensing.validate();
  if (!(sensing_time >= 0.0)) throw ConfigError("simulate_single: sensing time must be non-negative");
  if (!(rts_cts_duration >= 0.0)) throw ConfigError("simulate_single: RTS/CTS duration must be non-negative");
  if (sensing_time + rts_cts_duration <= 0.0) {
    throw ConfigError("simulate_single: a channel visit must take positive time (sensing or RTS/CTS)");
  }
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw ConfigError("simulate_single: horizon must be positive");

  const auto paths = make_paths(params, horizon, seed);
  Rng sensing_rng(derive_seed(seed, 1));
  // gamma ordering only needs P / Ts up to a common factor
  const double order_scale = sensing_time > 0.0 ? sensing_time : 1.0;

  struct View {
    std::vector<ChannelState> state;
    std::vector<double> time;
  };
  const double long_ago = -std::numeric_limits<double>::infinity();
  View tx{std::vector<ChannelState>(n, ChannelState::busy), std::vector<double>(n, long_ago)};
  View rx = tx;

  EmpiricalMetrics out;
  out.channels.resize(n);
  std::vector<double> busy_access(n, 0.0);
  double delay_sum = 0.0;
  std::uint64_t delays = 0;
  double useful = 0.0;
  Bins bins(options.bins, horizon);

  double t = 0.0;
  double search_start = 0.0;
  std::vector<std::size_t> tx_order;
  std::vector<std::size_t> rx_order;
  std::size_t step = n;  // forces an initial ordering
  while (t < horizon) {
    if (step == n) {
      tx_order = channel_priority_order(tx.state, tx.time, t, params, order_scale);
      rx_order = channel_priority_order(rx.state, rx.time, t, params, order_scale);
      step = 0;
    }
    const std::size_t c = tx_order[step];
    const std::size_t r = rx_order[step];
    ++step;
    ++out.visits;
    if (c != r) ++out.sync_failures;

    const double decided = t + sensing_time;
    const double handshake_end = decided + rts_cts_duration;
    if (handshake_end > horizon) break;
    if (options.record_activities) {
      if (sensing_time > 0.0) out.activities.push_back({ActivityKind::sense, c, t, decided});
      if (rts_cts_duration > 0.0) out.activities.push_back({ActivityKind::handshake, c, decided, handshake_end});
    }
    const ChannelState truth = paths[c].state_at(decided);
    const ChannelState seen = sense_with_errors(truth, sensing, sensing_rng);
    // The RTS reaches the receiver only on its channel and only when no
    // primary transmission corrupts it.
    const bool rts_sent = seen == ChannelState::free;
    const bool rts_heard = rts_sent && r == c && truth == ChannelState::free;
    tx.state[c] = options.handshake_view_update && !rts_heard ? ChannelState::busy : seen;
    tx.time[c] = decided;
    rx.state[r] = rts_heard ? ChannelState::free : ChannelState::busy;
    rx.time[r] = decided;
    t = handshake_end;
    if (!rts_sent) continue;
    if (!rts_heard) {
      ++out.handshake_failures;
      continue;
    }

    delay_sum += t - search_start;
    ++delays;
    const double block_end = t + access_periods[c];
    const double end = std::min(block_end, horizon);
    const double free = paths[c].free_time(t, end);
    useful += free;
    bins.add(t, end, [&](double x, double y) { return paths[c].free_time(x, y); });
    if (options.record_activities) out.activities.push_back({ActivityKind::transmit, c, t, end});
    if (block_end <= horizon) {
      auto& m = out.channels[c];
      m.access_time += access_periods[c];
      busy_access[c] += access_periods[c] - free;
      ++m.blocks;
    }
    t = block_end;
    search_start = t;
    step = n;
  }

  for (std::size_t i = 0; i < n; ++i) {
    auto& m = out.channels[i];
    m.secondary_utilization = m.access_time / horizon;
    m.interference = m.access_time > 0.0 ? busy_access[i] / m.access_time : 0.0;
    m.free_fraction = paths[i].free_time(0.0, horizon) / horizon;
  }
  out.throughput = useful / horizon;
  out.mean_search_delay = delays > 0 ? delay_sum / static_cast<double>(delays) : 0.0;
  if (bins.enabled()) out.binned_throughput = bins.normalized();
  return out;
}

}  // namespace cogmac
