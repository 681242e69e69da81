// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
// exits non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cogmac/belief.hpp"
#include "cogmac/model.hpp"
#include "cogmac/period_optimizer.hpp"
#include "cogmac/random.hpp"
#include "cogmac/renewal.hpp"
#include "cogmac/slotted_sim.hpp"
#include "cogmac/unslotted_sim.hpp"
#include "cogmac/whittle.hpp"
#include "oracles.hpp"

using namespace cogmac;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double rel_err(double got, double want) { return std::abs(got - want) / std::abs(want); }

const std::vector<UnslottedChannelParams>& reference_channels() {
  static const std::vector<UnslottedChannelParams> ch = [] {
    const double l1[] = {0.2, 0.17, 0.15, 0.13, 0.11};
    const double l0[] = {1.0, 0.9, 0.8, 0.7, 0.6};
    std::vector<UnslottedChannelParams> v;
    for (int i = 0; i < 5; ++i) v.push_back({l1[i], l0[i]});
    return v;
  }();
  return ch;
}

struct Solved {
  OptimizationResult two;
  OptimizationResult single;
  double seconds = 0.0;
};

Solved solve_reference(double factor) {
  const auto& ch = reference_channels();
  const auto sensing = SensingModel::perfect_sensing(0.01);
  const auto constraint = InterferenceConstraint::fraction_of_utilization(ch, factor);
  const auto t0 = Clock::now();
  Solved s;
  s.two = optimize_two_periods(ch, sensing, 0.01, constraint);
  s.single = optimize_single_period(ch, sensing, 0.01, constraint);
  s.seconds = seconds_since(t0);
  return s;
}

double worst_slack(const OptimizationResult& r) {
  return *std::min_element(r.constraint_slack.begin(), r.constraint_slack.end());
}

// Mean and standard error of a sample.
struct Stat {
  double mean = 0.0;
  double se = 0.0;
};

Stat stat_of(const std::vector<double>& x) {
  Stat s;
  for (double v : x) s.mean += v;
  s.mean /= static_cast<double>(x.size());
  double ss = 0.0;
  for (double v : x) ss += (v - s.mean) * (v - s.mean);
  s.se = std::sqrt(ss / static_cast<double>(x.size() - 1) / static_cast<double>(x.size()));
  return s;
}

std::vector<SlottedChannelParams> random_slotted(Rng& rng, std::size_t n) {
  std::vector<SlottedChannelParams> ch(n);
  for (auto& c : ch) {
    c.p01 = rng.uniform(0.1, 0.9);
    c.p11 = rng.uniform(0.1, 0.9);
  }
  return ch;
}

SlottedConfig slotted_config(const std::vector<SlottedChannelParams>& ch, SlottedPolicy policy, std::size_t sense,
                             std::uint64_t horizon, std::uint64_t runs, std::uint64_t seed) {
  SlottedConfig c;
  c.channels = ch;
  c.sense_count = sense;
  c.horizon = horizon;
  c.policy = policy;
  c.block_count = runs;
  c.seed = seed;
  return c;
}

// ---------------------------------------------------------------------------

Outcome strict_case() {
  const auto s = solve_reference(0.25);
  const double r = s.two.objective;
  const double slack = worst_slack(s.two);
  return {rel_err(r, 3.8068) <= 0.02 && slack >= -1e-6 && s.seconds < 60.0,
          fmt("R=%.5f (target 3.8068, err %.3f%%), worst slack %.2e, %.1fs", r, 100 * rel_err(r, 3.8068), slack,
              s.seconds)};
}

Outcome relaxed_case() {
  const auto relaxed = solve_reference(0.75);
  const auto strict = solve_reference(0.25);
  const double two = relaxed.two.objective;
  const double one = relaxed.single.objective;
  const bool ok = rel_err(two, 4.1085) <= 0.02 && rel_err(one, 3.7731) <= 0.02 &&
                  two >= one && strict.two.objective >= strict.single.objective &&
                  worst_slack(relaxed.two) >= -1e-6 && worst_slack(relaxed.single) >= -1e-6 &&
                  relaxed.seconds < 60.0;
  return {ok, fmt("relaxed two=%.5f single=%.5f; strict two=%.5f single=%.5f; %.1fs", two, one,
                  strict.two.objective, strict.single.objective, relaxed.seconds)};
}

Outcome opportunity_bound() {
  const double total = total_opportunity(reference_channels());
  double by_hand = 0.0;
  for (const auto& c : reference_channels()) by_hand += c.lambda_busy / (c.lambda_free + c.lambda_busy);
  return {std::abs(total - 4.205) <= 1e-3 && std::abs(total - by_hand) < 1e-12,
          fmt("sum(1-u)=%.6f", total)};
}

Outcome renewal_check() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(4, 0));
  double worst = 0.0;
  double worst_quad = 0.0;
  for (int k = 0; k < 30; ++k) {
    const UnslottedChannelParams p{rng.uniform(0.05, 2.0), rng.uniform(0.05, 2.0)};
    const double t = rng.uniform(0.1, 10.0);
    const auto f = Density::exponential(p.lambda_free);
    const auto b = Density::exponential(p.lambda_busy);
    for (auto from : {ChannelState::free, ChannelState::busy}) {
      const double closed = delta(p, from, t);
      worst = std::max(worst, std::abs(closed - delta_numeric(f, b, from, t)));
      const double quad = oracle::free_time_quadrature(p.lambda_free, p.lambda_busy, from == ChannelState::free, t);
      worst_quad = std::max(worst_quad, std::abs(closed - quad));
    }
  }
  const double secs = seconds_since(t0);
  return {worst < 1e-5 && worst_quad < 1e-8 && secs < 60.0,
          fmt("max |closed - renewal| = %.2e, max |closed - quadrature| = %.2e, %.1fs", worst, worst_quad, secs)};
}

Outcome multi_sim_vs_analytics() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(5, 0));
  const std::size_t seeds = 100;
  const double horizon = 1e4;
  std::size_t checks = 0;
  double worst_z = 0.0;
  std::string worst_where;
  for (int set = 0; set < 10; ++set) {
    const std::size_t n = 3;
    std::vector<UnslottedChannelParams> ch(n);
    std::vector<PeriodPair> periods(n);
    for (std::size_t i = 0; i < n; ++i) {
      ch[i] = {rng.uniform(0.1, 2.0), rng.uniform(0.1, 2.0)};
      periods[i] = {rng.uniform(0.2, 5.0), rng.uniform(0.2, 5.0)};
    }
    const auto sensing = SensingModel::perfect_sensing(0.0);
    const auto analytic = network_metrics(ch, periods, sensing, 0.0);
    std::vector<std::vector<double>> su(n), un(n), in(n);
    for (std::size_t r = 0; r < seeds; ++r) {
      const auto m = simulate_multi(ch, periods, sensing, 0.0, horizon, derive_seed(500 + set, r));
      for (std::size_t i = 0; i < n; ++i) {
        su[i].push_back(m.channels[i].secondary_utilization);
        un[i].push_back(m.channels[i].unexplored);
        in[i].push_back(m.channels[i].interference);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      const std::pair<const char*, std::pair<double, Stat>> rows[] = {
          {"SU", {analytic[i].secondary_utilization, stat_of(su[i])}},
          {"U", {analytic[i].unexplored, stat_of(un[i])}},
          {"I", {analytic[i].interference, stat_of(in[i])}},
      };
      for (const auto& [name, v] : rows) {
        const double z = std::abs(v.second.mean - v.first) / v.second.se;
        ++checks;
        if (z > worst_z) {
          worst_z = z;
          worst_where = fmt("set %d ch %zu T^%s: sim %.5f analytic %.5f", set, i, name, v.second.mean, v.first);
        }
      }
    }
  }
  const double secs = seconds_since(t0);
  return {worst_z <= 3.0 && secs < 300.0,
          fmt("%zu comparisons, worst %.2f SE (%s), %.1fs", checks, worst_z, worst_where.c_str(), secs)};
}

Outcome genie_bound() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(6, 0));
  bool ok = true;
  double min_ratio = 1e9;
  double max_excess_se = -1e9;
  double worst_enum = 0.0;
  for (int inst = 0; inst < 5; ++inst) {
    const auto ch = random_slotted(rng, 5);
    const double bound = genie_throughput_bound(ch);
    std::vector<double> p01, p11, bw;
    for (const auto& c : ch) {
      p01.push_back(c.p01);
      p11.push_back(c.p11);
      bw.push_back(c.bandwidth);
    }
    worst_enum = std::max(worst_enum, std::abs(bound - oracle::genie_bound_enumeration(p01.data(), p11.data(),
                                                                                       bw.data(), ch.size())));
    const auto mc = monte_carlo(slotted_config(ch, SlottedPolicy::full_sensing_informed, 5, 10000, 200, 600 + inst));
    min_ratio = std::min(min_ratio, mc.mean_throughput / bound);
    max_excess_se = std::max(max_excess_se, (mc.mean_throughput - bound) / mc.standard_error);
    ok = ok && mc.mean_throughput <= bound + 3.0 * mc.standard_error && mc.mean_throughput >= 0.9 * bound;
  }
  const double secs = seconds_since(t0);
  ok = ok && worst_enum < 1e-12 && secs < 300.0;
  return {ok, fmt("5 instances x 200 runs: min throughput/bound %.4f, max excess %.2f SE, "
                  "bound vs enumeration %.1e, %.1fs",
                  min_ratio, max_excess_se, worst_enum, secs)};
}

Outcome blind_convergence() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(7, 0));
  const auto ch = random_slotted(rng, 5);
  const auto informed = monte_carlo(slotted_config(ch, SlottedPolicy::full_sensing_informed, 5, 10000, 200, 700));
  const auto blind = monte_carlo(slotted_config(ch, SlottedPolicy::full_sensing_blind, 5, 10000, 200, 700));
  const double inf_late = window_mean(informed.mean_trace, 5000, 10000);
  const double blind_late = window_mean(blind.mean_trace, 5000, 10000);
  const double inf_early = window_mean(informed.mean_trace, 900, 1000);
  const double blind_early = window_mean(blind.mean_trace, 900, 1000);
  const bool late_ok = rel_err(blind_late, inf_late) <= 0.05;
  const bool early_ok = blind_early >= 0.9 * inf_early;

  // Channels with p11 = p01 are i.i.d. over slots.
  std::vector<SlottedChannelParams> iid(5);
  for (auto& c : iid) {
    c.p01 = rng.uniform(0.1, 0.9);
    c.p11 = c.p01;
  }
  const double genie = genie_throughput_bound(iid);
  const std::uint64_t long_t = 100000;
  const auto iid_run = monte_carlo(slotted_config(iid, SlottedPolicy::iid_blind, 5, long_t, 40, 710));
  const auto uni_run = monte_carlo(slotted_config(iid, SlottedPolicy::full_sensing_blind, 5, long_t, 40, 710));
  const double iid_final = window_mean(iid_run.mean_trace, long_t - 10000, long_t);
  const double uni_final = window_mean(uni_run.mean_trace, long_t - 10000, long_t);
  const bool iid_ok = rel_err(iid_final, genie) <= 0.05 && rel_err(uni_final, genie) <= 0.05;
  const double secs = seconds_since(t0);
  return {late_ok && early_ok && iid_ok && secs < 600.0,
          fmt("slots 5e3-1e4 blind %.4f informed %.4f; slots 900-1000 blind %.4f informed %.4f; "
              "iid genie %.4f, iid_blind %.4f, full_sensing_blind %.4f; %.1fs",
              blind_late, inf_late, blind_early, inf_early, genie, iid_final, uni_final, secs)};
}

Outcome whittle_oracle() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(8, 0));
  const double beta = 0.999;
  WhittleConfig cfg;
  cfg.discount = beta;
  const double h = 1e-3;
  int bracketed = 0;
  std::string miss;
  for (int k = 0; k < 20; ++k) {
    const TransitionEstimate p{rng.uniform(0.1, 0.9), rng.uniform(0.1, 0.9)};
    const double omega = rng.uniform(0.05, 0.95);
    const double w = whittle_index(omega, p, cfg);
    // The oracle runs at twice the library's grid resolution.
    const double below = oracle::whittle_gap(omega, p.p01, p.p11, beta, w - h, 2 * cfg.grid_points - 1, 1e-10);
    const double above = oracle::whittle_gap(omega, p.p01, p.p11, beta, w + h, 2 * cfg.grid_points - 1, 1e-10);
    if (below < 0.0 && above > 0.0) {
      ++bracketed;
    } else if (miss.empty()) {
      miss = fmt(" first miss: p01=%.3f p11=%.3f omega=%.3f W=%.5f gaps %.2e/%.2e", p.p01, p.p11, omega, w, below,
                 above);
    }
  }
  double worst_iid = 0.0;
  for (int k = 0; k < 5; ++k) {
    const double q = rng.uniform(0.1, 0.9);
    const double omega = rng.uniform(0.05, 0.95);
    worst_iid = std::max(worst_iid, std::abs(whittle_index(omega, {q, q}, cfg) - omega));
  }
  const double secs = seconds_since(t0);
  return {bracketed == 20 && worst_iid <= 1e-3 && secs < 300.0,
          fmt("oracle index inside W +/- 1e-3 for %d/20; p11=p01 max |W - omega| %.2e; %.1fs%s", bracketed,
              worst_iid, secs, miss.c_str())};
}

Outcome learning_period_tradeoff() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(9, 0));
  const std::uint64_t horizon = 100000;
  const std::uint64_t runs = 100;
  double sum200 = 0.0;
  double sum20 = 0.0;
  std::string per;
  const int instances = 3;
  for (int inst = 0; inst < instances; ++inst) {
    const auto ch = random_slotted(rng, 5);
    auto cfg = slotted_config(ch, SlottedPolicy::whittle_blind, 1, horizon, runs, 900 + inst);
    cfg.learning_period = 200;
    const auto long_lp = monte_carlo(cfg);
    cfg.learning_period = 20;
    const auto short_lp = monte_carlo(cfg);
    const double a = window_mean(long_lp.mean_trace, horizon - 10000, horizon);
    const double b = window_mean(short_lp.mean_trace, horizon - 10000, horizon);
    sum200 += a;
    sum20 += b;
    per += fmt(" [%.4f vs %.4f]", a, b);
  }
  const double secs = seconds_since(t0);
  return {sum200 >= sum20,
          fmt("final-window mean LP=200 %.4f, LP=20 %.4f; per instance%s; %.1fs", sum200 / instances,
              sum20 / instances, per.c_str(), secs)};
}

Outcome single_channel_constraint() {
  const auto t0 = Clock::now();
  Rng rng(derive_seed(10, 0));
  const double ts = 0.01;
  const auto sensing = SensingModel::perfect_sensing(ts);
  const std::size_t seeds = 50;
  bool ok = true;
  std::uint64_t sync = 0;
  double worst_z = -1e9;
  for (int inst = 0; inst < 10; ++inst) {
    const std::size_t n = 3;
    std::vector<UnslottedChannelParams> ch(n);
    std::vector<double> periods(n), imax(n);
    double longest = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      ch[i] = {rng.uniform(0.1, 1.0), rng.uniform(0.3, 2.0)};
      imax[i] = 0.25 * utilization(ch[i]);
      periods[i] = solve_access_period(ch[i], sensing, imax[i]);
      longest = std::max(longest, periods[i]);
    }
    std::vector<std::vector<double>> meas(n);
    for (std::size_t r = 0; r < seeds; ++r) {
      const auto m = simulate_single(ch, periods, sensing, ts, 0.0, 1e4, derive_seed(1000 + inst, r));
      sync += m.sync_failures;
      for (std::size_t i = 0; i < n; ++i) {
        if (m.channels[i].blocks > 0) meas[i].push_back(m.channels[i].interference);
      }
    }
    for (std::size_t i = 0; i < n; ++i) {
      if (meas[i].size() < 2) {
        ok = false;
        continue;
      }
      const auto s = stat_of(meas[i]);
      worst_z = std::max(worst_z, (s.mean - imax[i]) / s.se);
      ok = ok && s.mean <= imax[i] + 3.0 * s.se;
    }
  }
  const double secs = seconds_since(t0);
  return {ok && sync == 0, fmt("10 instances x %zu seeds: worst (measured - Imax) %.2f SE, sync failures %llu, %.1fs",
                               seeds, worst_z, static_cast<unsigned long long>(sync), secs)};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> check;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"cogmac acceptance checks"};
  std::vector<int> only;
  app.add_option("--only", only, "run only these criterion numbers");
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria = {
      {1, "unslotted strict reference case", strict_case},
      {2, "unslotted relaxed case and single-period baseline", relaxed_case},
      {3, "total opportunity", opportunity_bound},
      {4, "closed-form free time vs renewal equations", renewal_check},
      {5, "multi-channel simulator vs analytics", multi_sim_vs_analytics},
      {6, "slotted genie bound", genie_bound},
      {7, "blind convergence", blind_convergence},
      {8, "Whittle index vs value-iteration oracle", whittle_oracle},
      {9, "learning-period tradeoff", learning_period_tradeoff},
      {10, "single-channel interference constraint", single_channel_constraint},
  };

  int failures = 0;
  const auto t0 = Clock::now();
  for (const auto& c : criteria) {
    if (!only.empty() && std::find(only.begin(), only.end(), c.id) == only.end()) continue;
    Outcome o;
    try {
      o = c.check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << c.id << ". " << c.name << ": " << o.detail << std::endl;
  }
  std::cout << fmt("%d failure(s), total %.1fs", failures, seconds_since(t0)) << std::endl;
  return failures == 0 ? 0 : 1;
}
