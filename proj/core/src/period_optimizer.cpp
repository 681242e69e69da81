#include "cogmac/period_optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cogmac/errors.hpp"
#include "cogmac/random.hpp"

namespace cogmac {

InterferenceConstraint InterferenceConstraint::fraction_of_utilization(
    std::span<const UnslottedChannelParams> params, double factor) {
  InterferenceConstraint c;
  c.per_channel_max.reserve(params.size());
  for (const auto& p : params) c.per_channel_max.push_back(factor * utilization(p));
  return c;
}

namespace {

// T^I of one channel; same expression as channel_metrics without the rest.
double interference(const UnslottedChannelParams& params, const PeriodPair& pp, const SensingModel& sensing) {
  const double pss = steady_state_sense_free(params, pp);
  const double mu = mean_sense_interval(params, pp, sensing);
  const double tf = pp.t_free;
  return (1.0 - sensing.p_fa) * pss * (tf - delta(params, ChannelState::free, tf)) / mu +
         sensing.p_md * (1.0 - pss) * (tf - delta(params, ChannelState::busy, tf)) / mu;
}

class Problem {
 public:
  Problem(std::span<const UnslottedChannelParams> params, const SensingModel& sensing, double sensing_time,
          const InterferenceConstraint& constraint, const OptimizerOptions& options)
      : params_(params), sensing_(sensing), ts_(sensing_time), imax_(constraint.per_channel_max), opt_(options) {
    if (params.empty()) throw ConfigError("optimizer: at least one channel is required");
    if (imax_.size() != params.size()) throw DimensionError("optimizer: one interference bound per channel");
    for (const auto& p : params) p.validate();
    sensing.validate();
    if (!(sensing_time >= 0.0)) throw ConfigError("optimizer: sensing time must be non-negative");
    for (double m : imax_) {
      if (!(m > 0.0)) throw InfeasibleError("optimizer: interference bounds must be positive");
    }
    if (options.starts < 1 || options.grid_points < 2 || options.max_sweeps < 1) {
      throw ConfigError("optimizer: starts, grid_points and max_sweeps must be positive");
    }
    lo_ = options.min_period > 0.0 ? options.min_period : std::max(sensing_time, 1e-6);
    double longest = 0.0;
    for (const auto& p : params) longest = std::max({longest, p.mean_free(), p.mean_busy()});
    hi_ = options.max_period_scale * longest;
    typical_hi_ = std::min(hi_, 10.0 * longest);
    if (!(hi_ > lo_)) throw ConfigError("optimizer: empty period range");
  }

  std::size_t size() const { return params_.size(); }
  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double typical_hi() const { return typical_hi_; }
  const OptimizerOptions& options() const { return opt_; }

  double objective(const std::vector<PeriodPair>& periods) const {
    const auto m = network_metrics(params_, periods, sensing_, ts_, opt_.reading);
    double r = 0.0;
    for (const auto& c : m) r += c.throughput();
    return r;
  }

  double interference_of(std::size_t i, const PeriodPair& pp) const { return interference(params_[i], pp, sensing_); }
  double bound(std::size_t i) const { return imax_[i]; }

  // Largest feasible T^F for this T^B (negative when even lo violates).
  // `single` ties the two periods together.
  double max_free_period(std::size_t i, double t_busy, bool single) const {
    auto ti = [&](double tf) { return interference_of(i, {tf, single ? tf : t_busy}); };
    if (ti(hi_) <= imax_[i]) return hi_;
    if (ti(lo_) > imax_[i]) return -1.0;
    double a = std::log(lo_);
    double b = std::log(hi_);
    for (int k = 0; k < 200 && b - a > 1e-14; ++k) {
      const double mid = 0.5 * (a + b);
      (ti(std::exp(mid)) <= imax_[i] ? a : b) = mid;
    }
    return std::exp(a);
  }

 private:
  std::span<const UnslottedChannelParams> params_;
  SensingModel sensing_;
  double ts_;
  std::vector<double> imax_;
  OptimizerOptions opt_;
  double lo_ = 0.0;
  double hi_ = 0.0;
  double typical_hi_ = 0.0;
};

struct Candidate {
  double log_tf;
  double log_tb;
};

// Improves channel i in place with everything else fixed. Works in log
// periods; every candidate is projected onto the feasible set first.
class ChannelSearch {
 public:
  ChannelSearch(const Problem& p, std::vector<PeriodPair>& periods, std::size_t i, bool single)
      : p_(p), periods_(periods), i_(i), single_(single) {}

  // Projects and evaluates; returns false for an infeasible candidate.
  bool evaluate(Candidate& c, double& value) {
    const double llo = std::log(p_.lo());
    const double lhi = std::log(p_.hi());
    c.log_tb = std::clamp(c.log_tb, llo, lhi);
    if (single_) c.log_tb = std::clamp(c.log_tf, llo, lhi);
    const double cap = p_.max_free_period(i_, std::exp(c.log_tb), single_);
    if (cap < 0.0) return false;
    c.log_tf = std::clamp(c.log_tf, llo, std::log(cap));
    if (single_) c.log_tb = c.log_tf;
    const PeriodPair saved = periods_[i_];
    periods_[i_] = {std::exp(c.log_tf), std::exp(c.log_tb)};
    value = p_.objective(periods_);
    periods_[i_] = saved;
    return true;
  }

  Candidate boundary(double log_tb) {
    const double cap = p_.max_free_period(i_, std::exp(log_tb), single_);
    return {cap > 0.0 ? std::log(cap) : std::log(p_.lo()), log_tb};
  }

  // Best feasible point of a log-spaced grid; false if none is feasible.
  bool grid_seed(Candidate& best, double& best_value) {
    const std::size_t g = p_.options().grid_points;
    const double llo = std::log(p_.lo());
    const double lhi = std::log(p_.hi());
    bool found = false;
    const std::size_t rows = single_ ? 1 : g;
    for (std::size_t a = 0; a < g; ++a) {
      for (std::size_t b = 0; b < rows; ++b) {
        const double x = llo + (lhi - llo) * static_cast<double>(a) / static_cast<double>(g - 1);
        const double y = single_ ? x : llo + (lhi - llo) * static_cast<double>(b) / static_cast<double>(g - 1);
        Candidate c{x, y};
        double v = 0.0;
        if (evaluate(c, v) && (!found || v > best_value)) {
          best = c;
          best_value = v;
          found = true;
        }
      }
    }
    return found;
  }

  // Compass search with an extra move that slides along the constraint
  // boundary, where the optimum usually sits.
  void pattern_search(Candidate& at, double& value, double step) {
    while (step > 1e-10) {
      Candidate best = at;
      double best_value = value;
      auto consider = [&](Candidate c) {
        double v = 0.0;
        if (evaluate(c, v) && v > best_value) {
          best = c;
          best_value = v;
        }
      };
      for (int dx = -1; dx <= 1; ++dx) {
        for (int dy = -1; dy <= 1; ++dy) {
          if (dx == 0 && dy == 0) continue;
          if (single_ && dy != 0) continue;
          consider({at.log_tf + dx * step, at.log_tb + dy * step});
        }
      }
      if (!single_) {
        for (int dy = -1; dy <= 1; dy += 2) consider(boundary(at.log_tb + dy * step));
      }
      if (best_value > value) {
        at = best;
        value = best_value;
      } else {
        step *= 0.5;
      }
    }
    periods_[i_] = {std::exp(at.log_tf), std::exp(at.log_tb)};
  }

 private:
  const Problem& p_;
  std::vector<PeriodPair>& periods_;
  std::size_t i_;
  bool single_;
};

struct StartOutcome {
  std::vector<PeriodPair> periods;
  double objective = 0.0;
  std::size_t sweeps = 0;
  bool converged = false;
};

StartOutcome run_start(const Problem& p, std::size_t start, bool single) {
  const std::size_t n = p.size();
  const auto& opt = p.options();
  Rng rng(derive_seed(opt.seed, start));
  const double llo = std::log(p.lo());
  const double ltyp = std::log(p.typical_hi());

  StartOutcome out;
  out.periods.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = start == 0 ? 0.5 * (llo + ltyp) : rng.uniform(llo, ltyp);
    const double y = single ? x : (start == 0 ? 0.5 * (llo + ltyp) : rng.uniform(llo, ltyp));
    out.periods[i] = {std::exp(x), std::exp(y)};
  }
  // make the initial point feasible
  for (std::size_t i = 0; i < n; ++i) {
    ChannelSearch search(p, out.periods, i, single);
    Candidate c{std::log(out.periods[i].t_free), std::log(out.periods[i].t_busy)};
    double v = 0.0;
    if (!search.evaluate(c, v) && !search.grid_seed(c, v)) {
      throw InfeasibleError("optimizer: channel " + std::to_string(i) + " has no feasible period pair");
    }
    out.periods[i] = {std::exp(c.log_tf), std::exp(c.log_tb)};
  }

  double value = p.objective(out.periods);
  for (std::size_t sweep = 0; sweep < opt.max_sweeps; ++sweep) {
    const double before = value;
    for (std::size_t i = 0; i < n; ++i) {
      ChannelSearch search(p, out.periods, i, single);
      Candidate at{std::log(out.periods[i].t_free), std::log(out.periods[i].t_busy)};
      double v = value;
      if (start == 0 && sweep == 0) {
        Candidate seeded{};
        double seeded_value = 0.0;
        if (search.grid_seed(seeded, seeded_value) && seeded_value > v) {
          at = seeded;
          v = seeded_value;
        }
      }
      search.pattern_search(at, v, sweep == 0 ? 1.0 : 0.25);
      value = v;
    }
    out.sweeps = sweep + 1;
    if (value - before < opt.improvement_tol) {
      out.converged = true;
      break;
    }
  }
  out.objective = value;
  return out;
}

OptimizationResult optimize(std::span<const UnslottedChannelParams> params, const SensingModel& sensing,
                            double sensing_time, const InterferenceConstraint& constraint,
                            const OptimizerOptions& options, bool single) {
  const Problem p(params, sensing, sensing_time, constraint, options);
  std::vector<StartOutcome> outcomes;
  outcomes.reserve(options.starts);
  for (std::size_t s = 0; s < options.starts; ++s) outcomes.push_back(run_start(p, s, single));

  std::size_t best = options.starts;
  for (std::size_t s = 0; s < outcomes.size(); ++s) {
    if (!outcomes[s].converged) continue;
    if (best == options.starts || outcomes[s].objective > outcomes[best].objective) best = s;
  }
  if (best == options.starts) throw ConvergenceError("optimizer: no start converged within max_sweeps");

  OptimizationResult r;
  r.periods = outcomes[best].periods;
  r.objective = outcomes[best].objective;
  r.iterations = outcomes[best].sweeps;
  r.converged = true;
  r.best_start = best;
  r.constraint_slack.resize(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) {
    r.constraint_slack[i] = p.bound(i) - p.interference_of(i, r.periods[i]);
    if (r.constraint_slack[i] < -options.feasibility_tol) {
      throw InfeasibleError("optimizer: returned point violates the interference bound of channel " +
                            std::to_string(i));
    }
  }
  return r;
}

}  // namespace

OptimizationResult optimize_two_periods(std::span<const UnslottedChannelParams> params, const SensingModel& sensing,
                                        double sensing_time, const InterferenceConstraint& constraint,
                                        const OptimizerOptions& options) {
  return optimize(params, sensing, sensing_time, constraint, options, false);
}

OptimizationResult optimize_single_period(std::span<const UnslottedChannelParams> params,
                                          const SensingModel& sensing, double sensing_time,
                                          const InterferenceConstraint& constraint,
                                          const OptimizerOptions& options) {
  return optimize(params, sensing, sensing_time, constraint, options, true);
}

namespace {

// t + (exp(-s t) - 1) / s divided by t, stable near 0.
double ramp_ratio(double s, double t) {
  const double x = s * t;
  if (x < 1e-5) return x * (0.5 - x / 6.0);
  return 1.0 + std::expm1(-x) / x;
}

}  // namespace

double single_channel_interference(const UnslottedChannelParams& params, double t_free,
                                   const SensingModel& sensing) {
  params.validate();
  if (!(t_free > 0.0)) throw DomainError("single_channel_interference: t_free must be positive");
  const double u = utilization(params);
  const double r = ramp_ratio(params.total_rate(), t_free);
  // (T - delta1(T)) / T = u r,  (T - delta0(T)) / T = 1 - (1 - u) r
  return (1.0 - sensing.p_fa) * u * r + sensing.p_md * (1.0 - (1.0 - u) * r);
}

double solve_access_period(const UnslottedChannelParams& params, const SensingModel& sensing, double t_imax,
                           double max_period) {
  params.validate();
  if (!(t_imax > 0.0)) throw DomainError("solve_access_period: t_imax must be positive");
  auto f = [&](double t) { return single_channel_interference(params, t, sensing) - t_imax; };
  const double scale = 1.0 / params.total_rate();
  // when interference rises with the period it only approaches this limit
  const double u = utilization(params);
  const bool rising = (1.0 - sensing.p_fa) * u > sensing.p_md * (1.0 - u);
  if (rising && t_imax >= (1.0 - 1e-12) * u * (1.0 - sensing.p_fa + sensing.p_md)) throw InfeasibleError("solve_access_period: no finite access period reaches the bound");
  double lo = 1e-12 * scale;
  if (f(lo) > 0.0) throw InfeasibleError("solve_access_period: bound is below the interference of any period");
  double hi = scale;
  while (f(hi) < 0.0) {
    if (hi >= max_period) throw InfeasibleError("solve_access_period: no finite access period reaches the bound");
    hi = std::min(hi * 2.0, max_period);
    if (hi > 1e300) throw InfeasibleError("solve_access_period: no finite access period reaches the bound");
  }
  for (int k = 0; k < 400; ++k) {
    const double mid = 0.5 * (lo + hi);
    const double v = f(mid);
    if (std::abs(v) < 1e-12 || hi - lo <= 1e-15 * hi) return mid;
    (v < 0.0 ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<std::size_t> channel_priority_order(std::span<const ChannelState> last_states,
                                                std::span<const double> last_sense_times, double now,
                                                std::span<const UnslottedChannelParams> params,
                                                double sensing_time) {
  const std::size_t n = params.size();
  if (last_states.size() != n || last_sense_times.size() != n) {
    throw DimensionError("channel_priority_order: one state and time per channel");
  }
  if (!(sensing_time > 0.0)) throw DomainError("channel_priority_order: sensing time must be positive");
  std::vector<double> gamma(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (!(now >= last_sense_times[i])) throw DomainError("channel_priority_order: sensing time lies in the future");
    gamma[i] = transition_prob(params[i], last_states[i], now - last_sense_times[i]) / sensing_time;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return gamma[a] > gamma[b]; });
  return order;
}

}  // namespace cogmac
