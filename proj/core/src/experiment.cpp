#include "cogmac/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <set>
#include <sstream>
#include <thread>

#include "cogmac/belief.hpp"
#include "cogmac/csv.hpp"
#include "cogmac/errors.hpp"
#include "cogmac/random.hpp"
#include "cogmac/unslotted_sim.hpp"
#include "json.hpp"

namespace cogmac {

using Json = nlohmann::ordered_json;

std::string_view to_string(Scenario s) noexcept {
  switch (s) {
    case Scenario::slotted_full: return "slotted_full";
    case Scenario::slotted_partial: return "slotted_partial";
    case Scenario::unslotted_multi: return "unslotted_multi";
    case Scenario::unslotted_single: return "unslotted_single";
  }
  return "?";
}

Scenario parse_scenario(std::string_view name) {
  for (auto s : {Scenario::slotted_full, Scenario::slotted_partial, Scenario::unslotted_multi,
                 Scenario::unslotted_single}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("scenario: unknown value '" + std::string(name) + "'");
}

std::string_view to_string(UnslottedStrategy s) noexcept {
  switch (s) {
    case UnslottedStrategy::two_period: return "two_period";
    case UnslottedStrategy::single_period: return "single_period";
    case UnslottedStrategy::given: return "given";
  }
  return "?";
}

UnslottedStrategy parse_unslotted_strategy(std::string_view name) {
  for (auto s : {UnslottedStrategy::two_period, UnslottedStrategy::single_period, UnslottedStrategy::given}) {
    if (to_string(s) == name) return s;
  }
  throw ConfigError("unslotted.strategies: unknown strategy '" + std::string(name) + "'");
}

namespace {

std::string_view to_string(OverheadReading r) noexcept {
  return r == OverheadReading::literal ? "literal" : "cross_channel";
}

bool is_slotted(Scenario s) { return s == Scenario::slotted_full || s == Scenario::slotted_partial; }

// Rethrows library errors raised while checking a field as ConfigError with the path prefixed.
template <class F>
auto at_path(const std::string& path, F&& f) -> decltype(f()) {
  try {
    return f();
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what());
  } catch (const DomainError& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------- specs

SensingModel SensingSpec::model() const {
  SensingModel m;
  m.p_fa = p_fa;
  m.p_md = p_md;
  m.sampling_freq = sampling_freq;
  m.snr = snr_in_db ? db_to_linear(snr) : snr;
  m.sensing_time = resolved_sensing_time();
  return m;
}

double SensingSpec::resolved_sensing_time() const {
  if (sensing_time) return *sensing_time;
  return at_path("sensing", [&] {
    return compute_sensing_time(p_fa, p_md, snr_in_db ? db_to_linear(snr) : snr, sampling_freq);
  });
}

std::vector<SlottedChannelParams> SlottedSpec::resolved_channels() const {
  if (!random_channels) return channels;
  const auto& r = *random_channels;
  Rng rng(r.seed);
  std::vector<SlottedChannelParams> out(r.count);
  for (auto& c : out) {
    c.p01 = rng.uniform(r.low, r.high);
    c.p11 = rng.uniform(r.low, r.high);
    c.bandwidth = 1.0;
  }
  return out;
}

InterferenceConstraint InterferenceSpec::resolve(const std::vector<UnslottedChannelParams>& channels) const {
  if (fraction_of_utilization) return InterferenceConstraint::fraction_of_utilization(channels, *fraction_of_utilization);
  return {per_channel_max};
}

OptimizerOptions UnslottedSpec::optimizer_options() const {
  OptimizerOptions o;
  o.starts = optimizer_starts;
  o.grid_points = optimizer_grid_points;
  o.max_sweeps = optimizer_max_sweeps;
  o.seed = optimizer_seed;
  o.max_period_scale = max_period_scale;
  o.reading = overhead_reading;
  return o;
}

void ExperimentConfig::validate() const {
  if (name.empty()) throw ConfigError("name: must not be empty");
  if (runs < 1) throw ConfigError("runs: must be at least 1");
  if (output_dir.empty()) throw ConfigError("output_dir: must not be empty");
  at_path("sensing", [&] { sensing.model().validate(); });

  if (is_slotted(scenario)) {
    if (!slotted) throw ConfigError("slotted: section required for scenario " + std::string(to_string(scenario)));
    if (unslotted) throw ConfigError("unslotted: section not allowed for a slotted scenario");
    const auto& s = *slotted;
    if (s.random_channels && !s.channels.empty()) {
      throw ConfigError("slotted: give either channels or random_channels, not both");
    }
    if (s.random_channels) {
      const auto& r = *s.random_channels;
      if (r.count < 1) throw ConfigError("slotted.random_channels.count: must be at least 1");
      if (!(r.low >= 0.0 && r.low <= r.high && r.high <= 1.0)) {
        throw ConfigError("slotted.random_channels: need 0 <= low <= high <= 1");
      }
    } else if (s.channels.empty()) {
      throw ConfigError("slotted.channels: at least one channel is required");
    }
    const auto channels = s.resolved_channels();
    for (std::size_t i = 0; i < channels.size(); ++i) {
      at_path("slotted.channels[" + std::to_string(i) + "]", [&] { channels[i].validate(); });
    }
    const std::size_t n = channels.size();
    if (s.sense_count) {
      if (scenario == Scenario::slotted_full && *s.sense_count != n) {
        throw ConfigError("slotted.sense_count: slotted_full senses every channel (L = N)");
      }
      if (scenario == Scenario::slotted_partial && !(*s.sense_count >= 1 && *s.sense_count < n)) {
        throw ConfigError("slotted.sense_count: slotted_partial needs 1 <= L < N");
      }
    } else if (scenario == Scenario::slotted_partial && n < 2) {
      throw ConfigError("slotted.channels: slotted_partial needs at least two channels");
    }
    if (s.horizon < 1) throw ConfigError("slotted.horizon: must be at least 1");
    if (s.policies.empty()) throw ConfigError("slotted.policies: at least one policy is required");
    const std::size_t l = s.sense_count.value_or(scenario == Scenario::slotted_full ? n : 1);
    for (auto p : s.policies) {
      SlottedConfig sc;
      sc.channels = channels;
      sc.sensing = sensing.model();
      sc.sense_count = l;
      sc.horizon = s.horizon;
      sc.policy = p;
      sc.whittle_discount = s.whittle_discount;
      at_path("slotted.policies", [&] { sc.validate(); });
    }
  } else {
    if (!unslotted) throw ConfigError("unslotted: section required for scenario " + std::string(to_string(scenario)));
    if (slotted) throw ConfigError("slotted: section not allowed for an unslotted scenario");
    const auto& u = *unslotted;
    if (u.channels.empty()) throw ConfigError("unslotted.channels: at least one channel is required");
    for (std::size_t i = 0; i < u.channels.size(); ++i) {
      at_path("unslotted.channels[" + std::to_string(i) + "]", [&] { u.channels[i].validate(); });
    }
    const std::size_t n = u.channels.size();
    const auto& itf = u.interference;
    if (itf.fraction_of_utilization.has_value() == !itf.per_channel_max.empty()) {
      throw ConfigError("unslotted.interference: give exactly one of fraction_of_utilization, per_channel_max");
    }
    if (itf.fraction_of_utilization && !(*itf.fraction_of_utilization > 0.0 && *itf.fraction_of_utilization <= 1.0)) {
      throw ConfigError("unslotted.interference.fraction_of_utilization: must lie in (0, 1]");
    }
    if (!itf.per_channel_max.empty()) {
      if (itf.per_channel_max.size() != n) {
        throw ConfigError("unslotted.interference.per_channel_max: one value per channel");
      }
      for (double v : itf.per_channel_max) {
        if (!(v >= 0.0 && v <= 1.0)) throw ConfigError("unslotted.interference.per_channel_max: values in [0, 1]");
      }
    }
    if (!(u.horizon > 0.0) || !std::isfinite(u.horizon)) throw ConfigError("unslotted.horizon: must be positive");
    if (u.optimizer_starts < 1) throw ConfigError("unslotted.optimizer.starts: must be at least 1");
    if (u.optimizer_grid_points < 2) throw ConfigError("unslotted.optimizer.grid_points: must be at least 2");
    if (u.optimizer_max_sweeps < 1) throw ConfigError("unslotted.optimizer.max_sweeps: must be at least 1");
    if (!(u.max_period_scale > 0.0)) throw ConfigError("unslotted.optimizer.max_period_scale: must be positive");
    if (!(u.rts_cts_duration >= 0.0) || !std::isfinite(u.rts_cts_duration)) {
      throw ConfigError("unslotted.rts_cts_duration: must be finite and non-negative");
    }
    if (scenario == Scenario::unslotted_multi) {
      if (u.strategies.empty()) throw ConfigError("unslotted.strategies: at least one strategy is required");
      const bool wants_given =
          std::find(u.strategies.begin(), u.strategies.end(), UnslottedStrategy::given) != u.strategies.end();
      if (wants_given && u.given_periods.size() != n) {
        throw ConfigError("unslotted.given_periods: strategy 'given' needs one period pair per channel");
      }
      for (std::size_t i = 0; i < u.given_periods.size(); ++i) {
        at_path("unslotted.given_periods[" + std::to_string(i) + "]", [&] { u.given_periods[i].validate(); });
      }
      if (!u.access_periods.empty()) throw ConfigError("unslotted.access_periods: only for unslotted_single");
    } else {
      if (!u.given_periods.empty() || !u.strategies.empty()) {
        throw ConfigError("unslotted: strategies / given_periods apply to unslotted_multi only");
      }
      if (!u.access_periods.empty() && u.access_periods.size() != n) {
        throw ConfigError("unslotted.access_periods: one period per channel");
      }
      for (double t : u.access_periods) {
        if (!(t > 0.0) || !std::isfinite(t)) throw ConfigError("unslotted.access_periods: must be positive");
      }
      if (!(sensing.resolved_sensing_time() + u.rts_cts_duration > 0.0)) {
        throw ConfigError("unslotted: single-channel mode needs sensing_time + rts_cts_duration > 0");
      }
    }
  }
}

// ---------------------------------------------------------------- parsing

namespace {

// Reads one JSON object, remembering which keys were consumed.
class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(where() + ": expected an object");
  }

  bool has(const std::string& key) const { return j_.contains(key); }

  const Json* find(const std::string& key) {
    used_.insert(key);
    const auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  const Json& require(const std::string& key) {
    const Json* v = find(key);
    if (!v) throw ConfigError(sub(key) + ": required field missing");
    return *v;
  }

  double number(const std::string& key, double def) {
    const Json* v = find(key);
    return v ? as_number(*v, sub(key)) : def;
  }
  double number(const std::string& key) { return as_number(require(key), sub(key)); }

  std::uint64_t integer(const std::string& key, std::uint64_t def) {
    const Json* v = find(key);
    return v ? as_integer(*v, sub(key)) : def;
  }

  bool boolean(const std::string& key, bool def) {
    const Json* v = find(key);
    if (!v) return def;
    if (!v->is_boolean()) throw ConfigError(sub(key) + ": expected true or false");
    return v->get<bool>();
  }

  std::string string(const std::string& key, const std::string& def) {
    const Json* v = find(key);
    return v ? as_string(*v, sub(key)) : def;
  }
  std::string string(const std::string& key) { return as_string(require(key), sub(key)); }

  Reader object(const std::string& key) { return Reader(require(key), sub(key)); }

  const Json& array(const std::string& key) {
    const Json& v = require(key);
    if (!v.is_array()) throw ConfigError(sub(key) + ": expected an array");
    return v;
  }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) throw ConfigError(sub(key) + ": unknown key");
    }
  }

  std::string sub(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }
  std::string where() const { return path_.empty() ? "<root>" : path_; }

  static double as_number(const Json& v, const std::string& path) {
    if (!v.is_number()) throw ConfigError(path + ": expected a number");
    return v.get<double>();
  }
  static std::uint64_t as_integer(const Json& v, const std::string& path) {
    if (v.is_number_unsigned()) return v.get<std::uint64_t>();
    if (v.is_number_float()) {
      const double d = v.get<double>();
      if (d >= 0.0 && d < 1.8e19 && std::floor(d) == d) return static_cast<std::uint64_t>(d);
    }
    throw ConfigError(path + ": expected a non-negative integer");
  }
  static std::string as_string(const Json& v, const std::string& path) {
    if (!v.is_string()) throw ConfigError(path + ": expected a string");
    return v.get<std::string>();
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> used_;
};

std::vector<double> number_list(const Json& arr, const std::string& path) {
  std::vector<double> out;
  for (std::size_t i = 0; i < arr.size(); ++i) {
    out.push_back(Reader::as_number(arr[i], path + "[" + std::to_string(i) + "]"));
  }
  return out;
}

SensingSpec read_sensing(Reader r) {
  SensingSpec s;
  s.p_fa = r.number("p_fa", 0.0);
  s.p_md = r.number("p_md", 0.0);
  if (r.has("sensing_time")) {
    if (r.has("snr") || r.has("sampling_freq")) {
      throw ConfigError("sensing: give either sensing_time or snr with sampling_freq, not both");
    }
    s.sensing_time = r.number("sensing_time");
  } else if (r.has("snr")) {
    Reader snr = r.object("snr");
    s.snr = snr.number("value");
    const std::string unit = snr.string("unit", "linear");
    if (unit == "dB") {
      s.snr_in_db = true;
    } else if (unit != "linear") {
      throw ConfigError("sensing.snr.unit: expected 'dB' or 'linear'");
    }
    snr.finish();
    s.sampling_freq = r.number("sampling_freq");
  } else {
    s.sensing_time = 0.0;
  }
  r.finish();
  return s;
}

SlottedSpec read_slotted(Reader r, Scenario scenario) {
  SlottedSpec s;
  if (r.has("channels")) {
    const Json& arr = r.array("channels");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      Reader c(arr[i], "slotted.channels[" + std::to_string(i) + "]");
      SlottedChannelParams p;
      p.p01 = c.number("p01");
      p.p11 = c.number("p11");
      p.bandwidth = c.number("bandwidth", 1.0);
      c.finish();
      s.channels.push_back(p);
    }
  }
  if (r.has("random_channels")) {
    Reader c = r.object("random_channels");
    RandomSlottedChannels rc;
    rc.count = c.integer("count", rc.count);
    rc.low = c.number("low", rc.low);
    rc.high = c.number("high", rc.high);
    rc.seed = c.integer("seed", rc.seed);
    c.finish();
    s.random_channels = rc;
  }
  if (r.has("sense_count")) s.sense_count = r.integer("sense_count", 1);
  s.horizon = r.integer("horizon", s.horizon);
  if (r.has("policies")) {
    const Json& arr = r.array("policies");
    for (std::size_t i = 0; i < arr.size(); ++i) {
      const std::string path = "slotted.policies[" + std::to_string(i) + "]";
      const std::string name = Reader::as_string(arr[i], path);
      s.policies.push_back(at_path(path, [&] { return parse_slotted_policy(name); }));
    }
  } else if (scenario == Scenario::slotted_full) {
    s.policies = {SlottedPolicy::full_sensing_informed, SlottedPolicy::full_sensing_blind};
  } else {
    s.policies = {SlottedPolicy::whittle_informed, SlottedPolicy::whittle_blind};
  }
  s.learning_period = r.integer("learning_period", s.learning_period);
  s.whittle_discount = r.number("whittle_discount", s.whittle_discount);
  s.strict_transition_counting = r.boolean("strict_transition_counting", s.strict_transition_counting);
  s.estimation_window = r.integer("estimation_window", s.estimation_window);
  s.access_during_learning = r.boolean("access_during_learning", s.access_during_learning);
  s.threads = static_cast<unsigned>(r.integer("threads", s.threads));
  s.trace_stride = r.integer("trace_stride", s.trace_stride);
  r.finish();
  return s;
}

UnslottedSpec read_unslotted(Reader r, Scenario scenario) {
  UnslottedSpec u;
  const Json& arr = r.array("channels");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    Reader c(arr[i], "unslotted.channels[" + std::to_string(i) + "]");
    UnslottedChannelParams p;
    p.lambda_free = c.number("lambda_free");
    p.lambda_busy = c.number("lambda_busy");
    c.finish();
    u.channels.push_back(p);
  }
  {
    Reader itf = r.object("interference");
    if (itf.has("fraction_of_utilization")) {
      u.interference.fraction_of_utilization = itf.number("fraction_of_utilization");
    }
    if (itf.has("per_channel_max")) {
      u.interference.per_channel_max =
          number_list(itf.array("per_channel_max"), "unslotted.interference.per_channel_max");
    }
    itf.finish();
  }
  if (r.has("strategies")) {
    const Json& sa = r.array("strategies");
    for (std::size_t i = 0; i < sa.size(); ++i) {
      u.strategies.push_back(
          parse_unslotted_strategy(Reader::as_string(sa[i], "unslotted.strategies[" + std::to_string(i) + "]")));
    }
  } else if (scenario == Scenario::unslotted_multi) {
    u.strategies = {UnslottedStrategy::two_period, UnslottedStrategy::single_period};
  }
  if (r.has("given_periods")) {
    const Json& ga = r.array("given_periods");
    for (std::size_t i = 0; i < ga.size(); ++i) {
      Reader g(ga[i], "unslotted.given_periods[" + std::to_string(i) + "]");
      PeriodPair p;
      p.t_free = g.number("t_free");
      p.t_busy = g.number("t_busy");
      g.finish();
      u.given_periods.push_back(p);
    }
  }
  if (r.has("access_periods")) u.access_periods = number_list(r.array("access_periods"), "unslotted.access_periods");
  u.horizon = r.number("horizon", u.horizon);
  const std::string reading = r.string("overhead_reading", "cross_channel");
  if (reading == "literal") {
    u.overhead_reading = OverheadReading::literal;
  } else if (reading != "cross_channel") {
    throw ConfigError("unslotted.overhead_reading: expected 'cross_channel' or 'literal'");
  }
  if (r.has("optimizer")) {
    Reader o = r.object("optimizer");
    u.optimizer_starts = o.integer("starts", u.optimizer_starts);
    u.optimizer_grid_points = o.integer("grid_points", u.optimizer_grid_points);
    u.optimizer_max_sweeps = o.integer("max_sweeps", u.optimizer_max_sweeps);
    u.optimizer_seed = o.integer("seed", u.optimizer_seed);
    u.max_period_scale = o.number("max_period_scale", u.max_period_scale);
    o.finish();
  }
  u.rts_cts_duration = r.number("rts_cts_duration", u.rts_cts_duration);
  u.handshake_view_update = r.boolean("handshake_view_update", u.handshake_view_update);
  u.trace_bins = r.integer("trace_bins", u.trace_bins);
  u.threads = static_cast<unsigned>(r.integer("threads", u.threads));
  r.finish();
  return u;
}

}  // namespace

ExperimentConfig parse_config(std::string_view text) {
  Json doc;
  try {
    doc = Json::parse(text.begin(), text.end(), nullptr, true, /*ignore_comments=*/true);
  } catch (const Json::parse_error& e) {
    throw ConfigError(std::string("config syntax: ") + e.what());
  }
  Reader root(doc, "");
  ExperimentConfig c;
  c.scenario = parse_scenario(root.string("scenario"));
  c.name = root.string("name", c.name);
  c.seed = root.integer("seed", c.seed);
  c.runs = root.integer("runs", c.runs);
  c.output_dir = root.string("output_dir", c.output_dir);
  if (root.has("sensing")) {
    c.sensing = read_sensing(root.object("sensing"));
  } else {
    c.sensing.sensing_time = 0.0;
  }
  if (root.has("slotted")) c.slotted = read_slotted(root.object("slotted"), c.scenario);
  if (root.has("unslotted")) c.unslotted = read_unslotted(root.object("unslotted"), c.scenario);
  root.finish();
  c.validate();
  return c;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot read config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  Json doc;
  doc["scenario"] = std::string(to_string(c.scenario));
  doc["name"] = c.name;
  doc["seed"] = c.seed;
  doc["runs"] = c.runs;
  doc["output_dir"] = c.output_dir;

  Json sensing;
  sensing["p_fa"] = c.sensing.p_fa;
  sensing["p_md"] = c.sensing.p_md;
  if (c.sensing.sensing_time) {
    sensing["sensing_time"] = *c.sensing.sensing_time;
  } else {
    sensing["snr"] = {{"value", c.sensing.snr}, {"unit", c.sensing.snr_in_db ? "dB" : "linear"}};
    sensing["sampling_freq"] = c.sensing.sampling_freq;
  }
  doc["sensing"] = sensing;

  if (c.slotted) {
    const auto& s = *c.slotted;
    Json j;
    if (s.random_channels) {
      const auto& r = *s.random_channels;
      j["random_channels"] = {{"count", r.count}, {"low", r.low}, {"high", r.high}, {"seed", r.seed}};
    } else {
      Json arr = Json::array();
      for (const auto& ch : s.channels) arr.push_back({{"p01", ch.p01}, {"p11", ch.p11}, {"bandwidth", ch.bandwidth}});
      j["channels"] = arr;
    }
    if (s.sense_count) j["sense_count"] = *s.sense_count;
    j["horizon"] = s.horizon;
    Json pol = Json::array();
    for (auto p : s.policies) pol.push_back(std::string(to_string(p)));
    j["policies"] = pol;
    j["learning_period"] = s.learning_period;
    j["whittle_discount"] = s.whittle_discount;
    j["strict_transition_counting"] = s.strict_transition_counting;
    j["estimation_window"] = s.estimation_window;
    j["access_during_learning"] = s.access_during_learning;
    j["threads"] = s.threads;
    j["trace_stride"] = s.trace_stride;
    doc["slotted"] = j;
  }

  if (c.unslotted) {
    const auto& u = *c.unslotted;
    Json j;
    Json arr = Json::array();
    for (const auto& ch : u.channels) arr.push_back({{"lambda_free", ch.lambda_free}, {"lambda_busy", ch.lambda_busy}});
    j["channels"] = arr;
    Json itf = Json::object();
    if (u.interference.fraction_of_utilization) {
      itf["fraction_of_utilization"] = *u.interference.fraction_of_utilization;
    }
    if (!u.interference.per_channel_max.empty()) itf["per_channel_max"] = u.interference.per_channel_max;
    j["interference"] = itf;
    if (!u.strategies.empty()) {
      Json st = Json::array();
      for (auto s : u.strategies) st.push_back(std::string(to_string(s)));
      j["strategies"] = st;
    }
    if (!u.given_periods.empty()) {
      Json gp = Json::array();
      for (const auto& p : u.given_periods) gp.push_back({{"t_free", p.t_free}, {"t_busy", p.t_busy}});
      j["given_periods"] = gp;
    }
    if (!u.access_periods.empty()) j["access_periods"] = u.access_periods;
    j["horizon"] = u.horizon;
    j["overhead_reading"] = std::string(to_string(u.overhead_reading));
    j["optimizer"] = {{"starts", u.optimizer_starts},
                      {"grid_points", u.optimizer_grid_points},
                      {"max_sweeps", u.optimizer_max_sweeps},
                      {"seed", u.optimizer_seed},
                      {"max_period_scale", u.max_period_scale}};
    j["rts_cts_duration"] = u.rts_cts_duration;
    j["handshake_view_update"] = u.handshake_view_update;
    j["trace_bins"] = u.trace_bins;
    j["threads"] = u.threads;
    doc["unslotted"] = j;
  }
  return doc.dump(2) + "\n";
}

// ---------------------------------------------------------------- running

namespace {

// fn(run) for run in [0, n) on `threads` workers; results kept in run order.
template <class T>
std::vector<T> parallel_runs(std::size_t n, unsigned threads, const std::function<T(std::size_t)>& fn) {
  const unsigned workers = std::max(1u, threads == 0 ? std::thread::hardware_concurrency() : threads);
  std::vector<T> out(n);
  std::vector<std::exception_ptr> errors(n);
  auto work = [&](std::size_t w) {
    for (std::size_t r = w; r < n; r += workers) {
      try {
        out[r] = fn(r);
      } catch (...) {
        errors[r] = std::current_exception();
      }
    }
  };
  if (workers == 1 || n <= 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < std::min<std::size_t>(workers, n); ++w) pool.emplace_back(work, w);
    for (auto& t : pool) t.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return out;
}

struct MeanSe {
  double mean = 0.0;
  double se = 0.0;
};

MeanSe mean_se(const std::vector<double>& xs) {
  MeanSe m;
  if (xs.empty()) return m;
  for (double x : xs) m.mean += x;
  m.mean /= static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.se = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
  }
  return m;
}

void opt_field(CsvWriter& w, const std::optional<double>& v) {
  if (v) {
    w.field(*v);
  } else {
    w.field(std::string_view());
  }
}

struct Tables {
  std::ostringstream summary, trace, channels;
};

void write_summary(Tables& t, Scenario scenario, const std::vector<SummaryRow>& rows) {
  const std::string unit = is_slotted(scenario) ? "[B/slot]" : "[ch]";
  CsvWriter w(t.summary);
  w.header({"scenario", "policy", "runs[count]", "mean_throughput" + unit, "standard_error" + unit,
            "analytic_throughput" + unit, "bound" + unit, "constraint_slack[fraction]", "empirical_slack[fraction]",
            "sync_violations[count]", "collisions[count]"});
  for (const auto& r : rows) {
    w.field(to_string(scenario)).field(r.policy).field(static_cast<std::uint64_t>(r.runs));
    w.field(r.mean_throughput).field(r.standard_error);
    opt_field(w, r.analytic_throughput);
    w.field(r.bound);
    opt_field(w, r.constraint_slack);
    opt_field(w, r.empirical_slack);
    w.field(r.sync_violations).field(r.collisions);
    w.end_row();
  }
}

std::vector<SummaryRow> run_slotted(const ExperimentConfig& cfg, Tables& t) {
  const auto& s = *cfg.slotted;
  const auto channels = s.resolved_channels();
  const double bound = genie_throughput_bound(channels);
  const std::size_t n = channels.size();
  const std::size_t l = s.sense_count.value_or(cfg.scenario == Scenario::slotted_full ? n : 1);
  const std::uint64_t stride = s.trace_stride > 0 ? s.trace_stride : std::max<std::uint64_t>(1, s.horizon / 1000);

  CsvWriter tw(t.trace);
  tw.header({"policy", "slot[slot]", "cumulative_throughput[B/slot]", "standard_error[B/slot]"});

  std::vector<SummaryRow> rows;
  for (auto policy : s.policies) {
    SlottedConfig sc;
    sc.channels = channels;
    sc.sensing = cfg.sensing.model();
    sc.sense_count = l;
    sc.horizon = s.horizon;
    sc.policy = policy;
    sc.learning_period = s.learning_period;
    sc.seed = cfg.seed;
    sc.block_count = cfg.runs;
    sc.whittle_discount = s.whittle_discount;
    sc.strict_transition_counting = s.strict_transition_counting;
    sc.estimation_window = s.estimation_window;
    sc.access_during_learning = s.access_during_learning;
    sc.threads = s.threads;
    const auto mc = monte_carlo(sc);

    SummaryRow row;
    row.policy = std::string(to_string(policy));
    row.runs = cfg.runs;
    row.mean_throughput = mc.mean_throughput;
    row.standard_error = mc.standard_error;
    row.bound = bound;
    row.sync_violations = mc.sync_violations;
    row.collisions = mc.collisions;
    rows.push_back(row);

    for (std::uint64_t k = stride; k <= s.horizon; k += stride) {
      tw.field(row.policy).field(k).field(mc.mean_trace[k - 1]).field(mc.stderr_trace[k - 1]);
      tw.end_row();
    }
    if (s.horizon % stride != 0) {
      tw.field(row.policy).field(s.horizon).field(mc.mean_trace.back()).field(mc.stderr_trace.back());
      tw.end_row();
    }
  }

  CsvWriter cw(t.channels);
  cw.header({"channel", "p01[prob]", "p11[prob]", "bandwidth[B]", "steady_state_free[prob]"});
  for (std::size_t i = 0; i < n; ++i) {
    cw.field(static_cast<std::uint64_t>(i)).field(channels[i].p01).field(channels[i].p11);
    cw.field(channels[i].bandwidth).field(steady_state_free_prob(channels[i]));
    cw.end_row();
  }
  return rows;
}

// Periods of one unslotted_multi strategy plus its analytic network R.
struct StrategyPeriods {
  std::vector<PeriodPair> periods;
  double objective = 0.0;
};

StrategyPeriods strategy_periods(const ExperimentConfig& cfg, UnslottedStrategy strategy) {
  const auto& u = *cfg.unslotted;
  const auto model = cfg.sensing.model();
  const double ts = model.sensing_time;
  const auto constraint = u.interference.resolve(u.channels);
  StrategyPeriods out;
  switch (strategy) {
    case UnslottedStrategy::two_period:
      out.periods = optimize_two_periods(u.channels, model, ts, constraint, u.optimizer_options()).periods;
      break;
    case UnslottedStrategy::single_period:
      out.periods = optimize_single_period(u.channels, model, ts, constraint, u.optimizer_options()).periods;
      break;
    case UnslottedStrategy::given:
      out.periods = u.given_periods;
      break;
  }
  out.objective = network_throughput(u.channels, out.periods, model, ts, u.overhead_reading);
  return out;
}

std::vector<double> single_access_periods(const ExperimentConfig& cfg) {
  const auto& u = *cfg.unslotted;
  if (!u.access_periods.empty()) return u.access_periods;
  const auto model = cfg.sensing.model();
  const auto constraint = u.interference.resolve(u.channels);
  double longest = 0.0;
  for (const auto& c : u.channels) longest = std::max({longest, c.mean_free(), c.mean_busy()});
  std::vector<double> out;
  for (std::size_t i = 0; i < u.channels.size(); ++i) {
    out.push_back(solve_access_period(u.channels[i], model, constraint.per_channel_max[i], u.max_period_scale * longest));
  }
  return out;
}

void binned_trace(CsvWriter& w, const std::string& label, const std::vector<EmpiricalMetrics>& runs, double horizon,
                  std::size_t bins) {
  if (bins == 0) return;
  const double width = horizon / static_cast<double>(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    std::vector<double> xs;
    xs.reserve(runs.size());
    for (const auto& r : runs) xs.push_back(r.binned_throughput[b]);
    const auto m = mean_se(xs);
    w.field(label).field(static_cast<double>(b) * width).field(static_cast<double>(b + 1) * width);
    w.field(m.mean).field(m.se);
    w.end_row();
  }
}

std::vector<SummaryRow> run_unslotted(const ExperimentConfig& cfg, Tables& t) {
  const auto& u = *cfg.unslotted;
  const auto model = cfg.sensing.model();
  const double ts = model.sensing_time;
  const auto constraint = u.interference.resolve(u.channels);
  const double bound = total_opportunity(u.channels);
  const std::size_t n = u.channels.size();
  UnslottedSimOptions opts;
  opts.bins = u.trace_bins;
  opts.handshake_view_update = u.handshake_view_update;

  CsvWriter tw(t.trace);
  tw.header({"strategy", "bin_start[time]", "bin_end[time]", "throughput[ch]", "standard_error[ch]"});
  CsvWriter cw(t.channels);
  cw.header({"strategy", "channel", "lambda_free[1/time]", "lambda_busy[1/time]", "t_free[time]", "t_busy[time]",
             "t_imax[fraction]", "analytic_utilization[fraction]", "analytic_unexplored[fraction]",
             "analytic_interference[fraction]", "analytic_overhead[fraction]", "empirical_utilization[fraction]",
             "empirical_unexplored[fraction]", "empirical_interference[fraction]", "empirical_overhead[fraction]"});

  auto channel_means = [&](const std::vector<EmpiricalMetrics>& runs, auto field, bool skip_empty_blocks) {
    std::vector<double> out(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> xs;
      for (const auto& r : runs) {
        if (skip_empty_blocks && r.channels[i].blocks == 0) continue;
        xs.push_back(r.channels[i].*field);
      }
      out[i] = mean_se(xs).mean;
    }
    return out;
  };

  std::vector<SummaryRow> rows;
  if (cfg.scenario == Scenario::unslotted_multi) {
    for (auto strategy : u.strategies) {
      const auto sp = strategy_periods(cfg, strategy);
      const auto analytic = network_metrics(u.channels, sp.periods, model, ts, u.overhead_reading);
      const auto runs = parallel_runs<EmpiricalMetrics>(cfg.runs, u.threads, [&](std::size_t r) {
        return simulate_multi(u.channels, sp.periods, model, ts, u.horizon, derive_seed(cfg.seed, r), opts);
      });
      std::vector<double> rates;
      for (const auto& r : runs) rates.push_back(r.throughput);
      const auto ms = mean_se(rates);
      const auto e_su = channel_means(runs, &ChannelEmpirical::secondary_utilization, false);
      const auto e_un = channel_means(runs, &ChannelEmpirical::unexplored, false);
      const auto e_in = channel_means(runs, &ChannelEmpirical::interference, false);
      const auto e_oh = channel_means(runs, &ChannelEmpirical::overhead, false);

      SummaryRow row;
      row.policy = std::string(to_string(strategy));
      row.runs = cfg.runs;
      row.mean_throughput = ms.mean;
      row.standard_error = ms.se;
      row.analytic_throughput = sp.objective;
      row.bound = bound;
      double slack = std::numeric_limits<double>::infinity();
      double eslack = slack;
      for (std::size_t i = 0; i < n; ++i) {
        slack = std::min(slack, constraint.per_channel_max[i] - analytic[i].interference);
        eslack = std::min(eslack, constraint.per_channel_max[i] - e_in[i]);
        cw.field(row.policy).field(static_cast<std::uint64_t>(i)).field(u.channels[i].lambda_free);
        cw.field(u.channels[i].lambda_busy).field(sp.periods[i].t_free).field(sp.periods[i].t_busy);
        cw.field(constraint.per_channel_max[i]).field(analytic[i].secondary_utilization).field(analytic[i].unexplored);
        cw.field(analytic[i].interference).field(analytic[i].overhead);
        cw.field(e_su[i]).field(e_un[i]).field(e_in[i]).field(e_oh[i]);
        cw.end_row();
      }
      row.constraint_slack = slack;
      row.empirical_slack = eslack;
      rows.push_back(row);
      binned_trace(tw, row.policy, runs, u.horizon, u.trace_bins);
    }
    return rows;
  }

  // single-channel hopping
  const auto periods = single_access_periods(cfg);
  const auto runs = parallel_runs<EmpiricalMetrics>(cfg.runs, u.threads, [&](std::size_t r) {
    return simulate_single(u.channels, periods, model, ts, u.rts_cts_duration, u.horizon, derive_seed(cfg.seed, r),
                           opts);
  });
  std::vector<double> rates;
  std::uint64_t sync = 0;
  for (const auto& r : runs) {
    rates.push_back(r.throughput);
    sync += r.sync_failures;
  }
  const auto ms = mean_se(rates);
  const auto e_su = channel_means(runs, &ChannelEmpirical::secondary_utilization, false);
  const auto e_un = channel_means(runs, &ChannelEmpirical::unexplored, false);
  const auto e_in = channel_means(runs, &ChannelEmpirical::interference, true);
  const auto e_oh = channel_means(runs, &ChannelEmpirical::overhead, false);
  SummaryRow row;
  row.policy = "single_channel";
  row.runs = cfg.runs;
  row.mean_throughput = ms.mean;
  row.standard_error = ms.se;
  row.bound = bound;
  row.sync_violations = sync;
  double slack = std::numeric_limits<double>::infinity();
  double eslack = slack;
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = single_channel_interference(u.channels[i], periods[i], model);
    slack = std::min(slack, constraint.per_channel_max[i] - ti);
    eslack = std::min(eslack, constraint.per_channel_max[i] - e_in[i]);
    cw.field(row.policy).field(static_cast<std::uint64_t>(i)).field(u.channels[i].lambda_free);
    cw.field(u.channels[i].lambda_busy).field(periods[i]).field(std::string_view());
    cw.field(constraint.per_channel_max[i]).field(std::string_view()).field(std::string_view());
    cw.field(ti).field(std::string_view());
    cw.field(e_su[i]).field(e_un[i]).field(e_in[i]).field(e_oh[i]);
    cw.end_row();
  }
  row.constraint_slack = slack;
  row.empirical_slack = eslack;
  rows.push_back(row);
  binned_trace(tw, row.policy, runs, u.horizon, u.trace_bins);
  return rows;
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("output_dir: cannot write '" + path.string() + "'");
  out << content;
  if (!out) throw ConfigError("output_dir: write failed for '" + path.string() + "'");
}

}  // namespace

ExperimentOutput run_experiment(const ExperimentConfig& config) {
  config.validate();
  Tables tables;
  ExperimentOutput out;
  out.summary = is_slotted(config.scenario) ? run_slotted(config, tables) : run_unslotted(config, tables);
  write_summary(tables, config.scenario, out.summary);

  const std::filesystem::path dir(config.output_dir);
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("output_dir: cannot create '" + dir.string() + "': " + ec.message());
  for (const auto& [name, stream] : {std::pair<const char*, const std::ostringstream*>{"summary.csv", &tables.summary},
                                     {"trace.csv", &tables.trace},
                                     {"channels.csv", &tables.channels}}) {
    write_file(dir / name, stream->str());
    out.files.push_back(dir / name);
  }
  return out;
}

ExperimentOutput run_experiment(const std::filesystem::path& config_path) {
  return run_experiment(load_config(config_path));
}

std::vector<PeriodRow> optimize_periods(const ExperimentConfig& config) {
  config.validate();
  if (is_slotted(config.scenario)) throw ConfigError("optimize: only unslotted scenarios have sensing periods");
  const auto& u = *config.unslotted;
  const auto model = config.sensing.model();
  const auto constraint = u.interference.resolve(u.channels);
  std::vector<PeriodRow> rows;
  if (config.scenario == Scenario::unslotted_multi) {
    for (auto strategy : u.strategies) {
      const auto sp = strategy_periods(config, strategy);
      const auto m = network_metrics(u.channels, sp.periods, model, model.sensing_time, u.overhead_reading);
      for (std::size_t i = 0; i < u.channels.size(); ++i) {
        rows.push_back({std::string(to_string(strategy)), i, sp.periods[i].t_free, sp.periods[i].t_busy,
                        m[i].interference, constraint.per_channel_max[i], sp.objective});
      }
    }
    return rows;
  }
  const auto periods = single_access_periods(config);
  for (std::size_t i = 0; i < u.channels.size(); ++i) {
    rows.push_back({"single_channel", i, periods[i], 0.0,
                    single_channel_interference(u.channels[i], periods[i], model), constraint.per_channel_max[i],
                    std::numeric_limits<double>::quiet_NaN()});
  }
  return rows;
}

void write_period_table(std::ostream& out, const std::vector<PeriodRow>& rows) {
  CsvWriter w(out);
  w.header({"strategy", "channel", "t_free[time]", "t_busy[time]", "interference[fraction]", "t_imax[fraction]",
            "objective[ch]"});
  for (const auto& r : rows) {
    w.field(r.strategy).field(static_cast<std::uint64_t>(r.channel)).field(r.t_free);
    if (r.strategy == "single_channel") {
      w.field(std::string_view());
    } else {
      w.field(r.t_busy);
    }
    w.field(r.interference).field(r.t_imax);
    if (std::isnan(r.objective)) {
      w.field(std::string_view());
    } else {
      w.field(r.objective);
    }
    w.end_row();
  }
}

}  // namespace cogmac
