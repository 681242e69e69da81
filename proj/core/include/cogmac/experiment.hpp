#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cogmac/model.hpp"
#include "cogmac/period_optimizer.hpp"
#include "cogmac/renewal.hpp"
#include "cogmac/slotted_sim.hpp"

namespace cogmac {

enum class Scenario : std::uint8_t { slotted_full, slotted_partial, unslotted_multi, unslotted_single };

std::string_view to_string(Scenario s) noexcept;
Scenario parse_scenario(std::string_view name);

/// Sensing section. Either `sensing_time` is given directly or it is derived
/// from (p_fa, p_md, snr, sampling_freq) with compute_sensing_time.
struct SensingSpec {
  double p_fa = 0.0;
  double p_md = 0.0;
  std::optional<double> sensing_time;
  double snr = 0.0;
  bool snr_in_db = false;
  double sampling_freq = 0.0;

  SensingModel model() const;
  double resolved_sensing_time() const;
};

/// Channels drawn i.i.d. with p01, p11 ~ uniform[low, high] from `seed`.
struct RandomSlottedChannels {
  std::size_t count = 5;
  double low = 0.1;
  double high = 0.9;
  std::uint64_t seed = 1;
};

struct SlottedSpec {
  std::vector<SlottedChannelParams> channels;
  std::optional<RandomSlottedChannels> random_channels;
  std::optional<std::size_t> sense_count;  ///< defaults to N for slotted_full, 1 otherwise
  std::uint64_t horizon = 10000;
  std::vector<SlottedPolicy> policies;
  std::uint64_t learning_period = 0;
  double whittle_discount = 0.9999;
  bool strict_transition_counting = false;
  std::size_t estimation_window = 0;
  bool access_during_learning = false;
  unsigned threads = 0;
  std::uint64_t trace_stride = 0;  ///< 0 = horizon / 1000

  std::vector<SlottedChannelParams> resolved_channels() const;
};

enum class UnslottedStrategy : std::uint8_t { two_period, single_period, given };

std::string_view to_string(UnslottedStrategy s) noexcept;
UnslottedStrategy parse_unslotted_strategy(std::string_view name);

struct InterferenceSpec {
  std::optional<double> fraction_of_utilization;
  std::vector<double> per_channel_max;

  InterferenceConstraint resolve(const std::vector<UnslottedChannelParams>& channels) const;
};

struct UnslottedSpec {
  std::vector<UnslottedChannelParams> channels;
  InterferenceSpec interference;
  std::vector<UnslottedStrategy> strategies;      ///< unslotted_multi only
  std::vector<PeriodPair> given_periods;          ///< for the `given` strategy
  std::vector<double> access_periods;             ///< unslotted_single; empty = solve from the constraint
  double horizon = 10000.0;
  OverheadReading overhead_reading = OverheadReading::cross_channel;
  std::size_t optimizer_starts = 8;
  std::size_t optimizer_grid_points = 40;
  std::size_t optimizer_max_sweeps = 200;
  std::uint64_t optimizer_seed = 0x5eed;
  double max_period_scale = 1e4;
  double rts_cts_duration = 0.0;
  bool handshake_view_update = false;
  std::size_t trace_bins = 100;
  unsigned threads = 0;

  OptimizerOptions optimizer_options() const;
};

struct ExperimentConfig {
  Scenario scenario = Scenario::slotted_full;
  std::string name = "experiment";
  std::uint64_t seed = 1;
  std::size_t runs = 100;
  std::string output_dir = "out";
  SensingSpec sensing;
  std::optional<SlottedSpec> slotted;
  std::optional<UnslottedSpec> unslotted;

  /// Cross-field checks; throws ConfigError naming the offending field.
  void validate() const;
};

/// Parses and validates a config document. Unknown keys, wrong types and
/// missing required fields throw ConfigError naming the JSON path; syntax
/// errors report line and column.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical document for `config`: parse_config(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& config);

struct SummaryRow {
  std::string policy;
  std::size_t runs = 0;
  double mean_throughput = 0.0;
  double standard_error = 0.0;
  std::optional<double> analytic_throughput;
  double bound = 0.0;
  std::optional<double> constraint_slack;  ///< min over channels of T^Imax - analytic T^I
  std::optional<double> empirical_slack;   ///< min over channels of T^Imax - measured T^I
  std::uint64_t sync_violations = 0;
  std::uint64_t collisions = 0;
};

struct ExperimentOutput {
  std::vector<SummaryRow> summary;
  std::vector<std::filesystem::path> files;
};

/// Runs every policy/strategy of the config and writes summary.csv,
/// trace.csv and channels.csv into config.output_dir. Output bytes depend
/// only on the config, not on the thread count.
ExperimentOutput run_experiment(const ExperimentConfig& config);
ExperimentOutput run_experiment(const std::filesystem::path& config_path);

struct PeriodRow {
  std::string strategy;
  std::size_t channel = 0;
  double t_free = 0.0;
  double t_busy = 0.0;
  double interference = 0.0;  ///< analytic T^I (single-channel: block interference)
  double t_imax = 0.0;
  double objective = 0.0;     ///< network R of the strategy, repeated per row
};

/// Optimal periods for an unslotted config without simulating.
std::vector<PeriodRow> optimize_periods(const ExperimentConfig& config);
void write_period_table(std::ostream& out, const std::vector<PeriodRow>& rows);

}  // namespace cogmac
