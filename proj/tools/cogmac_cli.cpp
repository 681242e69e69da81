// cogmac command-line front end: run / optimize / validate an experiment config.
#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "cogmac/csv.hpp"
#include "cogmac/errors.hpp"
#include "cogmac/experiment.hpp"

namespace {

enum Exit : int { ok = 0, failure = 1, config_error = 2, infeasible = 3, no_convergence = 4 };

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> runs;
  std::optional<std::string> out_dir;
};

cogmac::ExperimentConfig load(const std::string& path, const Overrides& o) {
  auto cfg = cogmac::load_config(path);
  if (o.seed) cfg.seed = *o.seed;
  if (o.runs) cfg.runs = *o.runs;
  if (o.out_dir) cfg.output_dir = *o.out_dir;
  cfg.validate();
  return cfg;
}

template <class F>
int guarded(F&& f) {
  try {
    f();
    return ok;
  } catch (const cogmac::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return config_error;
  } catch (const cogmac::InfeasibleError& e) {
    std::cerr << "infeasible: " << e.what() << '\n';
    return infeasible;
  } catch (const cogmac::ConvergenceError& e) {
    std::cerr << "did not converge: " << e.what() << '\n';
    return no_convergence;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return failure;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Opportunistic spectrum access simulator and sensing-period optimizer"};
  app.require_subcommand(1);

  Overrides o;
  std::string path;
  bool canonical = false;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("config", path, "Experiment config (JSON)")->required();
    sub->add_option_function<std::uint64_t>("--seed", [&](const std::uint64_t& v) { o.seed = v; },
                                            "Override the master seed");
    sub->add_option_function<std::size_t>("--runs", [&](const std::size_t& v) { o.runs = v; },
                                          "Override the number of runs");
    sub->add_option_function<std::string>("--out-dir", [&](const std::string& v) { o.out_dir = v; },
                                          "Override the output directory");
  };

  auto* run = app.add_subcommand("run", "Run the experiment and write summary/trace/channels CSV files");
  add_common(run);
  auto* optimize = app.add_subcommand("optimize", "Print the optimal sensing/access period table");
  add_common(optimize);
  auto* validate = app.add_subcommand("validate", "Parse and validate a config");
  add_common(validate);
  validate->add_flag("--canonical", canonical, "Print the canonical form of the config");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : config_error;
  }

  if (*run) {
    return guarded([&] {
      const auto cfg = load(path, o);
      const auto out = cogmac::run_experiment(cfg);
      std::cout << "policy,mean_throughput,standard_error\n";
      for (const auto& r : out.summary) {
        std::cout << r.policy << ',' << cogmac::format_number(r.mean_throughput) << ','
                  << cogmac::format_number(r.standard_error) << '\n';
      }
      for (const auto& f : out.files) std::cerr << "wrote " << f.string() << '\n';
    });
  }
  if (*optimize) {
    return guarded([&] { cogmac::write_period_table(std::cout, cogmac::optimize_periods(load(path, o))); });
  }
  return guarded([&] {
    const auto cfg = load(path, o);
    if (canonical) {
      std::cout << cogmac::serialize_config(cfg);
    } else {
      std::cout << "ok: " << cfg.name << " (" << cogmac::to_string(cfg.scenario) << ")\n";
    }
  });
}
