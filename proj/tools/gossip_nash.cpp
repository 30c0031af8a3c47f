// Command-line driver: validate, run, spectral, oracle.
//
// Exit codes: 0 success, 1 validation failure (including bad configs),
// 2 runtime failure.

#include <CLI11.hpp>

#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "gossip_nash.hpp"

namespace gn = gossip_nash;

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kRuntimeFailure = 2;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::uint64_t> rounds;
};

gn::ExperimentConfig load(const Options& o) {
  gn::ExperimentConfig cfg = gn::load_config(o.config);
  gn::RunOverrides ov;
  ov.seed = o.seed;
  if (o.out) ov.output_dir = *o.out;
  ov.rounds = o.rounds;
  gn::apply_overrides(cfg, ov);
  return cfg;
}

int do_validate(const Options& o) {
  const auto res = gn::cmd_validate(load(o));
  std::cout << res.report.dump(2) << '\n';
  for (const auto& f : res.failures) std::cerr << "FAIL: " << f << '\n';
  return res.pass ? kOk : kValidationFailure;
}

int do_run(const Options& o) {
  const auto cfg = load(o);
  const auto res = gn::cmd_run(cfg);
  std::cout << res.summary.dump(2) << '\n';
  for (const auto& r : res.seeds)
    if (!r.error.empty()) {
      std::cerr << "seed " << r.seed << ": " << r.error << '\n';
      return kRuntimeFailure;
    }
  return kOk;
}

int do_spectral(const Options& o) {
  std::cout << gn::cmd_spectral(load(o)).dump(2) << '\n';
  return kOk;
}

int do_oracle(const Options& o) {
  const auto cfg = load(o);
  const auto report = gn::cmd_oracle(cfg);
  std::cout << report.dump(2) << '\n';
  if (o.out) {
    std::filesystem::create_directories(cfg.output_dir);
    gn::write_json_file((cfg.output_dir / "oracle.json").string(), report);
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Gossip-based Nash equilibrium seeking on partially coupled games"};
  app.require_subcommand(1);
  Options opts;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "experiment config (JSON)")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed-override", opts.seed, "run a single seed instead of the configured list");
    sub->add_option("--out", opts.out, "output directory");
    sub->add_option("--rounds", opts.rounds, "number of gossip rounds")->check(CLI::PositiveNumber);
  };
  auto* validate = app.add_subcommand("validate", "check graphs, layout and matrix identities");
  auto* run = app.add_subcommand("run", "simulate every seed and write trajectories");
  auto* spectral = app.add_subcommand("spectral", "gamma, time model and averaging-time bound curve");
  auto* oracle = app.add_subcommand("oracle", "centralized Nash equilibrium");
  for (auto* sub : {validate, run, spectral, oracle}) add_common(sub);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidationFailure;
  }

  try {
    if (*validate) return do_validate(opts);
    if (*run) return do_run(opts);
    if (*spectral) return do_spectral(opts);
    if (*oracle) return do_oracle(opts);
  } catch (const gn::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const gn::GraphError& e) {
    std::cerr << "graph error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const gn::GameError& e) {
    std::cerr << "game error: " << e.what() << '\n';
    return kValidationFailure;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kRuntimeFailure;
}
