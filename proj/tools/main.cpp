#if __has_include(<CLI11.hpp>)
#include <CLI11.hpp>
#else
#include <CLI/CLI.hpp>
#endif

#include <iostream>

#include "app/commands.hpp"

namespace {

using namespace strom::app;

struct Flags {
  std::string config;
  std::vector<std::string> params;
  std::string out;
  std::size_t workers = 0;
  std::uint64_t seed = 0;
  bool seed_set = false;
  double perturb = 0.0;
};

RunConfig resolve(const Flags& f, RunConfig base) {
  RunConfig cfg = f.config.empty() ? std::move(base) : load_config(f.config, std::move(base));
  if (!f.out.empty()) cfg.out = f.out;
  if (f.workers > 0) cfg.workers = f.workers;
  if (f.seed_set) cfg.seed = f.seed;
  if (f.perturb != 0.0) cfg.perturb = f.perturb;
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Space-time reduced-order models for linear dynamical systems"};
  app.require_subcommand(1);
  Flags flags;
  auto common = [&flags](CLI::App* sub) {
    sub->add_option("--config", flags.config, "key = value configuration file")->check(CLI::ExistingFile);
    sub->add_option("--out", flags.out, "artifact and report directory (overrides paths.out)");
    sub->add_option("--workers", flags.workers, "concurrent FOM runs during training")->check(CLI::PositiveNumber);
    sub->add_option_function<std::uint64_t>(
        "--seed", [&flags](std::uint64_t s) { flags.seed = s, flags.seed_set = true; }, "random seed");
  };
  CLI::App* train = app.add_subcommand("train", "run FOM sweeps and build the space-time basis");
  CLI::App* run = app.add_subcommand("run", "solve both ROMs at a parameter and report errors, bounds, timings");
  CLI::App* verify = app.add_subcommand("verify", "run the oracle suites");
  CLI::App* bench = app.add_subcommand("bench", "desk-scale speedup experiment (advection-diffusion by default)");
  for (CLI::App* sub : {train, run, verify, bench}) common(sub);
  run->add_option("--param", flags.params, "parameter values, comma separated (positional or name=value); repeatable");
  verify->add_option("--perturb", flags.perturb, "offset injected into one reduced space-time entry");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kSuccess : kUsage;
  }

  try {
    if (*train) return cmd_train(resolve(flags, {}), std::cout);
    if (*run) {
      const RunConfig cfg = resolve(flags, {});
      std::vector<strom::Vector> points;
      for (const auto& p : flags.params) points.push_back(parse_param(p, cfg.param_names));
      return cmd_run(cfg, points, std::cout);
    }
    if (*verify) return cmd_verify(resolve(flags, {}), std::cout);
    if (*bench) return cmd_bench(resolve(flags, desk_scale_config()), std::cout);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kRuntimeFailure;
  }
  return kUsage;
}
