#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "udist/harness.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Unit-distance experiment runner"};
  app.set_version_flag("--version", udist::kVersion);
  app.require_subcommand(1);

  std::string config, out;
  std::uint64_t seed = 0;
  int threads = 0;
  auto add_flags = [&](CLI::App* sub) {
    sub->add_option("--config", config, "JSON experiment config")->required()->check(CLI::ExistingFile);
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--seed", seed, "seed override");
    sub->add_option("--threads", threads, "worker threads (overrides UDIST_THREADS)")->check(CLI::PositiveNumber);
  };
  add_flags(app.add_subcommand("run", "run the experiment named by the config kind"));
  for (const char* kind : udist::kExperimentKinds) add_flags(app.add_subcommand(kind, std::string(kind) + " experiment"));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : udist::kExitError;
  }

  const CLI::App* sub = app.get_subcommands().front();
  udist::RunOptions opts;
  if (sub->get_name() != "run") opts.kind = sub->get_name();
  if (sub->count("--out")) opts.outDir = out;
  if (sub->count("--seed")) opts.seed = seed;
  opts.threads = threads;

  const auto res = udist::run_config(config, opts);
  if (res.exitCode == udist::kExitError) {
    std::cerr << "udist: error: " << res.message << "\n";
  } else {
    std::cout << res.message << "\n";
    for (const auto& a : res.artifacts) std::cout << "  " << res.outDir << "/" << a << "\n";
  }
  return res.exitCode;
}
