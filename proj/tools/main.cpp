// stereo3d command-line driver.
//
//   stereo3d synth    --config run.cfg [--seed N] [--jobs N]
//   stereo3d estimate --config run.cfg [--jobs N]
//   stereo3d refine   --config run.cfg [--jobs N]
//   stereo3d eval     --config run.cfg [--ap-mode 11|40]
//
// Log verbosity comes from SPDLOG_LEVEL (e.g. SPDLOG_LEVEL=debug).

#include <spdlog/cfg/env.h>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <CLI11.hpp>
#include <cstdio>
#include <exception>
#include <optional>
#include <string>

#include "pipeline.hpp"

namespace {

struct Flags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> jobs;
  std::optional<int> ap_mode;
};

void add_common(CLI::App* cmd, Flags& flags) {
  cmd->add_option("--config", flags.config, "flat key = value run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  cmd->add_option("--seed", flags.seed, "overrides the config seed");
  cmd->add_option("--jobs", flags.jobs, "worker threads (0: one per core)");
  cmd->add_option("--ap-mode", flags.ap_mode, "AP interpolation points")
      ->check(CLI::IsMember({11, 40}));
}

stereo3d::pipeline::RunConfig resolve(const Flags& flags) {
  auto cfg = stereo3d::pipeline::load_config(flags.config);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.jobs) cfg.jobs = *flags.jobs;
  if (flags.ap_mode) {
    cfg.ap_mode = *flags.ap_mode == 40 ? stereo3d::ApMode::Forty : stereo3d::ApMode::Eleven;
  }
  return cfg;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("stereo3d");
  spdlog::set_default_logger(logger);
  spdlog::cfg::load_env_levels();

  CLI::App app{"Stereo 3D detection geometry toolkit"};
  app.require_subcommand(1);
  Flags flags;
  auto* synth = app.add_subcommand("synth", "generate a synthetic scene directory");
  auto* estimate = app.add_subcommand("estimate", "estimate 3D boxes for a scene directory");
  auto* refine = app.add_subcommand("refine", "re-run box estimation and dense alignment");
  auto* eval = app.add_subcommand("eval", "average precision of detections against labels");
  for (auto* cmd : {synth, estimate, refine, eval}) add_common(cmd, flags);

  CLI11_PARSE(app, argc, argv);

  try {
    const auto cfg = resolve(flags);
    if (synth->parsed()) {
      stereo3d::pipeline::cmd_synth(cfg);
    } else if (estimate->parsed() || refine->parsed()) {
      const auto report = estimate->parsed() ? stereo3d::pipeline::cmd_estimate(cfg)
                                             : stereo3d::pipeline::cmd_refine(cfg);
      std::printf("frames %zu objects %zu failures %zu\n", report.frames, report.objects,
                  report.failures);
    } else {
      const auto result = stereo3d::pipeline::cmd_eval(cfg);
      std::fputs(result.table.c_str(), stdout);
    }
  } catch (const std::exception& e) {
    spdlog::error("{}", e.what());
    return 1;
  }
  return 0;
}
