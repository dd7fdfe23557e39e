// Command-line front end: one subcommand per pipeline stage.

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <optional>

#include "stimfolio/errors.hpp"
#include "stimfolio/kernels.hpp"
#include "stimfolio/pipeline/config.hpp"
#include "stimfolio/pipeline/stages.hpp"
#include "stimfolio/pipeline/workers.hpp"

namespace sp = stimfolio::pipeline;

namespace {

enum Exit { kOk = 0, kUnexpected = 1, kConfig = 2, kNumerical = 3, kInsufficient = 4 };

struct CommonArgs {
  std::string config_path;
  std::string out_dir = "run";
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  bool fresh = false;
};

void add_common(CLI::App* cmd, CommonArgs& a, bool needs_config) {
  auto* c = cmd->add_option("--config", a.config_path, "Run configuration (JSON)");
  if (needs_config) c->required()->check(CLI::ExistingFile);
  cmd->add_option("--out", a.out_dir, "Run directory")->capture_default_str();
  cmd->add_option("--seed", a.seed, "Override the master seed");
  cmd->add_option("--workers", a.workers, "Worker threads (overrides STIMFOLIO_WORKERS)")
      ->check(CLI::PositiveNumber);
}

sp::RunContext make_context(const CommonArgs& a) {
  sp::RunContext ctx;
  ctx.config = sp::load_config(a.config_path);
  if (a.seed) ctx.config.master_seed = *a.seed;
  ctx.run_dir = a.out_dir;
  ctx.workers = sp::resolve_workers(a.workers, ctx.config.workers);
  ctx.log = &std::cerr;
  return ctx;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Diversity-based stimulation portfolio optimizer"};
  app.require_subcommand(1);
  app.set_version_flag("--version", STIMFOLIO_VERSION);

  CommonArgs args;
  std::string stage_name;
  std::vector<CLI::App*> stage_cmds;
  for (const auto& stage : sp::stage_order()) {
    auto* cmd = app.add_subcommand(stage, "Run the " + stage + " stage");
    add_common(cmd, args, true);
    stage_cmds.push_back(cmd);
  }
  auto* pipeline = app.add_subcommand("pipeline", "Run every stage, resuming where possible");
  add_common(pipeline, args, true);
  pipeline->add_flag("--fresh", args.fresh, "Ignore outputs recorded by an earlier run");
  auto* report = app.add_subcommand("report", "Summarize a finished run");
  report->add_option("--out", args.out_dir, "Run directory")->capture_default_str();
  // Accepted for interface symmetry; the report reads only the run directory.
  report->add_option("--config", args.config_path, "Ignored");
  report->add_option("--seed", args.seed, "Ignored");
  report->add_option("--workers", args.workers, "Ignored");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kConfig;
  }

  try {
    if (report->parsed()) {
      const auto rep = sp::build_report(args.out_dir);
      sp::print_report(rep, std::cout);
      return kOk;
    }
    const sp::RunContext ctx = make_context(args);
    std::cerr << "[stimfolio] workers " << ctx.workers << ", kernels "
              << stimfolio::kernels::isa_name(stimfolio::kernels::active_isa()) << "\n";
    if (pipeline->parsed()) {
      sp::run_pipeline(ctx, !args.fresh);
      sp::print_report(sp::build_report(ctx.run_dir), std::cout);
      return kOk;
    }
    for (std::size_t i = 0; i < stage_cmds.size(); ++i)
      if (stage_cmds[i]->parsed()) sp::run_stage(ctx, sp::stage_order()[i]);
    return kOk;
  } catch (const stimfolio::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kConfig;
  } catch (const stimfolio::InsufficientDataError& e) {
    std::cerr << "insufficient data: " << e.what() << "\n";
    return kInsufficient;
  } catch (const stimfolio::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const stimfolio::DomainError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUnexpected;
  }
}
