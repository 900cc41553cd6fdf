#include <iostream>

#include <CLI11.hpp>

#include "objnav/cli/commands.hpp"

using namespace objnav;

int main(int argc, char** argv) {
  CLI::App app{"Object-goal navigation: scene generation, batch runs, evaluation and the human session server"};
  app.require_subcommand(1);

  cli::GenerateOptions gen;
  auto* generate = app.add_subcommand("generate", "Write procedurally generated scenes");
  generate->add_option("--config", gen.config, "Config with a 'generation' section");
  generate->add_option("--out", gen.out, "Output directory")->capture_default_str();
  generate->add_option("--seed", gen.seed, "Master seed");
  generate->add_option("--count", gen.count, "Number of scenes");
  generate->add_option("--floors", gen.floors, "Floors per scene");

  cli::RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "Run a batch of episodes and write trajectory logs");
  run_cmd->add_option("--config", run.config, "Run config (JSON)")->required();
  run_cmd->add_option("--out", run.out, "Log directory (default: the config's 'out')");
  run_cmd->add_option("--workers", run.workers, "Episodes run in parallel")->capture_default_str()->check(CLI::PositiveNumber);
  run_cmd->add_flag("--force", run.force, "Overwrite an existing run");

  cli::EvalOptions ev;
  auto* eval_cmd = app.add_subcommand("eval", "Aggregate metrics over trajectory logs");
  eval_cmd->add_option("logs", ev.logs, "Log files, globs or directories")->required();
  eval_cmd->add_option("--json", ev.json_out, "Write the JSON report here instead of stdout");
  eval_cmd->add_option("--success-radius", ev.success_radius, "Meters")->capture_default_str();

  cli::ServeOptions serve;
  auto* serve_cmd = app.add_subcommand("serve", "Serve interactive episodes over newline-delimited JSON");
  serve_cmd->add_option("--config", serve.config, "Run config (JSON)")->required();
  serve_cmd->add_option("--port", serve.port, "TCP port on 127.0.0.1")->capture_default_str();
  serve_cmd->add_option("--subset", serve.subset, "Test episodes offered")->capture_default_str()->check(CLI::PositiveNumber);
  serve_cmd->add_option("--out", serve.out, "Directory for human logs");

  cli::ReplayOptions rep;
  auto* replay_cmd = app.add_subcommand("replay", "Check that logs replay to their recorded results");
  replay_cmd->add_option("--config", rep.config, "Run config (JSON)")->required();
  replay_cmd->add_option("logs", rep.logs, "Log files, globs or directories")->required();

  cli::ExportOptions exp;
  auto* export_cmd = app.add_subcommand("export-map", "Write a logged episode's local map as a PPM image");
  export_cmd->add_option("--config", exp.config, "Run config (JSON)")->required();
  export_cmd->add_option("--log", exp.log, "Trajectory log")->required();
  export_cmd->add_option("--out", exp.out, "PPM path")->capture_default_str();
  export_cmd->add_option("--step", exp.step, "Actions to replay (default: all)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*generate) return cli::cmd_generate(gen, std::cout);
    if (*run_cmd) return cli::cmd_run(run, std::cout);
    if (*eval_cmd) return cli::cmd_eval(ev, std::cout);
    if (*serve_cmd) return cli::cmd_serve(serve, std::cout);
    if (*replay_cmd) return cli::cmd_replay(rep, std::cout);
    if (*export_cmd) return cli::cmd_export_map(exp, std::cout);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
