#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "magnav/entropy.hpp"
#include "magnav/harness.hpp"
#include "magnav/kv_config.hpp"
#include "magnav/planner.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitData = 2;

struct SynthArgs {
  std::string spec_file;
  std::string out_file;
};

struct EntropyArgs {
  std::string in_file;
  std::string out_file;
  std::string points_file;
  double bin_size = 0.2;
  int window = 2;
  double probability_floor = 1e-12;
  int upsample = 1;
  double k_sigma = 5.0;
  int max_points = 64;
};

struct PlanArgs {
  std::string config_file;
  std::string map_file;
  std::string out_file;
  std::string meta_file;
};

struct SimulateArgs {
  std::string config_file;
  std::string out_file;
  std::string summary_file;
  std::string path_file;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> mode;
};

int run_synth(const SynthArgs& args) {
  magnav::SynthSpec spec = magnav::parse_synth_spec(magnav::read_text_file(args.spec_file));
  std::string doc = magnav::save_grid(magnav::synth_map(spec));
  magnav::write_text_file_atomic(args.out_file, doc);
  return kExitOk;
}

int run_entropy(const EntropyArgs& args) {
  magnav::GridField map = magnav::load_grid(magnav::read_text_file(args.in_file));
  if (args.upsample > 1) map = magnav::upsample(map, args.upsample);
  magnav::EntropyConfig cfg{args.bin_size, args.window, args.probability_floor};
  magnav::GridField emap = magnav::entropy_map(map, cfg);
  std::string emap_doc = magnav::save_grid(emap);
  std::string points_doc;
  if (!args.points_file.empty()) {
    points_doc = magnav::save_points_csv(
        magnav::select_low_entropy_points(emap, args.k_sigma, args.max_points));
  }
  magnav::write_text_file_atomic(args.out_file, emap_doc);
  if (!args.points_file.empty()) magnav::write_text_file_atomic(args.points_file, points_doc);
  return kExitOk;
}

int run_plan(const PlanArgs& args) {
  magnav::ExperimentConfig cfg =
      magnav::parse_experiment_config(magnav::read_text_file(args.config_file));
  if (!args.map_file.empty()) {
    cfg.map_file = args.map_file;
    cfg.synth.reset();
  }
  if (!cfg.map_file && !cfg.synth)
    throw std::invalid_argument("no map source: pass --map or set map_file/synth_* keys");

  magnav::GridField map = cfg.map_file
                              ? magnav::load_grid(magnav::read_text_file(*cfg.map_file))
                              : magnav::synth_map(*cfg.synth);
  if (cfg.upsample_factor > 1) map = magnav::upsample(map, cfg.upsample_factor);
  magnav::GridField emap = magnav::entropy_map(map, cfg.entropy);
  magnav::PlanResult plan =
      magnav::plan_path({cfg.start.x, cfg.start.y}, cfg.goal, emap, cfg.planner);

  magnav::write_text_file_atomic(args.out_file, magnav::save_path_csv(plan.path));
  if (!args.meta_file.empty())
    magnav::write_text_file_atomic(args.meta_file, magnav::format_plan_meta(plan));
  return kExitOk;
}

int run_simulate(const SimulateArgs& args) {
  magnav::ExperimentConfig cfg =
      magnav::parse_experiment_config(magnav::read_text_file(args.config_file));
  if (args.seed) cfg.seed = *args.seed;
  if (args.mode) {
    if (*args.mode == "entropy_planner") {
      cfg.mode = magnav::ExperimentConfig::Mode::kEntropyPlanner;
    } else if (*args.mode == "straight_line") {
      cfg.mode = magnav::ExperimentConfig::Mode::kStraightLine;
    } else {
      throw std::invalid_argument("mode must be entropy_planner or straight_line");
    }
  }
  magnav::ExperimentResult result = magnav::run_experiment(cfg);
  std::string traj = magnav::save_trajectory_csv(result.log);
  std::string summary = magnav::format_metrics(magnav::summarize(result.log));
  std::string path_doc = magnav::save_path_csv(result.plan.path);

  magnav::write_text_file_atomic(args.out_file, traj);
  if (!args.summary_file.empty()) magnav::write_text_file_atomic(args.summary_file, summary);
  if (!args.path_file.empty()) magnav::write_text_file_atomic(args.path_file, path_doc);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Magnetic anomaly navigation toolkit: entropy maps, potential-field "
               "planning, and closed-loop localization experiments"};
  app.require_subcommand(1);

  SynthArgs synth_args;
  CLI::App* synth = app.add_subcommand("synth", "Generate a synthetic anomaly map");
  synth->add_option("--spec", synth_args.spec_file, "SynthSpec key=value file")->required();
  synth->add_option("--out", synth_args.out_file, "Output grid-CSV path")->required();

  EntropyArgs entropy_args;
  CLI::App* entropy = app.add_subcommand("entropy", "Compute an entropy map from a grid");
  entropy->add_option("--in", entropy_args.in_file, "Input grid-CSV map")->required();
  entropy->add_option("--out", entropy_args.out_file, "Output entropy grid-CSV")->required();
  entropy->add_option("--bin", entropy_args.bin_size, "Bin size in meters");
  entropy->add_option("--window", entropy_args.window, "Window size in bins");
  entropy->add_option("--floor", entropy_args.probability_floor, "Probability floor");
  entropy->add_option("--upsample", entropy_args.upsample, "Upsample factor before binning");
  entropy->add_option("--points", entropy_args.points_file, "Also write selected points CSV");
  entropy->add_option("--k-sigma", entropy_args.k_sigma, "Selection threshold in sigmas");
  entropy->add_option("--max-points", entropy_args.max_points, "Selection cap");

  PlanArgs plan_args;
  CLI::App* plan = app.add_subcommand("plan", "Plan a path through low-entropy regions");
  plan->add_option("--config", plan_args.config_file, "Experiment config file")->required();
  plan->add_option("--map", plan_args.map_file, "Grid-CSV map (overrides config source)");
  plan->add_option("--out", plan_args.out_file, "Output path CSV")->required();
  plan->add_option("--meta", plan_args.meta_file, "Plan metadata key=value file");

  SimulateArgs sim_args;
  CLI::App* simulate = app.add_subcommand("simulate", "Run a closed-loop experiment");
  simulate->add_option("--config", sim_args.config_file, "Experiment config file")->required();
  simulate->add_option("--out", sim_args.out_file, "Output trajectory CSV")->required();
  simulate->add_option("--summary", sim_args.summary_file, "Summary key=value file");
  simulate->add_option("--path", sim_args.path_file, "Planned path CSV");
  std::uint64_t seed_opt = 0;
  CLI::Option* seed_flag = simulate->add_option("--seed", seed_opt, "Master seed override");
  std::string mode_opt;
  CLI::Option* mode_flag =
      simulate->add_option("--mode", mode_opt, "entropy_planner or straight_line");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitUsage;
  }

  if (seed_flag->count() > 0) sim_args.seed = seed_opt;
  if (mode_flag->count() > 0) sim_args.mode = mode_opt;

  try {
    if (synth->parsed()) return run_synth(synth_args);
    if (entropy->parsed()) return run_entropy(entropy_args);
    if (plan->parsed()) return run_plan(plan_args);
    if (simulate->parsed()) return run_simulate(sim_args);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << std::endl;
    return kExitData;
  }
  return kExitUsage;
}
