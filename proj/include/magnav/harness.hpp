#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "magnav/entropy.hpp"
#include "magnav/geometry.hpp"
#include "magnav/grid_field.hpp"
#include "magnav/localization.hpp"
#include "magnav/planner.hpp"
#include "magnav/vehicle.hpp"

namespace magnav {

/// Everything needed for one closed-loop run. Exactly one of map_file and
/// synth must be set. The master seed derives one stream per subsystem
/// (truth noise, sensor noise, filter noise + resampling) at fixed offsets,
/// so paired-seed comparisons share their noise histories.
struct ExperimentConfig {
  enum class Mode { kEntropyPlanner, kStraightLine };

  std::optional<std::filesystem::path> map_file;
  std::optional<SynthSpec> synth;
  int upsample_factor = 1;

  EntropyConfig entropy;
  PlannerConfig planner;
  StanleyConfig stanley{0.001, 0.15, 1.0};
  MotionNoise motion{0.01, 0.01, 0.01745 * kPi / 180.0};
  SensorNoise sensor{100.0};

  int particle_count = 1000;
  double ess_fraction = 0.5;
  double init_spread_xy = 0.05;      // meters
  double init_spread_theta = 0.05;   // radians

  Pose start{-2.75, -1.25, 0.0};
  Vec2 goal{2.5, 0.0};
  double dt = 0.1;
  int max_steps = 2000;
  std::uint64_t seed = 1;
  Mode mode = Mode::kEntropyPlanner;

  void validate() const;
};

struct TrajectoryRow {
  int step = 0;
  double t = 0.0;
  Pose truth;
  Pose est;
  double cov_det = 0.0;
  double z = 0.0;             // nT
  double ess = 0.0;
  double entropy_bits = 0.0;  // entropy map at the truth position, clamped
  double cmd_v = 0.0;
  double cmd_omega = 0.0;
};

struct TrajectoryLog {
  std::vector<TrajectoryRow> rows;
  bool goal_reached = false;
};

struct ExperimentResult {
  PlanResult plan;
  TrajectoryLog log;
};

/// Runs the full protocol: build the entropy map, plan (or take the straight
/// start-goal segment), then loop measure -> predict/weight/resample ->
/// estimate -> Stanley command -> step truth, until the truth pose is within
/// goal_tolerance of the goal or max_steps elapse. Deterministic for a fixed
/// seed. Planner non-convergence is reported in the result, not thrown.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct Metrics {
  double mean_cov_det = 0.0;
  double max_cov_det = 0.0;
  double mean_entropy_bits = 0.0;
  double median_entropy_bits = 0.0;
  double rms_position_error = 0.0;
  double path_length = 0.0;  // truth arc length
  int steps = 0;
  bool success = false;
};

Metrics summarize(const TrajectoryLog& log);

std::string save_trajectory_csv(const TrajectoryLog& log);
TrajectoryLog load_trajectory_csv(const std::string& text);

std::string format_metrics(const Metrics& m);

/// Parses the experiment config schema (see README for keys and defaults).
ExperimentConfig parse_experiment_config(const std::string& text);

}  // namespace magnav
