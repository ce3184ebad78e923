#include "magnav/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "magnav/kv_config.hpp"
#include "magnav/rng.hpp"

namespace magnav {
namespace {

constexpr char kTrajectoryHeader[] =
    "step,t,truth_x,truth_y,truth_theta,est_x,est_y,est_theta,cov_det,z_nT,ess,"
    "entropy_bits,cmd_v,cmd_omega";

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

double parse_double_or_throw(const std::string& tok, int line) {
  double v;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError(line, "invalid number '" + tok + "'");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    size_t next = s.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(s.substr(pos));
      return out;
    }
    out.push_back(s.substr(pos, next - pos));
    pos = next + 1;
  }
}

}  // namespace

void ExperimentConfig::validate() const {
  if (map_file.has_value() == synth.has_value())
    throw std::invalid_argument("ExperimentConfig: exactly one map source required");
  if (upsample_factor < 1)
    throw std::invalid_argument("ExperimentConfig: upsample_factor must be >= 1");
  entropy.validate();
  planner.validate();
  stanley.validate();
  if (!(sensor.sigma > 0.0))
    throw std::invalid_argument("ExperimentConfig: sensor sigma must be positive");
  if (motion.sigma_x < 0.0 || motion.sigma_y < 0.0 || motion.sigma_theta < 0.0)
    throw std::invalid_argument("ExperimentConfig: motion noise must be >= 0");
  if (particle_count < 1)
    throw std::invalid_argument("ExperimentConfig: particle_count must be >= 1");
  if (!(ess_fraction > 0.0) || ess_fraction > 1.0)
    throw std::invalid_argument("ExperimentConfig: ess_fraction must be in (0, 1]");
  if (init_spread_xy < 0.0 || init_spread_theta < 0.0)
    throw std::invalid_argument("ExperimentConfig: init spread must be >= 0");
  if (!(dt > 0.0)) throw std::invalid_argument("ExperimentConfig: dt must be positive");
  if (max_steps < 1) throw std::invalid_argument("ExperimentConfig: max_steps must be >= 1");
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();

  GridField map = cfg.map_file ? load_grid(read_text_file(*cfg.map_file))
                               : synth_map(*cfg.synth);
  if (cfg.upsample_factor > 1) map = upsample(map, cfg.upsample_factor);
  if (!map.contains(cfg.start.x, cfg.start.y)) throw BoundsError(cfg.start.x, cfg.start.y);
  if (!map.contains(cfg.goal.x, cfg.goal.y)) throw BoundsError(cfg.goal.x, cfg.goal.y);

  GridField emap = entropy_map(map, cfg.entropy);

  ExperimentResult result;
  if (cfg.mode == ExperimentConfig::Mode::kEntropyPlanner) {
    result.plan = plan_path({cfg.start.x, cfg.start.y}, cfg.goal, emap, cfg.planner);
  } else {
    result.plan.path = {{cfg.start.x, cfg.start.y}, cfg.goal};
    result.plan.converged = true;
    result.plan.iterations = 0;
  }

  // Per-subsystem streams at fixed offsets from the master seed. Within a
  // step the order is: sensor draw, filter prediction draws, resampling
  // draw (when triggered), truth process draws.
  Rng truth_rng(cfg.seed + 1);
  Rng sensor_rng(cfg.seed + 2);
  ParticleSet particles(cfg.start,
                        {cfg.init_spread_xy, cfg.init_spread_xy, cfg.init_spread_theta},
                        cfg.particle_count, cfg.seed + 3);

  Pose truth = cfg.start;
  Control command{0.0, 0.0};
  TrajectoryLog& log = result.log;

  for (int k = 0; k < cfg.max_steps; ++k) {
    if (distance({truth.x, truth.y}, cfg.goal) <= cfg.planner.goal_tolerance) {
      log.goal_reached = true;
      break;
    }
    // Noise can push the truth pose over the map edge; measure at the
    // clamped position rather than failing the run.
    Pose measured_at = truth;
    measured_at.x = std::clamp(measured_at.x, map.x_min(), map.x_max());
    measured_at.y = std::clamp(measured_at.y, map.y_min(), map.y_max());
    double z = measure(map, measured_at, cfg.sensor, sensor_rng);

    particles.predict(command, cfg.dt, cfg.motion);
    particles.update_weights(z, map, cfg.sensor);
    double ess = particles.effective_sample_size();
    particles.resample(cfg.ess_fraction);
    PoseEstimate est = particles.estimate();

    double omega = stanley_control(est.mean, result.plan.path, cfg.stanley);
    command = {cfg.stanley.v, omega};

    double local_entropy = emap.interpolate_clamped(truth.x, truth.y);
    log.rows.push_back({k, k * cfg.dt, truth, est.mean, est.cov_det, z, ess,
                        local_entropy, command.v, command.omega});

    truth = step_truth(truth, command, cfg.dt, cfg.motion, truth_rng);
  }
  if (!log.goal_reached &&
      distance({truth.x, truth.y}, cfg.goal) <= cfg.planner.goal_tolerance) {
    log.goal_reached = true;
  }
  return result;
}

Metrics summarize(const TrajectoryLog& log) {
  if (log.rows.empty()) throw std::invalid_argument("summarize: empty log");
  Metrics m;
  m.steps = static_cast<int>(log.rows.size());
  m.success = log.goal_reached;
  m.max_cov_det = -std::numeric_limits<double>::infinity();
  double sum_sq_err = 0.0;
  std::vector<double> entropies;
  entropies.reserve(log.rows.size());
  for (size_t i = 0; i < log.rows.size(); ++i) {
    const TrajectoryRow& r = log.rows[i];
    m.mean_cov_det += r.cov_det;
    m.max_cov_det = std::max(m.max_cov_det, r.cov_det);
    m.mean_entropy_bits += r.entropy_bits;
    entropies.push_back(r.entropy_bits);
    double ex = r.truth.x - r.est.x;
    double ey = r.truth.y - r.est.y;
    sum_sq_err += ex * ex + ey * ey;
    if (i > 0) {
      m.path_length += distance({log.rows[i - 1].truth.x, log.rows[i - 1].truth.y},
                                {r.truth.x, r.truth.y});
    }
  }
  double n = static_cast<double>(log.rows.size());
  m.mean_cov_det /= n;
  m.mean_entropy_bits /= n;
  m.rms_position_error = std::sqrt(sum_sq_err / n);
  std::sort(entropies.begin(), entropies.end());
  size_t mid = entropies.size() / 2;
  m.median_entropy_bits = entropies.size() % 2 == 1
                              ? entropies[mid]
                              : 0.5 * (entropies[mid - 1] + entropies[mid]);
  return m;
}

std::string save_trajectory_csv(const TrajectoryLog& log) {
  std::string out = std::string(kTrajectoryHeader) + "\n";
  for (const TrajectoryRow& r : log.rows) {
    out += std::to_string(r.step);
    for (double v : {r.t, r.truth.x, r.truth.y, r.truth.theta, r.est.x, r.est.y,
                     r.est.theta, r.cov_det, r.z, r.ess, r.entropy_bits, r.cmd_v,
                     r.cmd_omega}) {
      out += ',';
      out += format_double(v);
    }
    out += '\n';
  }
  return out;
}

TrajectoryLog load_trajectory_csv(const std::string& text) {
  std::vector<std::string> lines = split(text, '\n');
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw ParseError(1, "empty document");
  if (lines[0] != kTrajectoryHeader) throw ParseError(1, "malformed trajectory header");
  TrajectoryLog log;
  for (size_t i = 1; i < lines.size(); ++i) {
    int line_no = static_cast<int>(i) + 1;
    std::vector<std::string> cells = split(lines[i], ',');
    if (cells.size() != 14)
      throw ParseError(line_no, "expected 14 fields, got " + std::to_string(cells.size()));
    TrajectoryRow r;
    int step;
    auto [ptr, ec] = std::from_chars(cells[0].data(), cells[0].data() + cells[0].size(), step);
    if (ec != std::errc{} || ptr != cells[0].data() + cells[0].size())
      throw ParseError(line_no, "invalid step '" + cells[0] + "'");
    r.step = step;
    r.t = parse_double_or_throw(cells[1], line_no);
    r.truth.x = parse_double_or_throw(cells[2], line_no);
    r.truth.y = parse_double_or_throw(cells[3], line_no);
    r.truth.theta = parse_double_or_throw(cells[4], line_no);
    r.est.x = parse_double_or_throw(cells[5], line_no);
    r.est.y = parse_double_or_throw(cells[6], line_no);
    r.est.theta = parse_double_or_throw(cells[7], line_no);
    r.cov_det = parse_double_or_throw(cells[8], line_no);
    r.z = parse_double_or_throw(cells[9], line_no);
    r.ess = parse_double_or_throw(cells[10], line_no);
    r.entropy_bits = parse_double_or_throw(cells[11], line_no);
    r.cmd_v = parse_double_or_throw(cells[12], line_no);
    r.cmd_omega = parse_double_or_throw(cells[13], line_no);
    log.rows.push_back(r);
  }
  return log;
}

std::string format_metrics(const Metrics& m) {
  std::string out;
  out += "mean_cov_det=" + format_double(m.mean_cov_det) + "\n";
  out += "max_cov_det=" + format_double(m.max_cov_det) + "\n";
  out += "mean_entropy_bits=" + format_double(m.mean_entropy_bits) + "\n";
  out += "median_entropy_bits=" + format_double(m.median_entropy_bits) + "\n";
  out += "rms_position_error=" + format_double(m.rms_position_error) + "\n";
  out += "path_length=" + format_double(m.path_length) + "\n";
  out += "steps=" + std::to_string(m.steps) + "\n";
  out += std::string("success=") + (m.success ? "true" : "false") + "\n";
  return out;
}

ExperimentConfig parse_experiment_config(const std::string& text) {
  ExperimentConfig cfg;
  SynthSpec synth;
  bool synth_seen = false;
  bool synth_extent[5] = {false, false, false, false, false};

  auto as_int = [](const std::string& v, int line) {
    int out;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
      throw ParseError(line, "invalid integer '" + v + "'");
    return out;
  };
  auto as_u64 = [](const std::string& v, int line) {
    std::uint64_t out;
    auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc{} || ptr != v.data() + v.size())
      throw ParseError(line, "invalid unsigned integer '" + v + "'");
    return out;
  };

  for (const KvEntry& e : parse_kv(text)) {
    const std::string& k = e.key;
    const std::string& v = e.value;
    if (k == "map_file") {
      cfg.map_file = std::filesystem::path(v);
    } else if (k == "synth_x_min") {
      synth.x_min = parse_double_or_throw(v, e.line);
      synth_seen = synth_extent[0] = true;
    } else if (k == "synth_x_max") {
      synth.x_max = parse_double_or_throw(v, e.line);
      synth_seen = synth_extent[1] = true;
    } else if (k == "synth_y_min") {
      synth.y_min = parse_double_or_throw(v, e.line);
      synth_seen = synth_extent[2] = true;
    } else if (k == "synth_y_max") {
      synth.y_max = parse_double_or_throw(v, e.line);
      synth_seen = synth_extent[3] = true;
    } else if (k == "synth_spacing") {
      synth.spacing = parse_double_or_throw(v, e.line);
      synth_seen = synth_extent[4] = true;
    } else if (k == "synth_base_field") {
      synth.base_field = parse_double_or_throw(v, e.line);
      synth_seen = true;
    } else if (k == "synth_seed") {
      synth.seed = as_u64(v, e.line);
      synth_seen = true;
    } else if (k == "synth_anomaly") {
      std::vector<std::string> parts = split(v, ',');
      if (parts.size() != 4)
        throw ParseError(e.line, "synth_anomaly needs cx,cy,amplitude,length_scale");
      Anomaly a;
      a.center_x = parse_double_or_throw(parts[0], e.line);
      a.center_y = parse_double_or_throw(parts[1], e.line);
      a.amplitude = parse_double_or_throw(parts[2], e.line);
      a.length_scale = parse_double_or_throw(parts[3], e.line);
      synth.anomalies.push_back(a);
      synth_seen = true;
    } else if (k == "upsample") {
      cfg.upsample_factor = as_int(v, e.line);
    } else if (k == "bin_size") {
      cfg.entropy.bin_size = parse_double_or_throw(v, e.line);
    } else if (k == "window_size") {
      cfg.entropy.window_size = as_int(v, e.line);
    } else if (k == "probability_floor") {
      cfg.entropy.probability_floor = parse_double_or_throw(v, e.line);
    } else if (k == "k_sigma") {
      cfg.planner.k_sigma = parse_double_or_throw(v, e.line);
    } else if (k == "max_points") {
      cfg.planner.max_points = as_int(v, e.line);
    } else if (k == "step_size") {
      cfg.planner.step_size = parse_double_or_throw(v, e.line);
    } else if (k == "goal_tolerance") {
      cfg.planner.goal_tolerance = parse_double_or_throw(v, e.line);
    } else if (k == "max_iterations") {
      cfg.planner.max_iterations = as_int(v, e.line);
    } else if (k == "capture_radius") {
      cfg.planner.capture_radius = parse_double_or_throw(v, e.line);
    } else if (k == "rho_floor") {
      cfg.planner.rho_floor = parse_double_or_throw(v, e.line);
    } else if (k == "smoothing_window") {
      cfg.planner.smoothing_window = as_int(v, e.line);
    } else if (k == "stanley_gain") {
      cfg.stanley.k_s = parse_double_or_throw(v, e.line);
    } else if (k == "speed") {
      cfg.stanley.v = parse_double_or_throw(v, e.line);
    } else if (k == "omega_max") {
      cfg.stanley.omega_max = parse_double_or_throw(v, e.line);
    } else if (k == "sigma_x") {
      cfg.motion.sigma_x = parse_double_or_throw(v, e.line);
    } else if (k == "sigma_y") {
      cfg.motion.sigma_y = parse_double_or_throw(v, e.line);
    } else if (k == "sigma_theta") {
      cfg.motion.sigma_theta = parse_double_or_throw(v, e.line);
    } else if (k == "sensor_sigma") {
      cfg.sensor.sigma = parse_double_or_throw(v, e.line);
    } else if (k == "particles") {
      cfg.particle_count = as_int(v, e.line);
    } else if (k == "ess_fraction") {
      cfg.ess_fraction = parse_double_or_throw(v, e.line);
    } else if (k == "init_spread_xy") {
      cfg.init_spread_xy = parse_double_or_throw(v, e.line);
    } else if (k == "init_spread_theta") {
      cfg.init_spread_theta = parse_double_or_throw(v, e.line);
    } else if (k == "start_x") {
      cfg.start.x = parse_double_or_throw(v, e.line);
    } else if (k == "start_y") {
      cfg.start.y = parse_double_or_throw(v, e.line);
    } else if (k == "start_yaw") {
      cfg.start.theta = wrap_angle(parse_double_or_throw(v, e.line));
    } else if (k == "goal_x") {
      cfg.goal.x = parse_double_or_throw(v, e.line);
    } else if (k == "goal_y") {
      cfg.goal.y = parse_double_or_throw(v, e.line);
    } else if (k == "dt") {
      cfg.dt = parse_double_or_throw(v, e.line);
    } else if (k == "max_steps") {
      cfg.max_steps = as_int(v, e.line);
    } else if (k == "seed") {
      cfg.seed = as_u64(v, e.line);
    } else if (k == "mode") {
      if (v == "entropy_planner") {
        cfg.mode = ExperimentConfig::Mode::kEntropyPlanner;
      } else if (v == "straight_line") {
        cfg.mode = ExperimentConfig::Mode::kStraightLine;
      } else {
        throw ParseError(e.line, "mode must be entropy_planner or straight_line");
      }
    } else {
      throw ParseError(e.line, "unknown key '" + k + "'");
    }
  }

  if (synth_seen) {
    if (!synth_extent[0] || !synth_extent[1] || !synth_extent[2] || !synth_extent[3] ||
        !synth_extent[4])
      throw ParseError(1, "synthetic map needs synth_x_min/x_max/y_min/y_max/spacing");
    cfg.synth = synth;
  }
  return cfg;
}

}  // namespace magnav
