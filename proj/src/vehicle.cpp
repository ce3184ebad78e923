#include "magnav/vehicle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace magnav {

void StanleyConfig::validate() const {
  if (!(v > 0.0)) throw std::invalid_argument("StanleyConfig: v must be positive");
  if (!(omega_max > 0.0)) throw std::invalid_argument("StanleyConfig: omega_max must be positive");
  if (k_s < 0.0) throw std::invalid_argument("StanleyConfig: k_s must be >= 0");
}

Pose step_truth(const Pose& pose, const Control& u, double dt, const MotionNoise& noise,
                Rng& rng) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_truth: dt must be positive");
  double ex = noise.sigma_x * rng.gauss();
  double ey = noise.sigma_y * rng.gauss();
  double et = noise.sigma_theta * rng.gauss();
  return unicycle_step(pose, u, dt, ex, ey, et);
}

double measure(const GridField& map, const Pose& pose, const SensorNoise& noise, Rng& rng) {
  double value = map.interpolate(pose.x, pose.y);
  return value + noise.sigma * rng.gauss();
}

PathQuery nearest_path_point(const Path& path, Vec2 p) {
  if (path.size() < 2)
    throw std::invalid_argument("nearest_path_point: path needs at least 2 waypoints");

  PathQuery best;
  double best_d2 = std::numeric_limits<double>::infinity();
  bool found = false;
  for (size_t s = 0; s + 1 < path.size(); ++s) {
    Vec2 a = path[s];
    Vec2 ab = path[s + 1] - a;
    double len2 = dot(ab, ab);
    if (len2 == 0.0) continue;  // duplicate waypoints carry no tangent
    double t = std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
    Vec2 c = a + t * ab;
    double d2 = dot(p - c, p - c);
    if (d2 < best_d2) {
      best_d2 = d2;
      double side = cross(ab, p - a);
      double dist = std::sqrt(d2);
      best = {static_cast<int>(s), c, side >= 0.0 ? dist : -dist,
              std::atan2(ab.y, ab.x)};
      found = true;
    }
  }
  if (!found) {
    // Path collapsed to a point: distance to it, tangent defaults to +x.
    Vec2 a = path.front();
    double dist = distance(p, a);
    best = {0, a, p.y - a.y >= 0.0 ? dist : -dist, 0.0};
  }
  return best;
}

double stanley_control(const Pose& est, const Path& path, const StanleyConfig& cfg) {
  cfg.validate();
  PathQuery nearest = nearest_path_point(path, {est.x, est.y});
  double heading_error = wrap_angle(nearest.tangent_heading - est.theta);
  double omega = heading_error - std::atan(cfg.k_s * nearest.cross_track / cfg.v);
  return std::clamp(omega, -cfg.omega_max, cfg.omega_max);
}

}  // namespace magnav
