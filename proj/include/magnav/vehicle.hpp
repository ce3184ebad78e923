#pragma once

#include "magnav/geometry.hpp"
#include "magnav/grid_field.hpp"
#include "magnav/localization.hpp"
#include "magnav/planner.hpp"
#include "magnav/rng.hpp"

namespace magnav {

struct StanleyConfig {
  double k_s = 0.001;      // cross-track gain
  double v = 0.15;         // commanded linear speed, m/s
  double omega_max = 1.0;  // rad/s saturation

  void validate() const;
};

/// Ground-truth unicycle step; same kinematics as ParticleSet::predict with
/// the noise drawn from the supplied generator (x, y, theta order).
Pose step_truth(const Pose& pose, const Control& u, double dt, const MotionNoise& noise,
                Rng& rng);

/// Total-field magnetometer model: interpolated map value plus Gaussian
/// noise. Throws BoundsError when the pose is outside the map.
double measure(const GridField& map, const Pose& pose, const SensorNoise& noise, Rng& rng);

struct PathQuery {
  int segment_index = 0;        // owning segment (waypoint i to i+1)
  Vec2 point;                   // closest point on the path
  double cross_track = 0.0;     // meters, positive when left of the tangent
  double tangent_heading = 0.0; // radians, heading of the owning segment
};

/// Exact closest point over all path segments (projections clamped to the
/// endpoints); ties go to the lowest segment index. Cross-track is the
/// distance to the closest point, signed positive when the query is left of
/// the owning segment's tangent.
PathQuery nearest_path_point(const Path& path, Vec2 p);

/// Stanley steering law: heading error plus the cross-track correction
/// arctan(k_s * delta / v), clamped to +-omega_max. Cross-track is
/// left-positive, so its term enters negated to steer back toward the path.
double stanley_control(const Pose& est, const Path& path, const StanleyConfig& cfg);

}  // namespace magnav
