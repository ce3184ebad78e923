#pragma once

#include <span>
#include <string>
#include <vector>

#include "magnav/entropy.hpp"
#include "magnav/geometry.hpp"
#include "magnav/grid_field.hpp"

namespace magnav {

using Path = std::vector<Vec2>;

struct PlannerConfig {
  double step_size = 0.05;       // meters per descent step
  double goal_tolerance = 0.1;   // meters
  int max_iterations = 20000;
  double capture_radius = 0.3;   // meters; entropy points inside are consumed
  double rho_floor = 1e-3;       // meters; guards the 1/rho goal weight
  int smoothing_window = 9;      // odd waypoint count for the moving average
  double k_sigma = 5.0;          // entropy point selection threshold
  int max_points = 64;

  void validate() const;
};

struct PlanResult {
  Path path;                                 // smoothed waypoints, start first
  bool converged = false;                    // last waypoint within goal_tolerance
  int iterations = 0;
  std::vector<EntropyPoint> consumed_points; // in visit order
};

/// Goal scale factor 10*e^(1/rho), evaluated at max(rho, rho_floor) and
/// saturated to the largest finite double. Monotone non-increasing in rho.
double goal_weight(double rho_goal, double rho_floor = 1e-3);

/// Attractive goal potential 0.5 * goal_weight(rho) * rho.
double goal_potential(Vec2 q, Vec2 goal, double rho_floor = 1e-3);

/// Sum of attractive entropy-point potentials 0.5 * weight_i * rho_i.
double entropy_potential(Vec2 q, std::span<const EntropyPoint> points);

/// Unit descent direction of the combined potential with the scale factors
/// frozen at q: -normalize(0.5*xi_G*u_G + sum 0.5*xi_H*u_H), where each u is
/// the unit vector from the attractor toward q. A zero resultant falls back
/// to heading straight for the goal.
Vec2 descent_direction(Vec2 q, Vec2 goal, std::span<const EntropyPoint> points,
                       double rho_floor = 1e-3);

/// Gradient descent from start toward goal through the low-entropy points of
/// emap. Points approached within capture_radius are consumed (removed from
/// the active set) so the descent cannot stall on them; an oscillation
/// smaller than step_size/10 over two steps force-consumes the nearest
/// active point. The returned path is smoothed with smoothing_window.
PlanResult plan_path(Vec2 start, Vec2 goal, const GridField& emap,
                     const PlannerConfig& cfg);

/// Centered moving average over x and y independently with a window that
/// shrinks at the boundaries, so endpoints are preserved exactly. window
/// must be odd; window=1 is the identity.
Path smooth_path(const Path& path, int window);

/// CSV with header `x,y`, one waypoint per line.
std::string save_path_csv(const Path& path);

/// Key=value metadata block for a plan (converged, iterations, consumed count).
std::string format_plan_meta(const PlanResult& result);

}  // namespace magnav
