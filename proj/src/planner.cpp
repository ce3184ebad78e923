#include "magnav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <stdexcept>

namespace magnav {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

void PlannerConfig::validate() const {
  if (!(step_size > 0.0)) throw std::invalid_argument("PlannerConfig: step_size must be positive");
  if (!(goal_tolerance > 0.0))
    throw std::invalid_argument("PlannerConfig: goal_tolerance must be positive");
  if (max_iterations < 1)
    throw std::invalid_argument("PlannerConfig: max_iterations must be >= 1");
  if (!(capture_radius >= step_size))
    throw std::invalid_argument("PlannerConfig: capture_radius must be >= step_size");
  if (!(rho_floor > 0.0)) throw std::invalid_argument("PlannerConfig: rho_floor must be positive");
  if (smoothing_window < 1 || smoothing_window % 2 == 0)
    throw std::invalid_argument("PlannerConfig: smoothing_window must be odd and >= 1");
  if (k_sigma < 0.0) throw std::invalid_argument("PlannerConfig: k_sigma must be >= 0");
  if (max_points < 0) throw std::invalid_argument("PlannerConfig: max_points must be >= 0");
}

double goal_weight(double rho_goal, double rho_floor) {
  if (rho_goal < 0.0) throw std::invalid_argument("goal_weight: rho must be >= 0");
  if (!(rho_floor > 0.0)) throw std::invalid_argument("goal_weight: rho_floor must be positive");
  double xi = 10.0 * std::exp(1.0 / std::max(rho_goal, rho_floor));
  return std::isfinite(xi) ? xi : std::numeric_limits<double>::max();
}

double goal_potential(Vec2 q, Vec2 goal, double rho_floor) {
  double rho = distance(q, goal);
  if (rho == 0.0) return 0.0;
  return 0.5 * goal_weight(rho, rho_floor) * rho;
}

double entropy_potential(Vec2 q, std::span<const EntropyPoint> points) {
  double u = 0.0;
  for (const EntropyPoint& p : points) u += 0.5 * p.weight * distance(q, {p.x, p.y});
  return u;
}

Vec2 descent_direction(Vec2 q, Vec2 goal, std::span<const EntropyPoint> points,
                       double rho_floor) {
  Vec2 gradient{};  // of the frozen-weight potential; points uphill
  double rho_goal = distance(q, goal);
  Vec2 u_goal{};
  if (rho_goal > 0.0) {
    u_goal = (1.0 / rho_goal) * (q - goal);
    gradient = gradient + (0.5 * goal_weight(rho_goal, rho_floor)) * u_goal;
  }
  for (const EntropyPoint& p : points) {
    Vec2 d = q - Vec2{p.x, p.y};
    double rho = norm(d);
    if (rho == 0.0) continue;  // attractor exactly at q pulls nowhere
    gradient = gradient + (0.5 * p.weight / rho) * d;
  }
  double magnitude = norm(gradient);
  if (magnitude == 0.0) {
    if (rho_goal > 0.0) return -u_goal;
    return {1.0, 0.0};  // fully degenerate; plan_path never reaches this
  }
  return (-1.0 / magnitude) * gradient;
}

PlanResult plan_path(Vec2 start, Vec2 goal, const GridField& emap,
                     const PlannerConfig& cfg) {
  cfg.validate();
  if (!emap.contains(start.x, start.y)) throw BoundsError(start.x, start.y);
  if (!emap.contains(goal.x, goal.y)) throw BoundsError(goal.x, goal.y);

  std::vector<EntropyPoint> active =
      select_low_entropy_points(emap, cfg.k_sigma, cfg.max_points);

  PlanResult result;
  Path raw;
  raw.push_back(start);
  Vec2 q = start;
  int iterations = 0;
  bool converged = false;

  while (true) {
    for (auto it = active.begin(); it != active.end();) {
      if (distance(q, {it->x, it->y}) <= cfg.capture_radius) {
        result.consumed_points.push_back(*it);
        it = active.erase(it);
      } else {
        ++it;
      }
    }
    if (distance(q, goal) <= cfg.goal_tolerance) {
      converged = true;
      break;
    }
    if (iterations >= cfg.max_iterations) break;

    // Oscillation between competing attractors: force-consume the nearest one.
    if (raw.size() >= 3 && !active.empty() &&
        distance(raw[raw.size() - 1], raw[raw.size() - 3]) < cfg.step_size / 10.0) {
      auto nearest = std::min_element(
          active.begin(), active.end(), [&q](const EntropyPoint& a, const EntropyPoint& b) {
            return distance(q, {a.x, a.y}) < distance(q, {b.x, b.y});
          });
      result.consumed_points.push_back(*nearest);
      active.erase(nearest);
    }

    q = q + cfg.step_size * descent_direction(q, goal, active, cfg.rho_floor);
    raw.push_back(q);
    ++iterations;
  }

  result.path = smooth_path(raw, cfg.smoothing_window);
  result.converged = converged;
  result.iterations = iterations;
  return result;
}

Path smooth_path(const Path& path, int window) {
  if (window < 1 || window % 2 == 0)
    throw std::invalid_argument("smooth_path: window must be odd and >= 1");
  if (window == 1 || path.size() < 3) return path;
  int n = static_cast<int>(path.size());
  int half = (window - 1) / 2;
  Path out(path.size());
  for (int i = 0; i < n; ++i) {
    int h = std::min({half, i, n - 1 - i});
    double sx = 0.0, sy = 0.0;
    for (int k = i - h; k <= i + h; ++k) {
      sx += path[k].x;
      sy += path[k].y;
    }
    double inv = 1.0 / (2 * h + 1);
    out[i] = {sx * inv, sy * inv};
  }
  return out;
}

std::string save_path_csv(const Path& path) {
  std::string out = "x,y\n";
  for (const Vec2& p : path) out += format_double(p.x) + "," + format_double(p.y) + "\n";
  return out;
}

std::string format_plan_meta(const PlanResult& result) {
  std::string out;
  out += std::string("converged=") + (result.converged ? "true" : "false") + "\n";
  out += "iterations=" + std::to_string(result.iterations) + "\n";
  out += "consumed_points=" + std::to_string(result.consumed_points.size()) + "\n";
  return out;
}

}  // namespace magnav
