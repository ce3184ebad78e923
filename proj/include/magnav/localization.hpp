#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "magnav/geometry.hpp"
#include "magnav/grid_field.hpp"
#include "magnav/rng.hpp"

namespace magnav {

/// Standard deviations of the additive unicycle process noise.
struct MotionNoise {
  double sigma_x = 0.0;      // meters
  double sigma_y = 0.0;      // meters
  double sigma_theta = 0.0;  // radians
};

struct SensorNoise {
  double sigma = 1.0;  // nT
};

/// One unicycle step with additive noise terms. Shared by the particle
/// filter prediction and the ground-truth simulation so both obey the same
/// kinematics.
inline Pose unicycle_step(const Pose& p, const Control& u, double dt, double eps_x,
                          double eps_y, double eps_theta) {
  Pose out;
  out.x = p.x + u.v * std::cos(p.theta) * dt + eps_x;
  out.y = p.y + u.v * std::sin(p.theta) * dt + eps_y;
  out.theta = wrap_angle(p.theta + u.omega * dt + eps_theta);
  return out;
}

struct Particle {
  Pose pose;
  double weight = 0.0;
};

/// Weighted pose estimate. Covariance is row-major over (x, y, theta) with
/// theta residuals wrapped to (-pi, pi]; theta mean is the circular mean.
struct PoseEstimate {
  Pose mean;
  std::array<double, 9> covariance{};
  double cov_det = 0.0;
};

double det3(const std::array<double, 9>& m);

/// Monte Carlo localization state: weighted pose hypotheses plus the owned
/// generators. Prediction noise and resampling draws come from separate
/// streams so a predict-only (dead reckoning) twin sees identical noise.
class ParticleSet {
 public:
  /// n particles Gaussian-sampled around pose with per-axis spread, uniform
  /// weights. Deterministic for a fixed seed.
  ParticleSet(const Pose& pose, const MotionNoise& spread, int n, std::uint64_t seed);

  /// Explicit particle states; weights are normalized to sum 1.
  ParticleSet(std::vector<Particle> particles, std::uint64_t seed);

  /// Unicycle prediction with independent per-particle noise; weights are
  /// untouched. Three gauss draws per particle (x, y, theta order) are
  /// consumed regardless of the noise magnitudes.
  void predict(const Control& u, double dt, const MotionNoise& noise);

  /// Multiplies weights by the Gaussian likelihood of measurement z against
  /// the interpolated map, accumulated in log domain. Particles outside the
  /// map get a 1e-300 likelihood floor; if no particle is in bounds (or the
  /// total underflows) the weights reset to uniform.
  void update_weights(double z, const GridField& map, const SensorNoise& noise);

  /// Systematic resampling when ESS < fraction * n: one uniform draw
  /// u in [0, 1/n), comb at u + k/n over the cumulative weights, weights
  /// reset to 1/n. Returns whether resampling ran.
  bool resample(double ess_threshold_fraction);

  double effective_sample_size() const;

  PoseEstimate estimate() const;

  const std::vector<Particle>& particles() const { return particles_; }
  int size() const { return static_cast<int>(particles_.size()); }

 private:
  std::vector<Particle> particles_;
  Rng noise_rng_;
  Rng resample_rng_;
};

}  // namespace magnav
