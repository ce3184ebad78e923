#include "magnav/localization.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace magnav {

namespace {
// Stream separator for the resampling generator derived from the same seed.
constexpr std::uint64_t kResampleStreamOffset = 0x9E3779B97F4A7C15ULL;
}  // namespace

double det3(const std::array<double, 9>& m) {
  return m[0] * (m[4] * m[8] - m[5] * m[7]) - m[1] * (m[3] * m[8] - m[5] * m[6]) +
         m[2] * (m[3] * m[7] - m[4] * m[6]);
}

ParticleSet::ParticleSet(const Pose& pose, const MotionNoise& spread, int n,
                         std::uint64_t seed)
    : noise_rng_(seed), resample_rng_(seed + kResampleStreamOffset) {
  if (n < 1) throw std::invalid_argument("ParticleSet: need at least one particle");
  particles_.reserve(n);
  double w = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    Pose p;
    p.x = pose.x + spread.sigma_x * noise_rng_.gauss();
    p.y = pose.y + spread.sigma_y * noise_rng_.gauss();
    p.theta = wrap_angle(pose.theta + spread.sigma_theta * noise_rng_.gauss());
    particles_.push_back({p, w});
  }
}

ParticleSet::ParticleSet(std::vector<Particle> particles, std::uint64_t seed)
    : particles_(std::move(particles)),
      noise_rng_(seed),
      resample_rng_(seed + kResampleStreamOffset) {
  if (particles_.empty())
    throw std::invalid_argument("ParticleSet: need at least one particle");
  double total = 0.0;
  for (const Particle& p : particles_) {
    if (p.weight < 0.0) throw std::invalid_argument("ParticleSet: negative weight");
    total += p.weight;
  }
  if (!(total > 0.0)) throw std::invalid_argument("ParticleSet: weights sum to zero");
  for (Particle& p : particles_) {
    p.weight /= total;
    p.pose.theta = wrap_angle(p.pose.theta);
  }
}

void ParticleSet::predict(const Control& u, double dt, const MotionNoise& noise) {
  if (!(dt > 0.0)) throw std::invalid_argument("predict: dt must be positive");
  for (Particle& p : particles_) {
    double ex = noise.sigma_x * noise_rng_.gauss();
    double ey = noise.sigma_y * noise_rng_.gauss();
    double et = noise.sigma_theta * noise_rng_.gauss();
    p.pose = unicycle_step(p.pose, u, dt, ex, ey, et);
  }
}

void ParticleSet::update_weights(double z, const GridField& map,
                                 const SensorNoise& noise) {
  if (!std::isfinite(z)) throw std::invalid_argument("update_weights: measurement must be finite");
  if (!(noise.sigma > 0.0)) throw std::invalid_argument("update_weights: sigma must be positive");
  const double inv_two_var = 1.0 / (2.0 * noise.sigma * noise.sigma);
  const double log_out_of_bounds = std::log(1e-300);

  std::vector<double> logw(particles_.size());
  bool any_in_bounds = false;
  double max_logw = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < particles_.size(); ++i) {
    const Pose& p = particles_[i].pose;
    double loglik;
    if (map.contains(p.x, p.y)) {
      any_in_bounds = true;
      double r = z - map.interpolate(p.x, p.y);
      loglik = -r * r * inv_two_var;
    } else {
      loglik = log_out_of_bounds;
    }
    logw[i] = std::log(particles_[i].weight) + loglik;
    max_logw = std::max(max_logw, logw[i]);
  }

  auto reset_uniform = [this] {
    double w = 1.0 / particles_.size();
    for (Particle& p : particles_) p.weight = w;
  };
  if (!any_in_bounds || !std::isfinite(max_logw)) {
    reset_uniform();
    return;
  }
  double sum = 0.0;
  for (double& lw : logw) {
    lw = std::exp(lw - max_logw);
    sum += lw;
  }
  if (!(sum > 0.0) || !std::isfinite(sum)) {
    reset_uniform();
    return;
  }
  for (size_t i = 0; i < particles_.size(); ++i) particles_[i].weight = logw[i] / sum;
}

double ParticleSet::effective_sample_size() const {
  double sum_sq = 0.0;
  for (const Particle& p : particles_) sum_sq += p.weight * p.weight;
  return 1.0 / sum_sq;
}

bool ParticleSet::resample(double ess_threshold_fraction) {
  if (!(ess_threshold_fraction > 0.0) || ess_threshold_fraction > 1.0)
    throw std::invalid_argument("resample: fraction must be in (0, 1]");
  int n = size();
  if (effective_sample_size() >= ess_threshold_fraction * n) return false;

  double u0 = resample_rng_.uniform() / n;
  std::vector<Particle> out;
  out.reserve(n);
  double cumulative = particles_[0].weight;
  int j = 0;
  double w = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    double target = u0 + static_cast<double>(i) / n;
    while (cumulative <= target && j + 1 < n) {
      ++j;
      cumulative += particles_[j].weight;
    }
    out.push_back({particles_[j].pose, w});
  }
  particles_ = std::move(out);
  return true;
}

PoseEstimate ParticleSet::estimate() const {
  // Moments are taken about the first particle so a fully collapsed set
  // yields an exactly zero covariance.
  const Pose& ref = particles_[0].pose;
  double sw = 0.0, sx = 0.0, sy = 0.0, sin_sum = 0.0, cos_sum = 0.0;
  for (const Particle& p : particles_) {
    sw += p.weight;
    sx += p.weight * (p.pose.x - ref.x);
    sy += p.weight * (p.pose.y - ref.y);
    double dt = p.pose.theta - ref.theta;
    sin_sum += p.weight * std::sin(dt);
    cos_sum += p.weight * std::cos(dt);
  }
  double mx = ref.x + sx / sw;
  double my = ref.y + sy / sw;
  double mtheta = wrap_angle(ref.theta + std::atan2(sin_sum, cos_sum));

  std::array<double, 9> cov{};
  for (const Particle& p : particles_) {
    double dx = p.pose.x - mx;
    double dy = p.pose.y - my;
    double dt = wrap_angle(p.pose.theta - mtheta);
    cov[0] += p.weight * dx * dx;
    cov[1] += p.weight * dx * dy;
    cov[2] += p.weight * dx * dt;
    cov[4] += p.weight * dy * dy;
    cov[5] += p.weight * dy * dt;
    cov[8] += p.weight * dt * dt;
  }
  cov[3] = cov[1];
  cov[6] = cov[2];
  cov[7] = cov[5];

  PoseEstimate est;
  est.mean = {mx, my, mtheta};
  est.covariance = cov;
  est.cov_det = det3(cov);
  return est;
}

}  // namespace magnav
