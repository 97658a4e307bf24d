#include "distraxion/distraction.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>
#include <numbers>
#include <string>

#include "distraxion/camera.hpp"

namespace distraxion {

namespace {

constexpr double kPi = std::numbers::pi;

void check_beta(double beta, const char* name) {
  if (!(beta >= 0.0 && beta <= 1.0)) {
    throw ConfigError(std::string(name) + " must lie in [0, 1], got " + std::to_string(beta));
  }
}

Eigen::Vector3d clip_norm(const Eigen::Vector3d& v, double max_norm) {
  const double n = v.norm();
  if (n <= max_norm) return v;
  if (max_norm <= 0.0) return Eigen::Vector3d::Zero();
  return v * (max_norm / n);
}

double clip_abs(double v, double max_abs) { return std::clamp(v, -max_abs, max_abs); }

}  // namespace

void DifficultyConfig::validate() const {
  check_beta(beta_cam, "beta_cam");
  check_beta(beta_rgb, "beta_rgb");
  check_beta(beta_bg, "beta_bg");
  if (num_videos < 0) throw ConfigError("num_videos must be >= 0, got " + std::to_string(num_videos));
}

CameraRange camera_range_from_scale(double beta_cam) {
  check_beta(beta_cam, "beta_cam");
  const double angle = kPi * beta_cam / 2.0;
  return {angle, angle, angle, 1.0 - 0.5 * beta_cam, 1.0 + 1.5 * beta_cam};
}

CameraSpeed camera_speed_params(double beta_cam) {
  check_beta(beta_cam, "beta_cam");
  return {2.0 * beta_cam / 5.0, beta_cam / 10.0, kPi * beta_cam / 50.0, kPi * beta_cam / 300.0};
}

PoseBounds pose_bounds(const CameraRange& range, const CameraAnchor& anchor) {
  PoseBounds b{};
  b.phi_lo = anchor.phi - range.phi_max;
  b.phi_hi = anchor.phi + range.phi_max;
  b.theta_hi = std::clamp(anchor.theta, 0.0, kPi);
  b.theta_lo = std::clamp(anchor.theta - range.theta_max, 0.0, b.theta_hi);
  b.r_lo = range.r_min;
  b.r_hi = range.r_max;
  b.roll_lo = -range.roll_max;
  b.roll_hi = range.roll_max;
  return b;
}

bool within_range(const CameraState& s, const CameraRange& range, const CameraAnchor& anchor, double tol) {
  const PoseBounds b = pose_bounds(range, anchor);
  auto in = [tol](double v, double lo, double hi) { return v >= lo - tol && v <= hi + tol; };
  return in(s.phi, b.phi_lo, b.phi_hi) && in(s.theta, b.theta_lo, b.theta_hi) && in(s.r, b.r_lo, b.r_hi) &&
         in(s.roll, b.roll_lo, b.roll_hi);
}

CameraState sample_camera_start(const CameraRange& range, const CameraSpeed& speed, const CameraAnchor& anchor,
                                bool dynamic, Rng& rng) {
  const PoseBounds b = pose_bounds(range, anchor);
  // Degenerate intervals are returned exactly instead of drawn.
  auto draw = [&rng](double lo, double hi) { return lo == hi ? lo : uniform(rng, lo, hi); };
  CameraState s;
  s.phi = draw(b.phi_lo, b.phi_hi);
  s.theta = draw(b.theta_lo, b.theta_hi);
  s.r = draw(b.r_lo, b.r_hi);
  s.roll = draw(b.roll_lo, b.roll_hi);
  if (dynamic) {
    for (int i = 0; i < 3; ++i) s.velocity[i] = draw(-speed.v_max, speed.v_max);
    s.velocity = clip_norm(s.velocity, speed.v_max);
    s.roll_velocity = draw(-speed.v_roll_max, speed.v_roll_max);
  }
  return s;
}

CameraState step_camera(const CameraState& state, const CameraRange& range, const CameraSpeed& speed,
                        const CameraAnchor& anchor, Rng& rng) {
  CameraState next = state;
  Eigen::Vector3d noise;
  for (int i = 0; i < 3; ++i) noise[i] = normal(rng, speed.sigma);
  next.velocity = clip_norm(state.velocity + noise, speed.v_max);
  next.roll_velocity = clip_abs(state.roll_velocity + normal(rng, speed.sigma_roll), speed.v_roll_max);

  const PoseBounds b = pose_bounds(range, anchor);
  if (!next.velocity.isZero(0.0)) {
    const Eigen::Vector3d moved = spherical_to_cartesian(state.phi, state.theta, state.r) + next.velocity;
    const SphericalCoords sph = cartesian_to_spherical(moved);
    // Keep the azimuth continuous: unwrap around the anchor, and hold it at the pole.
    double phi = state.phi;
    if (std::hypot(moved.x(), moved.y()) > 1e-12) {
      phi = anchor.phi + std::remainder(sph.phi - anchor.phi, 2.0 * kPi);
    }
    next.phi = std::clamp(phi, b.phi_lo, b.phi_hi);
    next.theta = std::clamp(sph.theta, b.theta_lo, b.theta_hi);
    next.r = std::clamp(sph.r, b.r_lo, b.r_hi);
  }
  next.roll = std::clamp(state.roll + next.roll_velocity, b.roll_lo, b.roll_hi);
  return next;
}

ColorState sample_colors(std::span<const Eigen::Vector3d> originals, double beta_rgb, Rng& rng) {
  check_beta(beta_rgb, "beta_rgb");
  ColorState state;
  state.bodies.reserve(originals.size());
  for (const Eigen::Vector3d& x : originals) {
    BodyColor c{x, x};
    if (beta_rgb > 0.0) {
      for (int ch = 0; ch < 3; ++ch) {
        c.current[ch] = std::clamp(uniform(rng, x[ch] - beta_rgb, x[ch] + beta_rgb), 0.0, 1.0);
      }
    }
    state.bodies.push_back(c);
  }
  return state;
}

ColorState step_colors(const ColorState& state, double beta_rgb, Rng& rng) {
  check_beta(beta_rgb, "beta_rgb");
  ColorState next = state;
  if (beta_rgb == 0.0) return next;
  const double sigma = 0.03 * beta_rgb;
  for (BodyColor& c : next.bodies) {
    for (int ch = 0; ch < 3; ++ch) {
      const double lo = std::max(0.0, c.original[ch] - beta_rgb);
      const double hi = std::min(1.0, c.original[ch] + beta_rgb);
      c.current[ch] = std::clamp(c.current[ch] + normal(rng, sigma), lo, hi);
    }
  }
  return next;
}

std::optional<BackgroundSchedule> sample_background(int num_videos, std::span<const int> video_lengths,
                                                    Rng& rng) {
  if (num_videos < 0) throw ConfigError("num_videos must be >= 0");
  if (num_videos == 0) return std::nullopt;
  if (static_cast<std::size_t>(num_videos) > video_lengths.size()) {
    throw ConfigError("requested " + std::to_string(num_videos) + " background videos but only " +
                      std::to_string(video_lengths.size()) + " are available");
  }
  BackgroundSchedule s;
  s.video_index = uniform_int(rng, 0, num_videos - 1);
  const int length = video_lengths[s.video_index];
  if (length < 1) throw ConfigError("background video " + std::to_string(s.video_index) + " has no frames");
  s.frame_index = uniform_int(rng, 0, length - 1);
  s.direction = uniform_int(rng, 0, 1) == 0 ? -1 : 1;
  return s;
}

BackgroundSchedule step_background(const BackgroundSchedule& schedule, int length) {
  BackgroundSchedule next = schedule;
  if (length <= 1) {
    next.frame_index = 0;
    return next;
  }
  const int target = next.frame_index + next.direction;
  if (target < 0 || target > length - 1) next.direction = -next.direction;
  next.frame_index += next.direction;
  return next;
}

DistractionProcess::DistractionProcess(DifficultyConfig config, CameraAnchor anchor,
                                       std::vector<Eigen::Vector3d> original_colors, std::vector<int> video_lengths)
    : config_(config),
      anchor_(anchor),
      original_colors_(std::move(original_colors)),
      video_lengths_(std::move(video_lengths)),
      camera_rng_(derive_seed(config.seed, "camera")),
      color_rng_(derive_seed(config.seed, "color")),
      background_rng_(derive_seed(config.seed, "background")) {
  config_.validate();
  if (static_cast<std::size_t>(config_.num_videos) > video_lengths_.size()) {
    throw ConfigError("requested " + std::to_string(config_.num_videos) + " background videos but only " +
                      std::to_string(video_lengths_.size()) + " are available");
  }
  range_ = camera_range_from_scale(config_.beta_cam);
  speed_ = camera_speed_params(config_.beta_cam);
  reset();
}

void DistractionProcess::reset() {
  camera_ = sample_camera_start(range_, speed_, anchor_, config_.dynamic, camera_rng_);
  colors_ = sample_colors(original_colors_, config_.beta_rgb, color_rng_);
  background_ = sample_background(config_.num_videos, video_lengths_, background_rng_);
}

void DistractionProcess::advance() {
  if (!config_.dynamic) return;
  camera_ = step_camera(camera_, range_, speed_, anchor_, camera_rng_);
  colors_ = step_colors(colors_, config_.beta_rgb, color_rng_);
  if (background_) {
    background_ = step_background(*background_, video_lengths_[background_->video_index]);
  }
}

}  // namespace distraxion
