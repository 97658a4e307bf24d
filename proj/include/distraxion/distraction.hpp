#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "distraxion/rng.hpp"

namespace distraxion {

// Difficulty of each distraction axis. All betas lie in [0, 1].
struct DifficultyConfig {
  double beta_cam = 0.0;
  double beta_rgb = 0.0;
  // Weight of the video frame against the skybox when a background is active.
  double beta_bg = 1.0;
  // Number of background videos; 0 disables the background distraction.
  int num_videos = 0;
  bool dynamic = false;
  std::uint64_t seed = 0;

  void validate() const;
  friend bool operator==(const DifficultyConfig&, const DifficultyConfig&) = default;
};

// Camera viewing range. Radii are normalized so that the task's original distance is 1.
struct CameraRange {
  double phi_max = 0.0;
  double theta_max = 0.0;
  double roll_max = 0.0;
  double r_min = 1.0;
  double r_max = 1.0;
};

struct CameraSpeed {
  double v_max = 0.0;
  double sigma = 0.0;
  double v_roll_max = 0.0;
  double sigma_roll = 0.0;
};

// The task's undistracted viewing direction (azimuth, polar angle from +z).
struct CameraAnchor {
  double phi = 0.0;
  double theta = 0.0;
};

struct CameraState {
  double phi = 0.0;
  double theta = 0.0;
  double r = 1.0;
  double roll = 0.0;
  Eigen::Vector3d velocity = Eigen::Vector3d::Zero();
  double roll_velocity = 0.0;

  friend bool operator==(const CameraState&, const CameraState&) = default;
};

struct BodyColor {
  Eigen::Vector3d original = Eigen::Vector3d::Zero();
  Eigen::Vector3d current = Eigen::Vector3d::Zero();
  friend bool operator==(const BodyColor&, const BodyColor&) = default;
};

struct ColorState {
  std::vector<BodyColor> bodies;
  friend bool operator==(const ColorState&, const ColorState&) = default;
};

struct BackgroundSchedule {
  int video_index = 0;
  int frame_index = 0;
  int direction = 1;
  friend bool operator==(const BackgroundSchedule&, const BackgroundSchedule&) = default;
};

// phi_max = theta_max = roll_max = pi*beta/2, r in [1 - beta/2, 1 + 3*beta/2].
CameraRange camera_range_from_scale(double beta_cam);

// v_max = 2*beta/5, sigma = beta/10, v_roll_max = pi*beta/50, sigma_roll = pi*beta/300.
CameraSpeed camera_speed_params(double beta_cam);

// Closed interval of admissible values for each pose component.
struct PoseBounds {
  double phi_lo, phi_hi;
  double theta_lo, theta_hi;
  double r_lo, r_hi;
  double roll_lo, roll_hi;
};

// Azimuth and roll are symmetric about the anchor; the polar angle only moves
// toward the up axis (theta in [anchor - theta_max, anchor], clamped to [0, pi]).
PoseBounds pose_bounds(const CameraRange& range, const CameraAnchor& anchor);

bool within_range(const CameraState& state, const CameraRange& range, const CameraAnchor& anchor,
                  double tol = 1e-12);

// Uniform start pose. When `dynamic`, velocity components are uniform in
// [-v_max, v_max] (then clipped to norm v_max) and roll velocity uniform in
// [-v_roll_max, v_roll_max]; otherwise both are zero.
CameraState sample_camera_start(const CameraRange& range, const CameraSpeed& speed, const CameraAnchor& anchor,
                                bool dynamic, Rng& rng);

// One random-walk step: velocity gets N(0, sigma I) noise and is clipped to
// norm v_max, the position moves in Cartesian space (unit anchor radius), is
// converted back to spherical coordinates and clipped per component. Roll
// follows the same pattern with a scalar walk. Velocities are not altered by
// pose clipping.
CameraState step_camera(const CameraState& state, const CameraRange& range, const CameraSpeed& speed,
                        const CameraAnchor& anchor, Rng& rng);

ColorState sample_colors(std::span<const Eigen::Vector3d> originals, double beta_rgb, Rng& rng);
ColorState step_colors(const ColorState& state, double beta_rgb, Rng& rng);

// Returns nullopt when num_videos == 0 (background distraction disabled).
// Throws ConfigError when num_videos exceeds the available videos or any length is < 1.
std::optional<BackgroundSchedule> sample_background(int num_videos, std::span<const int> video_lengths, Rng& rng);

// Ping-pong playback: advances by `direction`, reversing at the first/last frame.
BackgroundSchedule step_background(const BackgroundSchedule& schedule, int length);

// Owns the three seeded processes for one environment instance.
class DistractionProcess {
 public:
  DistractionProcess(DifficultyConfig config, CameraAnchor anchor, std::vector<Eigen::Vector3d> original_colors,
                     std::vector<int> video_lengths);

  // Resamples every process (called at episode start).
  void reset();
  // Advances the dynamic processes one step; no-op in static mode.
  void advance();

  const DifficultyConfig& config() const { return config_; }
  const CameraAnchor& anchor() const { return anchor_; }
  const CameraRange& range() const { return range_; }
  const CameraSpeed& speed() const { return speed_; }
  const CameraState& camera() const { return camera_; }
  const ColorState& colors() const { return colors_; }
  const std::optional<BackgroundSchedule>& background() const { return background_; }

 private:
  DifficultyConfig config_;
  CameraAnchor anchor_;
  CameraRange range_;
  CameraSpeed speed_;
  std::vector<Eigen::Vector3d> original_colors_;
  std::vector<int> video_lengths_;
  Rng camera_rng_;
  Rng color_rng_;
  Rng background_rng_;
  CameraState camera_;
  ColorState colors_;
  std::optional<BackgroundSchedule> background_;
};

}  // namespace distraxion
