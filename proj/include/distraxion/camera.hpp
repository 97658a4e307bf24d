#pragma once

#include <Eigen/Core>
#include <optional>
#include <stdexcept>

#include "distraxion/distraction.hpp"
#include "distraxion/image.hpp"

namespace distraxion {

class GeometryError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline constexpr double kDefaultFieldOfView = 0.7853981633974483;  // 45 degrees, vertical

struct SphericalCoords {
  double phi = 0.0;
  double theta = 0.0;
  double r = 0.0;
};

// Scene up axis is +z; theta is the polar angle from +z.
Eigen::Vector3d spherical_to_cartesian(double phi, double theta, double r);
SphericalCoords cartesian_to_spherical(const Eigen::Vector3d& p);

// focus + r * r_original * (sin(theta) cos(phi), sin(theta) sin(phi), cos(theta)).
Eigen::Vector3d camera_position(const CameraState& pose, const Eigen::Vector3d& focus, double r_original);

enum class FocusMode { tracking, fixed };

struct Focus {
  FocusMode mode = FocusMode::fixed;
  Eigen::Vector3d point = Eigen::Vector3d::Zero();
};

// orientation columns are (right, down, forward) in world coordinates: a
// proper rotation whose camera-frame x/y axes match pixel x/y.
struct CameraExtrinsics {
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  Eigen::Matrix3d orientation = Eigen::Matrix3d::Identity();
  double field_of_view = kDefaultFieldOfView;

  Eigen::Vector3d right() const { return orientation.col(0); }
  Eigen::Vector3d down() const { return orientation.col(1); }
  Eigen::Vector3d forward() const { return orientation.col(2); }
};

// Aims the camera at `focus`, with screen-up derived from +z (fallback +x when
// looking along the z axis), then rolls the image plane by `roll` about the
// view direction. Throws GeometryError when position is within 1e-9 of focus.
CameraExtrinsics look_at_with_roll(const Eigen::Vector3d& position, const Eigen::Vector3d& focus, double roll,
                                   double field_of_view = kDefaultFieldOfView);

double focal_length_pixels(const CameraExtrinsics& camera, Size image_size);

// Pinhole projection to continuous pixel coordinates (pixel (i, j) covers
// [i, i+1) x [j, j+1); the image center is (W/2, H/2)). nullopt when the point
// is not in front of the camera.
std::optional<Eigen::Vector2d> project(const CameraExtrinsics& camera, const Eigen::Vector3d& point,
                                       Size image_size);

// Unit world-space ray through continuous pixel coordinate (px, py).
Eigen::Vector3d pixel_ray(const CameraExtrinsics& camera, double px, double py, Size image_size);

}  // namespace distraxion
