#include "distraxion/camera.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <cmath>

namespace distraxion {

Eigen::Vector3d spherical_to_cartesian(double phi, double theta, double r) {
  const double s = std::sin(theta);
  return {r * s * std::cos(phi), r * s * std::sin(phi), r * std::cos(theta)};
}

SphericalCoords cartesian_to_spherical(const Eigen::Vector3d& p) {
  SphericalCoords s;
  s.r = p.norm();
  if (s.r == 0.0) return s;
  s.theta = std::acos(std::clamp(p.z() / s.r, -1.0, 1.0));
  s.phi = std::atan2(p.y(), p.x());
  return s;
}

Eigen::Vector3d camera_position(const CameraState& pose, const Eigen::Vector3d& focus, double r_original) {
  if (!(pose.r > 0.0)) throw GeometryError("camera radius must be positive");
  return focus + spherical_to_cartesian(pose.phi, pose.theta, pose.r * r_original);
}

CameraExtrinsics look_at_with_roll(const Eigen::Vector3d& position, const Eigen::Vector3d& focus, double roll,
                                   double field_of_view) {
  const Eigen::Vector3d delta = focus - position;
  if (delta.norm() < 1e-9) throw GeometryError("camera position coincides with its focus point");
  const Eigen::Vector3d forward = delta.normalized();

  Eigen::Vector3d up = Eigen::Vector3d::UnitZ();
  if (forward.cross(up).norm() < 1e-9) up = Eigen::Vector3d::UnitX();
  const Eigen::Vector3d right0 = forward.cross(up).normalized();
  const Eigen::Vector3d down0 = forward.cross(right0);

  const double c = std::cos(roll), s = std::sin(roll);
  CameraExtrinsics cam;
  cam.position = position;
  cam.field_of_view = field_of_view;
  cam.orientation.col(0) = c * right0 + s * down0;
  cam.orientation.col(1) = -s * right0 + c * down0;
  cam.orientation.col(2) = forward;
  return cam;
}

double focal_length_pixels(const CameraExtrinsics& camera, Size image_size) {
  return 0.5 * image_size.height / std::tan(0.5 * camera.field_of_view);
}

std::optional<Eigen::Vector2d> project(const CameraExtrinsics& camera, const Eigen::Vector3d& point,
                                       Size image_size) {
  const Eigen::Vector3d local = camera.orientation.transpose() * (point - camera.position);
  if (local.z() <= 1e-9) return std::nullopt;
  const double f = focal_length_pixels(camera, image_size);
  return Eigen::Vector2d(0.5 * image_size.width + f * local.x() / local.z(),
                         0.5 * image_size.height + f * local.y() / local.z());
}

Eigen::Vector3d pixel_ray(const CameraExtrinsics& camera, double px, double py, Size image_size) {
  const double f = focal_length_pixels(camera, image_size);
  const Eigen::Vector3d local((px - 0.5 * image_size.width) / f, (py - 0.5 * image_size.height) / f, 1.0);
  return (camera.orientation * local).normalized();
}

}  // namespace distraxion
