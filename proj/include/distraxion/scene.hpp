#pragma once

#include <Eigen/Core>
#include <optional>
#include <vector>

namespace distraxion {

enum class PrimitiveKind { sphere, capsule, box };

// A renderable solid. `body` indexes the task's body colors.
struct Primitive {
  PrimitiveKind kind = PrimitiveKind::sphere;
  int body = 0;
  // sphere: center; capsule: segment start; box: center.
  Eigen::Vector3d a = Eigen::Vector3d::Zero();
  // capsule: segment end.
  Eigen::Vector3d b = Eigen::Vector3d::Zero();
  double radius = 0.0;
  // box only: half extents along the columns of `rotation`.
  Eigen::Vector3d half_extents = Eigen::Vector3d::Zero();
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();

  static Primitive sphere(int body, const Eigen::Vector3d& center, double radius);
  static Primitive capsule(int body, const Eigen::Vector3d& from, const Eigen::Vector3d& to, double radius);
  static Primitive box(int body, const Eigen::Vector3d& center, const Eigen::Vector3d& half_extents,
                       const Eigen::Matrix3d& rotation = Eigen::Matrix3d::Identity());
};

// Horizontal checkered floor at z = height.
struct GroundPlane {
  double height = 0.0;
  double opacity = 0.3;
  double checker_size = 0.5;
  Eigen::Vector3d color_a{0.30, 0.38, 0.48};
  Eigen::Vector3d color_b{0.22, 0.29, 0.38};
};

struct SceneDescription {
  std::vector<Primitive> primitives;
  std::optional<GroundPlane> ground;
  Eigen::Vector3d skybox{0.42, 0.58, 0.78};
  // Direction the light travels (world space).
  Eigen::Vector3d light_direction{-0.3, 0.5, -1.0};
};

}  // namespace distraxion
