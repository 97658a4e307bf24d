#pragma once

#include <Eigen/Core>
#include <optional>

#include "distraxion/camera.hpp"
#include "distraxion/distraction.hpp"
#include "distraxion/image.hpp"
#include "distraxion/scene.hpp"

namespace distraxion {

inline constexpr Size kDefaultRenderSize{100, 100};
inline constexpr Size kDefaultObservationCrop{84, 84};

struct RayHit {
  double t = 0.0;
  Eigen::Vector3d normal = Eigen::Vector3d::Zero();
};

// Nearest intersection with t > 0 along a unit-direction ray.
std::optional<RayHit> intersect(const Primitive& primitive, const Eigen::Vector3d& origin,
                                const Eigen::Vector3d& direction);

// Renders primitives with their ColorState colors (flat shading, one
// directional light) over a background layer. Background pixels are
// round((1 - beta_bg) * skybox + beta_bg * video) per channel; without a
// video frame they are the skybox. The ground plane is alpha-blended over
// the background with its opacity. `background` is sampled in screen space
// (nearest pixel when its size differs from `size`).
// Throws ImageError on a zero-size image and std::invalid_argument when a
// primitive references a body missing from `colors` or beta_bg is outside [0, 1].
Frame render(const SceneDescription& scene, const CameraExtrinsics& camera, const ColorState& colors,
             const Frame* background, double beta_bg, Size size);

}  // namespace distraxion
