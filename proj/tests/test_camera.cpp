#include <gtest/gtest.h>

#include <Eigen/Geometry>
#include <numbers>

#include "distraxion/camera.hpp"

using namespace distraxion;
constexpr double kPi = std::numbers::pi;

namespace {

void expect_proper_rotation(const Eigen::Matrix3d& r) {
  EXPECT_LT((r.transpose() * r - Eigen::Matrix3d::Identity()).norm(), 1e-9);
  EXPECT_NEAR(r.determinant(), 1.0, 1e-9);
}

}  // namespace

TEST(Spherical, PoleAndAxis) {
  const Eigen::Vector3d focus(1, 2, 3);
  CameraState pole;
  pole.r = 1.0;
  EXPECT_LT((camera_position(pole, focus, 2.0) - (focus + Eigen::Vector3d(0, 0, 2))).norm(), 1e-12);
  CameraState axis;
  axis.phi = kPi / 2;
  axis.theta = kPi / 2;
  axis.r = 1.0;
  EXPECT_LT((camera_position(axis, focus, 2.0) - (focus + Eigen::Vector3d(0, 2, 0))).norm(), 1e-12);
}

TEST(Spherical, RoundTrip) {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector3d p(uniform(rng, -3, 3), uniform(rng, -3, 3), uniform(rng, -3, 3));
    const SphericalCoords s = cartesian_to_spherical(p);
    EXPECT_LT((spherical_to_cartesian(s.phi, s.theta, s.r) - p).norm(), 1e-9);
  }
}

TEST(LookAt, OrthonormalAndForward) {
  Rng rng(2);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d focus(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, -1, 1));
    const Eigen::Vector3d pos = focus + spherical_to_cartesian(uniform(rng, -kPi, kPi), uniform(rng, 0, kPi),
                                                               uniform(rng, 0.5, 3));
    const CameraExtrinsics cam = look_at_with_roll(pos, focus, uniform(rng, -kPi / 2, kPi / 2));
    expect_proper_rotation(cam.orientation);
    EXPECT_LT((cam.forward() - (focus - pos).normalized()).norm(), 1e-9);
  }
}

TEST(LookAt, PolarFallbackUp) {
  const CameraExtrinsics cam = look_at_with_roll({0, 0, 2}, {0, 0, 0}, 0.0);
  expect_proper_rotation(cam.orientation);
  // Looking straight down, screen-up is +x.
  EXPECT_LT((-cam.down() - Eigen::Vector3d::UnitX()).norm(), 1e-9);
}

TEST(LookAt, UpIsSceneUp) {
  const CameraExtrinsics cam = look_at_with_roll({0, -4, 1}, {0, 0, 1}, 0.0);
  EXPECT_LT((-cam.down() - Eigen::Vector3d::UnitZ()).norm(), 1e-12);
  EXPECT_LT((cam.right() - Eigen::Vector3d::UnitX()).norm(), 1e-12);
}

TEST(LookAt, DegenerateThrows) {
  EXPECT_THROW(look_at_with_roll({1, 1, 1}, {1, 1, 1 + 1e-10}, 0.0), GeometryError);
}

TEST(Project, FocusAtCenterForAnyPose) {
  const Size size{100, 80};
  Rng rng(3);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d focus(uniform(rng, -1, 1), uniform(rng, -1, 1), uniform(rng, 0, 1));
    const Eigen::Vector3d pos = focus + spherical_to_cartesian(uniform(rng, -kPi, kPi), uniform(rng, 0.01, kPi),
                                                               uniform(rng, 0.5, 3));
    const auto px = project(look_at_with_roll(pos, focus, 0.0), focus, size);
    ASSERT_TRUE(px);
    EXPECT_NEAR(px->x(), 50.0, 0.5);
    EXPECT_NEAR(px->y(), 40.0, 0.5);
  }
}

TEST(Project, OpticalAxisAtAnyDepth) {
  const CameraExtrinsics cam = look_at_with_roll({1, -3, 2}, {0, 0, 1}, 0.4);
  for (double depth : {0.1, 1.0, 10.0, 1000.0}) {
    const auto px = project(cam, cam.position + depth * cam.forward(), {64, 64});
    ASSERT_TRUE(px);
    EXPECT_NEAR(px->x(), 32.0, 1e-9);
    EXPECT_NEAR(px->y(), 32.0, 1e-9);
  }
}

TEST(Project, BehindCameraIsCulled) {
  const CameraExtrinsics cam = look_at_with_roll({0, -3, 1}, {0, 0, 1}, 0.0);
  EXPECT_FALSE(project(cam, {0, -5, 1}, {64, 64}).has_value());
}

TEST(Project, DoublingDistanceHalvesSize) {
  const Size size{200, 200};
  const Eigen::Vector3d focus(0, 0, 0);
  const double half_width = 0.1;
  for (double r : {1.0, 2.0, 3.5}) {
    auto extent = [&](double dist) {
      CameraState pose;
      pose.phi = -kPi / 2;
      pose.theta = kPi / 2;
      pose.r = dist;
      const CameraExtrinsics cam = look_at_with_roll(camera_position(pose, focus, 1.0), focus, 0.0);
      const auto a = project(cam, focus - half_width * cam.right(), size);
      const auto b = project(cam, focus + half_width * cam.right(), size);
      return (*b - *a).norm();
    };
    EXPECT_NEAR(extent(2 * r) / extent(r), 0.5, 0.01);
  }
}

TEST(Project, FieldOfViewSetsFocalLength) {
  const CameraExtrinsics cam = look_at_with_roll({0, -1, 0}, {0, 0, 0}, 0.0);
  const double f = focal_length_pixels(cam, {100, 100});
  EXPECT_NEAR(f, 50.0 / std::tan(kDefaultFieldOfView / 2), 1e-9);
  // A point at the top edge of the vertical field of view lands on row 0.
  const Eigen::Vector3d top = cam.position + cam.forward() - std::tan(kDefaultFieldOfView / 2) * cam.down();
  EXPECT_NEAR(project(cam, top, {100, 100})->y(), 0.0, 1e-9);
}

TEST(Project, RollRotatesAboutCenter) {
  const Size size{101, 101};
  const Eigen::Vector3d pos(0, -3, 1), focus(0, 0, 1);
  const CameraExtrinsics cam0 = look_at_with_roll(pos, focus, 0.0);
  const CameraExtrinsics cam90 = look_at_with_roll(pos, focus, kPi / 2);
  const Eigen::Vector2d center(50.5, 50.5);
  Rng rng(4);
  for (int i = 0; i < 100; ++i) {
    const Eigen::Vector3d p = focus + Eigen::Vector3d(uniform(rng, -0.5, 0.5), uniform(rng, -0.5, 0.5),
                                                      uniform(rng, -0.5, 0.5));
    const Eigen::Vector2d a = *project(cam0, p, size) - center;
    const Eigen::Vector2d b = *project(cam90, p, size) - center;
    // A quarter turn of the camera turns the image a quarter turn the other way.
    EXPECT_NEAR(b.norm(), a.norm(), 1e-9);
    EXPECT_NEAR(std::abs(a.dot(b)), 0.0, 1e-9 * (1 + a.squaredNorm()));
  }
  // Direction: a point to the camera's right moves toward the image top or bottom consistently.
  const Eigen::Vector2d r0 = *project(cam0, focus + 0.3 * cam0.right(), size) - center;
  const Eigen::Vector2d r90 = *project(cam90, focus + 0.3 * cam0.right(), size) - center;
  EXPECT_GT(r0.x(), 0.0);
  EXPECT_NEAR(r90.x(), 0.0, 1e-9);
  EXPECT_NEAR(std::abs(r90.y()), r0.x(), 1e-9);
}

TEST(Project, PixelRayInvertsProjection) {
  const CameraExtrinsics cam = look_at_with_roll({0.5, -2, 1.5}, {0, 0, 1}, 0.3);
  const Size size{64, 48};
  for (double px : {0.5, 10.25, 40.0}) {
    for (double py : {0.5, 23.0, 47.5}) {
      const Eigen::Vector3d ray = pixel_ray(cam, px, py, size);
      EXPECT_NEAR(ray.norm(), 1.0, 1e-12);
      const auto back = project(cam, cam.position + 2.5 * ray, size);
      EXPECT_NEAR(back->x(), px, 1e-9);
      EXPECT_NEAR(back->y(), py, 1e-9);
    }
  }
}

TEST(Project, ContinuityUnderDynamicCamera) {
  // One step moves the camera by at most v_max (normalized) and rolls it by
  // at most v_roll_max, so a point near the focus moves by a bounded amount.
  const double beta = 0.5;
  const CameraRange range = camera_range_from_scale(beta);
  const CameraSpeed speed = camera_speed_params(beta);
  const CameraAnchor anchor{-kPi / 2, kPi / 2};
  const Size size{100, 100};
  const Eigen::Vector3d focus(0, 0, 1);
  const double r_orig = 4.0;
  Rng rng(5);
  CameraState s = sample_camera_start(range, speed, anchor, true, rng);
  const double f = 50.0 / std::tan(kDefaultFieldOfView / 2);
  const Eigen::Vector3d probe = focus + Eigen::Vector3d(0.2, 0.1, 0.2);
  const double probe_px = f * 0.3 / (range.r_min * r_orig - 0.3);
  // Direction change of the view ray to the probe plus roll sweep.
  const double dr_min = range.r_min * r_orig - 0.3;
  const double bound = f * (speed.v_max * r_orig / dr_min) * 1.5 + probe_px * speed.v_roll_max + 1.0;
  auto px = [&](const CameraState& c) {
    return *project(look_at_with_roll(camera_position(c, focus, r_orig), focus, c.roll), probe, size);
  };
  Eigen::Vector2d prev = px(s);
  for (int i = 0; i < 2000; ++i) {
    s = step_camera(s, range, speed, anchor, rng);
    const Eigen::Vector2d cur = px(s);
    ASSERT_LT((cur - prev).norm(), bound);
    prev = cur;
  }
}
