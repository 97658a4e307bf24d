#include "distraxion/render.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <Eigen/Geometry>

namespace distraxion {

Primitive Primitive::sphere(int body, const Eigen::Vector3d& center, double radius) {
  Primitive p;
  p.kind = PrimitiveKind::sphere;
  p.body = body;
  p.a = center;
  p.radius = radius;
  return p;
}

Primitive Primitive::capsule(int body, const Eigen::Vector3d& from, const Eigen::Vector3d& to, double radius) {
  Primitive p;
  p.kind = PrimitiveKind::capsule;
  p.body = body;
  p.a = from;
  p.b = to;
  p.radius = radius;
  return p;
}

Primitive Primitive::box(int body, const Eigen::Vector3d& center, const Eigen::Vector3d& half_extents,
                         const Eigen::Matrix3d& rotation) {
  Primitive p;
  p.kind = PrimitiveKind::box;
  p.body = body;
  p.a = center;
  p.half_extents = half_extents;
  p.rotation = rotation;
  return p;
}

namespace {

constexpr double kEps = 1e-9;

std::optional<RayHit> hit_sphere(const Eigen::Vector3d& center, double radius, const Eigen::Vector3d& o,
                                 const Eigen::Vector3d& d) {
  const Eigen::Vector3d oc = o - center;
  const double b = oc.dot(d);
  const double c = oc.squaredNorm() - radius * radius;
  const double disc = b * b - c;
  if (disc < 0) return std::nullopt;
  const double t = -b - std::sqrt(disc);
  if (t <= kEps) return std::nullopt;
  return RayHit{t, (o + t * d - center) / radius};
}

std::optional<RayHit> hit_capsule(const Primitive& p, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  const Eigen::Vector3d ba = p.b - p.a;
  const Eigen::Vector3d oa = o - p.a;
  const double baba = ba.dot(ba);
  if (baba < kEps * kEps) return hit_sphere(p.a, p.radius, o, d);
  const double bard = ba.dot(d), baoa = ba.dot(oa), rdoa = d.dot(oa), oaoa = oa.dot(oa);
  const double r2 = p.radius * p.radius;

  double best = std::numeric_limits<double>::infinity();
  const double qa = baba - bard * bard;
  if (qa > kEps) {
    const double qb = baba * rdoa - baoa * bard;
    const double qc = baba * oaoa - baoa * baoa - r2 * baba;
    const double disc = qb * qb - qa * qc;
    if (disc >= 0) {
      const double t = (-qb - std::sqrt(disc)) / qa;
      const double y = baoa + t * bard;
      if (y > 0 && y < baba && t > kEps) best = t;
    }
  }
  for (const Eigen::Vector3d* end : {&p.a, &p.b}) {
    if (auto h = hit_sphere(*end, p.radius, o, d); h && h->t < best) best = h->t;
  }
  if (!std::isfinite(best)) return std::nullopt;
  const Eigen::Vector3d pa = o + best * d - p.a;
  const double s = std::clamp(pa.dot(ba) / baba, 0.0, 1.0);
  return RayHit{best, (pa - s * ba).normalized()};
}

std::optional<RayHit> hit_box(const Primitive& p, const Eigen::Vector3d& o, const Eigen::Vector3d& d) {
  const Eigen::Vector3d lo = p.rotation.transpose() * (o - p.a);
  const Eigen::Vector3d ld = p.rotation.transpose() * d;
  double t_near = -std::numeric_limits<double>::infinity();
  double t_far = std::numeric_limits<double>::infinity();
  int axis = -1;
  double sign = 1.0;
  for (int i = 0; i < 3; ++i) {
    const double e = p.half_extents[i];
    if (std::abs(ld[i]) < 1e-15) {
      if (lo[i] < -e || lo[i] > e) return std::nullopt;
      continue;
    }
    double t1 = (-e - lo[i]) / ld[i];
    double t2 = (e - lo[i]) / ld[i];
    double face = -1.0;
    if (t1 > t2) {
      std::swap(t1, t2);
      face = 1.0;
    }
    if (t1 > t_near) {
      t_near = t1;
      axis = i;
      sign = face;
    }
    t_far = std::min(t_far, t2);
    if (t_near > t_far) return std::nullopt;
  }
  if (axis < 0 || t_near <= kEps) return std::nullopt;
  Eigen::Vector3d n = Eigen::Vector3d::Zero();
  n[axis] = sign;
  return RayHit{t_near, p.rotation * n};
}

}  // namespace

std::optional<RayHit> intersect(const Primitive& primitive, const Eigen::Vector3d& origin,
                                const Eigen::Vector3d& direction) {
  switch (primitive.kind) {
    case PrimitiveKind::sphere:
      return hit_sphere(primitive.a, primitive.radius, origin, direction);
    case PrimitiveKind::capsule:
      return hit_capsule(primitive, origin, direction);
    case PrimitiveKind::box:
      return hit_box(primitive, origin, direction);
  }
  return std::nullopt;
}

Frame render(const SceneDescription& scene, const CameraExtrinsics& camera, const ColorState& colors,
             const Frame* background, double beta_bg, Size size) {
  if (size.width <= 0 || size.height <= 0) throw ImageError("render size must be positive");
  if (!(beta_bg >= 0.0 && beta_bg <= 1.0)) throw std::invalid_argument("beta_bg must lie in [0, 1]");
  for (const Primitive& p : scene.primitives) {
    if (p.body < 0 || static_cast<std::size_t>(p.body) >= colors.bodies.size()) {
      throw std::invalid_argument("primitive references body " + std::to_string(p.body) +
                                  " without a color entry");
    }
  }
  const Eigen::Vector3d to_light = -scene.light_direction.normalized();
  auto shade = [&](const Eigen::Vector3d& color, const Eigen::Vector3d& normal) -> Eigen::Vector3d {
    return color * (0.4 + 0.6 * std::max(0.0, normal.dot(to_light)));
  };
  const Eigen::Vector3d sky = scene.skybox * 255.0;

  Frame out(size.width, size.height);
  for (int y = 0; y < size.height; ++y) {
    for (int x = 0; x < size.width; ++x) {
      const Eigen::Vector3d dir = pixel_ray(camera, x + 0.5, y + 0.5, size);

      Eigen::Vector3d bg = sky;
      if (background != nullptr && beta_bg > 0.0) {
        const int bx = std::min(background->width() - 1, x * background->width() / size.width);
        const int by = std::min(background->height() - 1, y * background->height() / size.height);
        const Rgb8 v = background->at(bx, by);
        bg = (1.0 - beta_bg) * sky + beta_bg * Eigen::Vector3d(v.r, v.g, v.b);
      }

      double nearest = std::numeric_limits<double>::infinity();
      Eigen::Vector3d color = bg;
      for (const Primitive& p : scene.primitives) {
        if (auto h = intersect(p, camera.position, dir); h && h->t < nearest) {
          nearest = h->t;
          color = 255.0 * shade(colors.bodies[p.body].current, h->normal);
        }
      }
      if (scene.ground && std::abs(dir.z()) > 1e-12) {
        const GroundPlane& g = *scene.ground;
        const double t = (g.height - camera.position.z()) / dir.z();
        if (t > kEps && t < nearest && g.opacity > 0.0) {
          const Eigen::Vector3d p = camera.position + t * dir;
          const long cx = static_cast<long>(std::floor(p.x() / g.checker_size));
          const long cy = static_cast<long>(std::floor(p.y() / g.checker_size));
          const Eigen::Vector3d tile = ((cx + cy) % 2 == 0) ? g.color_a : g.color_b;
          color = g.opacity * 255.0 * tile + (1.0 - g.opacity) * bg;
        }
      }
      auto q = [](double v) { return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0))); };
      out.set(x, y, {q(color[0]), q(color[1]), q(color[2])});
    }
  }
  return out;
}

}  // namespace distraxion
