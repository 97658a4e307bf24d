#include "distraxion/physics.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include <Eigen/Dense>

namespace distraxion {

namespace {

constexpr double kPi = std::numbers::pi;

}  // namespace

std::string to_string(TaskName name) {
  switch (name) {
    case TaskName::cartpole_swingup:
      return "cartpole_swingup";
    case TaskName::reacher_easy:
      return "reacher_easy";
    case TaskName::ball_in_cup_catch:
      return "ball_in_cup_catch";
  }
  return "unknown";
}

TaskName parse_task(const std::string& name) {
  for (TaskName t : all_tasks()) {
    if (to_string(t) == name) return t;
  }
  throw ConfigError("unknown task '" + name + "'");
}

std::vector<TaskName> all_tasks() {
  return {TaskName::cartpole_swingup, TaskName::reacher_easy, TaskName::ball_in_cup_catch};
}

TaskSpec task_spec(TaskName name) {
  switch (name) {
    case TaskName::cartpole_swingup:
      return {name, 1, 8, 0.3};
    case TaskName::reacher_easy:
      return {name, 2, 4, 0.0};
    case TaskName::ball_in_cup_catch:
      return {name, 2, 4, 0.3};
  }
  throw ConfigError("unknown task");
}

std::unique_ptr<Task> make_task(TaskName name) {
  switch (name) {
    case TaskName::cartpole_swingup:
      return std::make_unique<CartpoleSwingup>();
    case TaskName::reacher_easy:
      return std::make_unique<ReacherEasy>();
    case TaskName::ball_in_cup_catch:
      return std::make_unique<BallInCupCatch>();
  }
  throw ConfigError("unknown task");
}

double tolerance_gaussian(double x, double lower, double upper, double margin, double value_at_margin) {
  if (x >= lower && x <= upper) return 1.0;
  if (margin <= 0.0) return 0.0;
  const double d = (x < lower ? lower - x : x - upper) / margin;
  // value_at_margin ^ (d^2)
  return std::exp(d * d * std::log(value_at_margin));
}

double tolerance_quadratic(double x, double lower, double upper, double margin) {
  if (x >= lower && x <= upper) return 1.0;
  if (margin <= 0.0) return 0.0;
  const double d = (x < lower ? lower - x : x - upper) / margin;
  return d < 1.0 ? 1.0 - d * d : 0.0;
}

double Task::control_step(PhysicsState& state, const Eigen::VectorXd& action) const {
  if (action.size() != spec_.action_dim) {
    throw std::invalid_argument("action has " + std::to_string(action.size()) + " components, task expects " +
                                std::to_string(spec_.action_dim));
  }
  if (!action.allFinite()) throw std::invalid_argument("action contains non-finite values");
  const Eigen::VectorXd clipped = action.cwiseMax(-1.0).cwiseMin(1.0);
  const double dt = kControlTimestep / kMicroStepsPerControlStep;
  for (int i = 0; i < kMicroStepsPerControlStep; ++i) integrate(state, clipped, dt);
  ++state.step;
  return std::clamp(reward(state, clipped), 0.0, 1.0);
}

PhysicsStep Task::step(const PhysicsState& state, const Eigen::VectorXd& action) const {
  PhysicsStep out{state, 0.0};
  for (int i = 0; i < spec_.action_repeat; ++i) out.reward += control_step(out.state, action);
  return out;
}

// ---------------------------------------------------------------------------
// Cartpole: q = (cart x, pole angle from upright), the pole a uniform rod.

CartpoleSwingup::CartpoleSwingup(CartpoleParams params)
    : Task(task_spec(TaskName::cartpole_swingup)), params_(params) {}

PhysicsState CartpoleSwingup::make_state(double x, double angle, double x_dot, double angle_dot) const {
  PhysicsState s;
  s.q = Eigen::Vector2d(x, angle);
  s.qd = Eigen::Vector2d(x_dot, angle_dot);
  return s;
}

double CartpoleSwingup::energy(const PhysicsState& s) const {
  const auto& p = params_;
  const double total = p.cart_mass + p.pole_mass;
  const double xd = s.qd[0], td = s.qd[1], th = s.q[1];
  const double kinetic = 0.5 * total * xd * xd + p.pole_mass * p.half_length * xd * td * std::cos(th) +
                         0.5 * (4.0 / 3.0) * p.pole_mass * p.half_length * p.half_length * td * td;
  const double potential = p.pole_mass * p.gravity * p.half_length * (1.0 + std::cos(th));
  return kinetic + potential;
}

PhysicsState CartpoleSwingup::reset(Rng& rng) const {
  return make_state(uniform(rng, -0.05, 0.05), kPi + uniform(rng, -0.05, 0.05), uniform(rng, -0.01, 0.01),
                    uniform(rng, -0.01, 0.01));
}

void CartpoleSwingup::integrate(PhysicsState& s, const Eigen::VectorXd& action, double dt) const {
  const auto& p = params_;
  const double total = p.cart_mass + p.pole_mass;
  const double th = s.q[1], xd = s.qd[0], td = s.qd[1];
  const double sn = std::sin(th), cs = std::cos(th);
  const double force = p.force_gain * action[0] - p.cart_damping * xd;
  const double temp = (force + p.pole_mass * p.half_length * td * td * sn) / total;
  const double th_acc = (p.gravity * sn - cs * temp - p.pole_damping * td / (p.pole_mass * p.half_length)) /
                        (p.half_length * (4.0 / 3.0 - p.pole_mass * cs * cs / total));
  const double x_acc = temp - p.pole_mass * p.half_length * th_acc * cs / total;
  s.qd[0] += dt * x_acc;
  s.qd[1] += dt * th_acc;
  s.q[0] += dt * s.qd[0];
  s.q[1] += dt * s.qd[1];
  if (std::abs(s.q[0]) > p.rail_limit) {
    s.q[0] = std::copysign(p.rail_limit, s.q[0]);
    s.qd[0] = 0.0;
  }
}

double CartpoleSwingup::reward(const PhysicsState& s, const Eigen::VectorXd& action) const {
  const double upright = (std::cos(s.q[1]) + 1.0) / 2.0;
  const double centered = (1.0 + tolerance_gaussian(s.q[0], 0.0, 0.0, 2.0)) / 2.0;
  const double small_control = (4.0 + tolerance_quadratic(action[0], 0.0, 0.0, 1.0)) / 5.0;
  const double small_velocity = (1.0 + tolerance_gaussian(s.qd[1], 0.0, 0.0, 5.0)) / 2.0;
  return upright * centered * small_control * small_velocity;
}

SceneDescription CartpoleSwingup::scene(const PhysicsState& s) const {
  const double pivot_z = 1.0;
  const double x = s.q[0], th = s.q[1];
  const double length = 2.0 * params_.half_length;
  SceneDescription sc;
  sc.ground = GroundPlane{};
  sc.ground->opacity = spec().ground_opacity;
  sc.primitives.push_back(Primitive::box(0, {0, 0.12, pivot_z}, {params_.rail_limit + 0.3, 0.02, 0.02}));
  sc.primitives.push_back(Primitive::box(1, {x, 0, pivot_z}, {0.1, 0.075, 0.05}));
  const Eigen::Vector3d pivot(x, -0.08, pivot_z);
  const Eigen::Vector3d tip = pivot + length * Eigen::Vector3d(std::sin(th), 0, std::cos(th));
  sc.primitives.push_back(Primitive::capsule(2, pivot, tip, 0.045));
  return sc;
}

std::vector<Eigen::Vector3d> CartpoleSwingup::body_colors() const {
  return {{0.45, 0.45, 0.50}, {0.70, 0.50, 0.30}, {0.80, 0.60, 0.35}};
}

CameraRig CartpoleSwingup::camera_rig() const { return {{-kPi / 2, kPi / 2}, 4.0}; }

Eigen::Vector3d CartpoleSwingup::focus_point(const PhysicsState& s) const { return {s.q[0], 0.0, 1.0}; }

Eigen::VectorXd CartpoleSwingup::observation(const PhysicsState& s) const {
  Eigen::VectorXd o(5);
  o << s.q[0], std::cos(s.q[1]), std::sin(s.q[1]), s.qd[0], s.qd[1];
  return o;
}

// ---------------------------------------------------------------------------
// Reacher: two-link planar arm in the horizontal plane, uniform rod links.

ReacherEasy::ReacherEasy(ReacherParams params) : Task(task_spec(TaskName::reacher_easy)), params_(params) {}

PhysicsState ReacherEasy::make_state(double shoulder, double elbow, const Eigen::Vector2d& target) const {
  PhysicsState s;
  s.q = Eigen::Vector2d(shoulder, elbow);
  s.qd = Eigen::Vector2d::Zero();
  s.aux = target;
  return s;
}

Eigen::Vector2d ReacherEasy::fingertip(const PhysicsState& s) const {
  const double l = params_.link_length;
  return {l * std::cos(s.q[0]) + l * std::cos(s.q[0] + s.q[1]), l * std::sin(s.q[0]) + l * std::sin(s.q[0] + s.q[1])};
}

Eigen::Vector2d ReacherEasy::target(const PhysicsState& s) const { return s.aux.head<2>(); }

PhysicsState ReacherEasy::reset(Rng& rng) const {
  const double shoulder = uniform(rng, -kPi, kPi);
  const double elbow = uniform(rng, -kPi, kPi);
  const double angle = uniform(rng, -kPi, kPi);
  const double radius = uniform(rng, params_.target_min_distance, params_.target_max_distance);
  return make_state(shoulder, elbow, {radius * std::cos(angle), radius * std::sin(angle)});
}

void ReacherEasy::integrate(PhysicsState& s, const Eigen::VectorXd& action, double dt) const {
  const double l = params_.link_length, m = params_.link_mass;
  const double lc = 0.5 * l, inertia = m * l * l / 12.0;
  const double a = 2.0 * inertia + m * lc * lc + m * (l * l + lc * lc);
  const double b = m * l * lc;
  const double d = inertia + m * lc * lc;
  const double c2 = std::cos(s.q[1]), s2 = std::sin(s.q[1]);
  Eigen::Matrix2d mass;
  mass << a + 2.0 * b * c2, d + b * c2, d + b * c2, d;
  const Eigen::Vector2d coriolis(-b * s2 * (2.0 * s.qd[0] * s.qd[1] + s.qd[1] * s.qd[1]), b * s2 * s.qd[0] * s.qd[0]);
  const Eigen::Vector2d torque = params_.torque_gain * action.head<2>() - params_.damping * s.qd.head<2>();
  const Eigen::Vector2d acc = mass.ldlt().solve(torque - coriolis);
  s.qd += dt * acc;
  s.q += dt * s.qd;
}

double ReacherEasy::reward(const PhysicsState& s, const Eigen::VectorXd&) const {
  const double r = params_.target_radius;
  const double dist = (fingertip(s) - target(s)).norm();
  if (dist <= r) return 1.0;
  if (dist >= 2.0 * r) return 0.0;
  return 0.5 * (1.0 + std::cos(kPi * (dist - r) / r));
}

SceneDescription ReacherEasy::scene(const PhysicsState& s) const {
  const double z = 0.02, l = params_.link_length;
  const Eigen::Vector3d base(0, 0, z);
  const Eigen::Vector3d elbow(l * std::cos(s.q[0]), l * std::sin(s.q[0]), z);
  const Eigen::Vector2d tip2 = fingertip(s);
  const Eigen::Vector3d tip(tip2.x(), tip2.y(), z);
  const Eigen::Vector2d tgt = target(s);
  SceneDescription sc;
  sc.ground = GroundPlane{};
  sc.ground->opacity = spec().ground_opacity;
  sc.primitives.push_back(Primitive::sphere(0, base, 0.025));
  sc.primitives.push_back(Primitive::capsule(1, base, elbow, 0.012));
  sc.primitives.push_back(Primitive::capsule(2, elbow, tip, 0.012));
  sc.primitives.push_back(Primitive::sphere(3, tip, 0.018));
  sc.primitives.push_back(Primitive::sphere(4, {tgt.x(), tgt.y(), z}, params_.target_radius));
  return sc;
}

std::vector<Eigen::Vector3d> ReacherEasy::body_colors() const {
  return {{0.45, 0.45, 0.50}, {0.70, 0.50, 0.30}, {0.70, 0.50, 0.30}, {0.85, 0.35, 0.30}, {0.90, 0.20, 0.20}};
}

CameraRig ReacherEasy::camera_rig() const { return {{-kPi / 2, kPi / 6}, 0.75}; }

Eigen::Vector3d ReacherEasy::focus_point(const PhysicsState&) const { return Eigen::Vector3d::Zero(); }

Eigen::VectorXd ReacherEasy::observation(const PhysicsState& s) const {
  const Eigen::Vector2d to_target = target(s) - fingertip(s);
  Eigen::VectorXd o(8);
  o << std::cos(s.q[0]), std::sin(s.q[0]), std::cos(s.q[1]), std::sin(s.q[1]), to_target, s.qd[0], s.qd[1];
  return o;
}

// ---------------------------------------------------------------------------
// Ball in cup: an actuated hovering cup and a ball on an inextensible string.

BallInCupCatch::BallInCupCatch(BallInCupParams params)
    : Task(task_spec(TaskName::ball_in_cup_catch)), params_(params) {}

PhysicsState BallInCupCatch::make_state(const Eigen::Vector2d& cup, const Eigen::Vector2d& ball) const {
  PhysicsState s;
  s.q = Eigen::Vector4d(cup.x(), cup.y(), ball.x(), ball.y());
  s.qd = Eigen::Vector4d::Zero();
  return s;
}

bool BallInCupCatch::ball_in_cup(const PhysicsState& s) const {
  const Eigen::Vector2d rel = s.q.segment<2>(2) - s.q.segment<2>(0);
  return std::abs(rel.x()) <= params_.cup_half_width - params_.ball_radius + 1e-9 && rel.y() >= 0.0 &&
         rel.y() <= params_.cup_height;
}

PhysicsState BallInCupCatch::reset(Rng& rng) const {
  const Eigen::Vector2d cup(uniform(rng, -0.1, 0.1), params_.cup_rest_height);
  PhysicsState s = make_state(cup, cup - Eigen::Vector2d(0.0, params_.string_length));
  s.qd[2] = uniform(rng, -0.3, 0.3);
  return s;
}

void BallInCupCatch::integrate(PhysicsState& s, const Eigen::VectorXd& action, double dt) const {
  const auto& p = params_;
  const Eigen::Vector2d cup_prev = s.q.segment<2>(0);
  const Eigen::Vector2d ball_prev = s.q.segment<2>(2);

  Eigen::Vector2d cup_vel = s.qd.segment<2>(0);
  cup_vel += dt * (p.cup_gain * action.head<2>() - p.cup_damping * cup_vel);
  Eigen::Vector2d cup = cup_prev + dt * cup_vel;
  if (std::abs(cup.x()) > p.cup_x_limit) {
    cup.x() = std::copysign(p.cup_x_limit, cup.x());
    cup_vel.x() = 0.0;
  }
  if (cup.y() < p.cup_z_min || cup.y() > p.cup_z_max) {
    cup.y() = std::clamp(cup.y(), p.cup_z_min, p.cup_z_max);
    cup_vel.y() = 0.0;
  }

  Eigen::Vector2d ball_vel = s.qd.segment<2>(2);
  ball_vel.y() -= dt * p.gravity;
  Eigen::Vector2d ball = ball_prev + dt * ball_vel;

  // Cup contacts, in the cup frame: a bottom plate at z = 0 and two walls at
  // x = +-half_width rising to cup_height. Contacts are inelastic.
  const double w = p.cup_half_width, h = p.cup_height, r = p.ball_radius;
  const Eigen::Vector2d rel_prev = ball_prev - cup_prev;
  Eigen::Vector2d rel = ball - cup;
  if (std::abs(rel.x()) <= w) {
    if (rel_prev.y() >= r - 1e-12 && rel.y() < r) {
      rel.y() = r;
      ball_vel.y() = std::max(ball_vel.y(), cup_vel.y());
    } else if (rel_prev.y() <= -r + 1e-12 && rel.y() > -r) {
      rel.y() = -r;
      ball_vel.y() = std::min(ball_vel.y(), cup_vel.y());
    }
  }
  if (rel.y() > -r && rel.y() < h) {
    const double inner = w - r, outer = w + r;
    if (std::abs(rel_prev.x()) <= inner + 1e-12 && std::abs(rel.x()) > inner) {
      const double side = rel.x() > 0 ? 1.0 : -1.0;
      rel.x() = side * inner;
      if (side * (ball_vel.x() - cup_vel.x()) > 0) ball_vel.x() = cup_vel.x();
    } else if (std::abs(rel_prev.x()) >= outer - 1e-12 && std::abs(rel.x()) < outer) {
      const double side = rel_prev.x() > 0 ? 1.0 : -1.0;
      rel.x() = side * outer;
      if (side * (ball_vel.x() - cup_vel.x()) < 0) ball_vel.x() = cup_vel.x();
    }
  }
  ball = cup + rel;

  if (ball.y() < r) {
    ball.y() = r;
    ball_vel.y() = std::max(ball_vel.y(), 0.0);
  }

  const Eigen::Vector2d span = ball - cup;
  const double len = span.norm();
  if (len > p.string_length) {
    const Eigen::Vector2d dir = span / len;
    ball = cup + dir * p.string_length;
    const double radial = (ball_vel - cup_vel).dot(dir);
    if (radial > 0) ball_vel -= radial * dir;
  }

  s.q << cup, ball;
  s.qd << cup_vel, ball_vel;
}

double BallInCupCatch::reward(const PhysicsState& s, const Eigen::VectorXd&) const {
  return ball_in_cup(s) ? 1.0 : 0.0;
}

SceneDescription BallInCupCatch::scene(const PhysicsState& s) const {
  const auto& p = params_;
  const Eigen::Vector3d cup(s.q[0], 0.0, s.q[1]);
  const Eigen::Vector3d ball(s.q[2], 0.0, s.q[3]);
  const double t = p.cup_wall;
  SceneDescription sc;
  sc.ground = GroundPlane{};
  sc.ground->opacity = spec().ground_opacity;
  sc.primitives.push_back(Primitive::box(0, cup + Eigen::Vector3d(0, 0, -t), {p.cup_half_width + t, 0.05, t}));
  for (double side : {-1.0, 1.0}) {
    sc.primitives.push_back(Primitive::box(
        0, cup + Eigen::Vector3d(side * (p.cup_half_width + t), 0, 0.5 * p.cup_height), {t, 0.05, 0.5 * p.cup_height}));
  }
  sc.primitives.push_back(Primitive::sphere(1, ball, p.ball_radius));
  if ((ball - cup).norm() > 1e-6) sc.primitives.push_back(Primitive::capsule(2, cup, ball, 0.003));
  return sc;
}

std::vector<Eigen::Vector3d> BallInCupCatch::body_colors() const {
  return {{0.70, 0.50, 0.30}, {0.30, 0.50, 0.80}, {0.30, 0.30, 0.30}};
}

CameraRig BallInCupCatch::camera_rig() const { return {{-kPi / 2, kPi / 2}, 1.6}; }

Eigen::Vector3d BallInCupCatch::focus_point(const PhysicsState&) const { return {0.0, 0.0, 0.5}; }

Eigen::VectorXd BallInCupCatch::observation(const PhysicsState& s) const {
  Eigen::VectorXd o(8);
  o << s.q[0], s.q[1], s.q[2] - s.q[0], s.q[3] - s.q[1], s.qd;
  return o;
}

}  // namespace distraxion
