#pragma once

#include <Eigen/Core>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

#include "distraxion/distraction.hpp"
#include "distraxion/rng.hpp"
#include "distraxion/scene.hpp"

namespace distraxion {

enum class TaskName { cartpole_swingup, reacher_easy, ball_in_cup_catch };

std::string to_string(TaskName name);
TaskName parse_task(const std::string& name);
std::vector<TaskName> all_tasks();

inline constexpr int kControlStepsPerEpisode = 1000;
inline constexpr double kControlTimestep = 0.01;
inline constexpr int kMicroStepsPerControlStep = 10;

struct TaskSpec {
  TaskName name = TaskName::cartpole_swingup;
  int action_dim = 1;
  int action_repeat = 1;
  double ground_opacity = 0.3;
  int control_steps = kControlStepsPerEpisode;

  int agent_steps() const { return control_steps / action_repeat; }
};

TaskSpec task_spec(TaskName name);

struct PhysicsState {
  Eigen::VectorXd q;
  Eigen::VectorXd qd;
  // Task data that is not integrated (e.g. the reacher target).
  Eigen::VectorXd aux;
  // Control steps taken this episode.
  int step = 0;

  friend bool operator==(const PhysicsState& a, const PhysicsState& b) {
    auto same = [](const Eigen::VectorXd& x, const Eigen::VectorXd& y) { return x.size() == y.size() && x == y; };
    return a.step == b.step && same(a.q, b.q) && same(a.qd, b.qd) && same(a.aux, b.aux);
  }
};

struct PhysicsStep {
  PhysicsState state;
  // Sum of per-control-step rewards over the action repeat.
  double reward = 0.0;
};

// The static view of a task: a camera anchor plus a focus point.
struct CameraRig {
  CameraAnchor anchor;
  double r_original = 1.0;
};

class Task {
 public:
  explicit Task(TaskSpec spec) : spec_(spec) {}
  virtual ~Task() = default;

  const TaskSpec& spec() const { return spec_; }

  virtual PhysicsState reset(Rng& rng) const = 0;

  // One 10 ms control step with a clipped action. Returns the reward in [0, 1]
  // evaluated on the resulting state. Throws std::invalid_argument on
  // non-finite actions or a wrong action size.
  double control_step(PhysicsState& state, const Eigen::VectorXd& action) const;

  // action_repeat control steps; reward is summed.
  PhysicsStep step(const PhysicsState& state, const Eigen::VectorXd& action) const;

  virtual double reward(const PhysicsState& state, const Eigen::VectorXd& action) const = 0;
  virtual SceneDescription scene(const PhysicsState& state) const = 0;
  virtual std::vector<Eigen::Vector3d> body_colors() const = 0;
  virtual CameraRig camera_rig() const = 0;
  // Point the camera aims at; fixed-camera tasks evaluate this at episode start.
  virtual Eigen::Vector3d focus_point(const PhysicsState& state) const = 0;
  virtual bool tracking_camera() const { return false; }
  // Low-dimensional observation for learners that bypass vision.
  virtual Eigen::VectorXd observation(const PhysicsState& state) const = 0;

 protected:
  // Advances one integrator micro-step of length dt with an already clipped action.
  virtual void integrate(PhysicsState& state, const Eigen::VectorXd& action, double dt) const = 0;

 private:
  TaskSpec spec_;
};

std::unique_ptr<Task> make_task(TaskName name);

// Smooth tolerance kernels: 1 inside [lower, upper], decaying with distance
// outside so that the value at `margin` equals `value_at_margin`.
double tolerance_gaussian(double x, double lower, double upper, double margin, double value_at_margin = 0.1);
double tolerance_quadratic(double x, double lower, double upper, double margin);

struct CartpoleParams {
  double cart_mass = 1.0;
  double pole_mass = 0.1;
  double half_length = 0.5;
  double gravity = 9.81;
  double force_gain = 10.0;
  double cart_damping = 5e-4;
  double pole_damping = 2e-6;
  double rail_limit = 3.8;
};

class CartpoleSwingup final : public Task {
 public:
  explicit CartpoleSwingup(CartpoleParams params = {});

  const CartpoleParams& params() const { return params_; }
  // Mechanical energy with the potential measured from the hanging rest pose.
  double energy(const PhysicsState& state) const;
  PhysicsState make_state(double x, double angle, double x_dot, double angle_dot) const;

  PhysicsState reset(Rng& rng) const override;
  double reward(const PhysicsState& state, const Eigen::VectorXd& action) const override;
  SceneDescription scene(const PhysicsState& state) const override;
  std::vector<Eigen::Vector3d> body_colors() const override;
  CameraRig camera_rig() const override;
  Eigen::Vector3d focus_point(const PhysicsState& state) const override;
  Eigen::VectorXd observation(const PhysicsState& state) const override;

 protected:
  void integrate(PhysicsState& state, const Eigen::VectorXd& action, double dt) const override;

 private:
  CartpoleParams params_;
};

struct ReacherParams {
  double link_length = 0.12;
  double link_mass = 0.1;
  double torque_gain = 0.05;
  double damping = 0.005;
  double target_radius = 0.05;
  double target_min_distance = 0.05;
  double target_max_distance = 0.20;
};

class ReacherEasy final : public Task {
 public:
  explicit ReacherEasy(ReacherParams params = {});

  const ReacherParams& params() const { return params_; }
  Eigen::Vector2d fingertip(const PhysicsState& state) const;
  Eigen::Vector2d target(const PhysicsState& state) const;
  PhysicsState make_state(double shoulder, double elbow, const Eigen::Vector2d& target) const;

  PhysicsState reset(Rng& rng) const override;
  double reward(const PhysicsState& state, const Eigen::VectorXd& action) const override;
  SceneDescription scene(const PhysicsState& state) const override;
  std::vector<Eigen::Vector3d> body_colors() const override;
  CameraRig camera_rig() const override;
  Eigen::Vector3d focus_point(const PhysicsState& state) const override;
  Eigen::VectorXd observation(const PhysicsState& state) const override;

 protected:
  void integrate(PhysicsState& state, const Eigen::VectorXd& action, double dt) const override;

 private:
  ReacherParams params_;
};

struct BallInCupParams {
  double string_length = 0.3;
  double ball_radius = 0.025;
  double cup_half_width = 0.07;
  double cup_height = 0.12;
  double cup_wall = 0.008;
  double cup_gain = 20.0;
  double cup_damping = 4.0;
  double gravity = 9.81;
  double cup_rest_height = 0.6;
  double cup_x_limit = 0.4;
  double cup_z_min = 0.3;
  double cup_z_max = 0.95;
};

// q = (cup_x, cup_z, ball_x, ball_z); the string hangs from the cup bottom center.
class BallInCupCatch final : public Task {
 public:
  explicit BallInCupCatch(BallInCupParams params = {});

  const BallInCupParams& params() const { return params_; }
  bool ball_in_cup(const PhysicsState& state) const;
  PhysicsState make_state(const Eigen::Vector2d& cup, const Eigen::Vector2d& ball) const;

  PhysicsState reset(Rng& rng) const override;
  double reward(const PhysicsState& state, const Eigen::VectorXd& action) const override;
  SceneDescription scene(const PhysicsState& state) const override;
  std::vector<Eigen::Vector3d> body_colors() const override;
  CameraRig camera_rig() const override;
  Eigen::Vector3d focus_point(const PhysicsState& state) const override;
  Eigen::VectorXd observation(const PhysicsState& state) const override;

 protected:
  void integrate(PhysicsState& state, const Eigen::VectorXd& action, double dt) const override;

 private:
  BallInCupParams params_;
};

}  // namespace distraxion
