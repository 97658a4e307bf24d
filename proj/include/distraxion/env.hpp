#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

#include "distraxion/background.hpp"
#include "distraxion/camera.hpp"
#include "distraxion/distraction.hpp"
#include "distraxion/image.hpp"
#include "distraxion/physics.hpp"
#include "distraxion/render.hpp"

namespace distraxion {

class EnvError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

enum class PresetName { none, easy, medium, blind };

std::string to_string(PresetName name);
PresetName parse_preset(const std::string& name);

struct BenchmarkPreset {
  PresetName name = PresetName::none;
  DifficultyConfig config;
  // The camera looks directly away from its focus point.
  bool camera_backwards = false;
};

// none: all zero; easy: beta_cam = beta_rgb = 0.1, b = 4; medium: 0.2, b = 8;
// blind: medium with the camera turned backwards. beta_bg = 1 throughout.
BenchmarkPreset make_preset(PresetName name, bool dynamic, std::uint64_t seed);

struct TimeStep {
  Frame observation;
  double reward = 0.0;
  double discount = 1.0;
  bool first = false;
  bool last = false;
};

struct EnvOptions {
  Size render_size = kDefaultRenderSize;
  // Videos to draw backgrounds from. When null and a background is requested,
  // a procedural set is generated (and cached per process).
  std::shared_ptr<const BackgroundSet> backgrounds;
};

// Length of each procedurally generated fallback video.
inline constexpr int kProceduralVideoLength = 50;

std::shared_ptr<const BackgroundSet> procedural_fallback(int count, Size size);

// Composition of physics, distraction processes and rendering for one task.
// Physics and distraction RNGs are seeded from config.seed via derive_seed.
class Environment {
 public:
  Environment(TaskName task, DifficultyConfig config, bool camera_backwards = false, EnvOptions options = {});
  Environment(TaskName task, const BenchmarkPreset& preset, EnvOptions options = {});

  TimeStep reset();
  // Applies the action for action_repeat control steps and sums the rewards.
  // Throws EnvError before reset or after the final step, std::invalid_argument
  // on a wrong action size.
  TimeStep step(const Eigen::VectorXd& action);

  const Task& task() const { return *task_; }
  const TaskSpec& spec() const { return task_->spec(); }
  const DifficultyConfig& config() const { return config_; }
  bool camera_backwards() const { return camera_backwards_; }
  Size render_size() const { return options_.render_size; }
  const PhysicsState& physics_state() const { return physics_; }
  const DistractionProcess& distractions() const { return *distractions_; }
  int agent_step() const { return agent_step_; }
  bool episode_over() const { return started_ && agent_step_ >= spec().agent_steps(); }

  // Low-dimensional state observation of the current physics state.
  Eigen::VectorXd state_observation() const { return task_->observation(physics_); }

  CameraExtrinsics camera_for(const PhysicsState& state) const;
  // Renders `state` with the current distraction state.
  Frame render_state(const PhysicsState& state) const;
  const Frame* current_background() const;

 private:
  std::unique_ptr<Task> task_;
  DifficultyConfig config_;
  bool camera_backwards_ = false;
  EnvOptions options_;
  std::shared_ptr<const BackgroundSet> backgrounds_;
  std::optional<DistractionProcess> distractions_;
  Rng physics_rng_;
  PhysicsState physics_;
  Eigen::Vector3d episode_focus_ = Eigen::Vector3d::Zero();
  int agent_step_ = 0;
  bool started_ = false;
};

// Factory by names; preset in {none, easy, medium, blind}.
std::unique_ptr<Environment> make_env(const std::string& task, const std::string& preset, bool dynamic,
                                      std::uint64_t seed, EnvOptions options = {});

}  // namespace distraxion
