#include "distraxion/env.hpp"

#include <map>
#include <mutex>
#include <tuple>

namespace distraxion {

std::string to_string(PresetName name) {
  switch (name) {
    case PresetName::none:
      return "none";
    case PresetName::easy:
      return "easy";
    case PresetName::medium:
      return "medium";
    case PresetName::blind:
      return "blind";
  }
  return "unknown";
}

PresetName parse_preset(const std::string& name) {
  for (PresetName p : {PresetName::none, PresetName::easy, PresetName::medium, PresetName::blind}) {
    if (to_string(p) == name) return p;
  }
  throw ConfigError("unknown preset '" + name + "'");
}

BenchmarkPreset make_preset(PresetName name, bool dynamic, std::uint64_t seed) {
  BenchmarkPreset p;
  p.name = name;
  p.config.dynamic = dynamic;
  p.config.seed = seed;
  p.config.beta_bg = 1.0;
  switch (name) {
    case PresetName::none:
      break;
    case PresetName::easy:
      p.config.beta_cam = p.config.beta_rgb = 0.1;
      p.config.num_videos = 4;
      break;
    case PresetName::medium:
    case PresetName::blind:
      p.config.beta_cam = p.config.beta_rgb = 0.2;
      p.config.num_videos = 8;
      p.camera_backwards = name == PresetName::blind;
      break;
  }
  return p;
}

std::shared_ptr<const BackgroundSet> procedural_fallback(int count, Size size) {
  static std::mutex mutex;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const BackgroundSet>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{count, size.width, size.height}];
  if (!slot) {
    slot = std::make_shared<const BackgroundSet>(procedural_background(count, kProceduralVideoLength, size, 2017));
  }
  return slot;
}

Environment::Environment(TaskName task, DifficultyConfig config, bool camera_backwards, EnvOptions options)
    : task_(make_task(task)),
      config_(config),
      camera_backwards_(camera_backwards),
      options_(std::move(options)),
      physics_rng_(derive_seed(config.seed, "physics")) {
  config_.validate();
  if (options_.render_size.width <= 0 || options_.render_size.height <= 0) {
    throw ConfigError("render size must be positive");
  }
  std::vector<int> lengths;
  if (config_.num_videos > 0) {
    backgrounds_ = options_.backgrounds ? options_.backgrounds
                                        : procedural_fallback(config_.num_videos, options_.render_size);
    if (backgrounds_->size() < config_.num_videos) {
      throw ConfigError("preset needs " + std::to_string(config_.num_videos) + " background videos, " +
                        std::to_string(backgrounds_->size()) + " available");
    }
    lengths = backgrounds_->lengths();
  }
  const CameraRig rig = task_->camera_rig();
  distractions_.emplace(config_, rig.anchor, task_->body_colors(), std::move(lengths));
}

Environment::Environment(TaskName task, const BenchmarkPreset& preset, EnvOptions options)
    : Environment(task, preset.config, preset.camera_backwards, std::move(options)) {}

CameraExtrinsics Environment::camera_for(const PhysicsState& state) const {
  const CameraRig rig = task_->camera_rig();
  const Eigen::Vector3d focus = task_->tracking_camera() ? task_->focus_point(state) : episode_focus_;
  const CameraState& pose = distractions_->camera();
  const Eigen::Vector3d position = camera_position(pose, focus, rig.r_original);
  if (camera_backwards_) return look_at_with_roll(position, 2.0 * position - focus, pose.roll);
  return look_at_with_roll(position, focus, pose.roll);
}

const Frame* Environment::current_background() const {
  const auto& sched = distractions_->background();
  if (!sched || !backgrounds_) return nullptr;
  return &backgrounds_->sequences[sched->video_index].frames[sched->frame_index];
}

Frame Environment::render_state(const PhysicsState& state) const {
  return render(task_->scene(state), camera_for(state), distractions_->colors(), current_background(),
                config_.beta_bg, options_.render_size);
}

TimeStep Environment::reset() {
  physics_ = task_->reset(physics_rng_);
  episode_focus_ = task_->focus_point(physics_);
  distractions_->reset();
  agent_step_ = 0;
  started_ = true;
  TimeStep ts;
  ts.first = true;
  ts.observation = render_state(physics_);
  return ts;
}

TimeStep Environment::step(const Eigen::VectorXd& action) {
  if (!started_) throw EnvError("step called before reset");
  if (episode_over()) throw EnvError("step called after the final step of the episode; call reset");
  if (action.size() != spec().action_dim) {
    throw std::invalid_argument("action has " + std::to_string(action.size()) + " components, task " +
                                to_string(spec().name) + " expects " + std::to_string(spec().action_dim));
  }
  PhysicsStep result = task_->step(physics_, action);
  physics_ = std::move(result.state);
  ++agent_step_;
  distractions_->advance();
  TimeStep ts;
  ts.reward = result.reward;
  ts.discount = 1.0;
  ts.last = episode_over();
  ts.observation = render_state(physics_);
  return ts;
}

std::unique_ptr<Environment> make_env(const std::string& task, const std::string& preset, bool dynamic,
                                      std::uint64_t seed, EnvOptions options) {
  return std::make_unique<Environment>(parse_task(task), make_preset(parse_preset(preset), dynamic, seed),
                                       std::move(options));
}

}  // namespace distraxion
