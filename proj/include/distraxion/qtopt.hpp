#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "distraxion/cem.hpp"
#include "distraxion/critic.hpp"
#include "distraxion/env.hpp"
#include "distraxion/image.hpp"

namespace distraxion {

// K target crops and M loss crops. K = M = 0 trains on uncropped frames,
// K = M = 1 is RAD, K = M = 2 is DrQ.
struct AugConfig {
  int K = 1;
  int M = 1;
  Size crop{56, 56};

  bool cropping() const { return K > 0; }
  void validate() const;
};

enum class AugMethod { none, rad, drq };

AugMethod parse_aug(const std::string& name);
AugConfig aug_config(AugMethod method, Size crop);

struct Observation {
  std::shared_ptr<const Frame> pixels;
  Eigen::VectorXd state;
};

struct Transition {
  Observation s;
  Eigen::VectorXd action;
  double reward = 0.0;
  Observation next;
  double discount = 1.0;
};

// Maps observations to network input columns. Pixel inputs are channel-major
// and scaled to [0, 1]; state inputs pass through and ignore crop offsets.
class InputPipeline {
 public:
  // Pixel pipeline.
  InputPipeline(Size frame_size, const AugConfig& aug);
  // State pipeline.
  explicit InputPipeline(int state_dim);

  bool pixels() const { return pixels_; }
  bool cropping() const { return cropping_; }
  // Image size the network sees (crop size when cropping).
  Size network_size() const { return network_size_; }
  int input_size() const;

  // Uniform over all valid crop offsets; (0, 0) when not cropping.
  PixelOffset sample_offset(Rng& rng) const;
  PixelOffset center_offset() const;

  void write(const Observation& obs, PixelOffset offset, double* out) const;
  nn::Vector input(const Observation& obs, PixelOffset offset) const;

 private:
  bool pixels_ = false;
  bool cropping_ = false;
  Size frame_size_;
  Size network_size_;
  int state_dim_ = 0;
};

// crops[k][i]: augmentation parameters of the k-th draw for transition i.
using CropSet = std::vector<std::vector<PixelOffset>>;

CropSet sample_crops(int draws, int batch, const InputPipeline& pipeline, Rng& rng);

// V(s') for a batch of network inputs (one column each).
using ValueFn = std::function<nn::Vector(const nn::Matrix& inputs)>;
// Q(s, a) for batches of inputs and actions (matching columns).
using QFn = std::function<nn::Vector(const nn::Matrix& inputs, const nn::Matrix& actions)>;

// y_i = r_i + gamma * discount_i * (1/K) sum_k V(f(s'_i, crops[k][i])).
// With an empty CropSet (K = 0) the uncropped next observation is used once.
nn::Vector drq_target(std::span<const Transition> batch, const CropSet& crops, const ValueFn& value, double gamma,
                      const InputPipeline& pipeline);
nn::Vector drq_target(std::span<const Transition> batch, int K, const ValueFn& value, double gamma,
                      const InputPipeline& pipeline, Rng& rng);

// J = mean_i (y_i - (1/M) sum_m Q(f(s_i, crops[m][i]), a_i))^2. The Q
// estimates are averaged before squaring. Throws std::invalid_argument when
// y and the batch disagree in size.
double drq_loss(std::span<const Transition> batch, const CropSet& crops, const QFn& q, const nn::Vector& targets,
                const InputPipeline& pipeline);
double drq_loss(std::span<const Transition> batch, int M, const QFn& q, const nn::Vector& targets,
                const InputPipeline& pipeline, Rng& rng);

enum class CriticLoss {
  squared,
  // Critic outputs are logits; J = mean_i BCE(y_i, sigmoid(mean_m Q)) with y in [0, 1].
  cross_entropy,
};

CriticLoss parse_critic_loss(const std::string& name);

// Same loss evaluated through the critic's caching path; accumulates dJ/dtheta
// into the critic's gradients and returns J.
double drq_loss_backward(std::span<const Transition> batch, const CropSet& crops, Critic& critic,
                         const nn::Vector& targets, const InputPipeline& pipeline,
                         CriticLoss loss = CriticLoss::squared);

// V(s') = max_a Q_target(s', a) found by batched CEM.
ValueFn cem_value_fn(const Critic& target, const CEMConfig& cem, Rng& rng);

// Greedy CEM action for one observation (center crop for pixel critics).
Eigen::VectorXd greedy_action(const Critic& critic, const InputPipeline& pipeline, const Observation& obs,
                              const CEMConfig& cem, Rng& rng);

class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity);
  void add(Transition t);
  std::size_t size() const { return data_.size(); }
  std::vector<Transition> sample(int count, Rng& rng) const;

 private:
  std::size_t capacity_;
  std::size_t next_ = 0;
  std::vector<Transition> data_;
};

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  AugConfig aug;
  CEMConfig cem;
  long steps = 0;
  int batch = 512;
  double gamma = 0.99;
  double learning_rate = 1e-4;
  CriticLoss loss = CriticLoss::squared;
  // Multiplies rewards before they enter the target. With the cross-entropy
  // loss targets are clipped to [0, 1], so rewards should be scaled to fit.
  double reward_scale = 1.0;
  // Polyak rate for the target critic, applied every learning step.
  double tau = 0.01;
  std::size_t replay_capacity = 100000;
  double epsilon_start = 1.0;
  double epsilon_end = 0.1;
  // Fraction of `steps` over which epsilon anneals linearly.
  double epsilon_decay_fraction = 0.5;
  // Transitions collected before learning starts (at least one batch).
  long learning_starts = 1000;
  // Use the task's low-dimensional state instead of pixels.
  bool state_observations = false;
  int hidden = 256;
  int embedding = 50;
  int filters = 32;
  int conv_layers = 4;
  std::uint64_t seed = 0;
};

struct MetricRow {
  long step = 0;
  int episode = 0;
  double episode_return = 0.0;
  // Mean loss over the learning steps of the episode (NaN before learning starts).
  double loss = 0.0;
};

struct TrainResult {
  Critic critic;
  InputPipeline pipeline;
  std::vector<MetricRow> log;
};

Observation observe(const Environment& env, const TimeStep& ts, bool state_observations);

CriticConfig critic_config(const Environment& env, const TrainConfig& config, const InputPipeline& pipeline);
InputPipeline make_pipeline(const Environment& env, const TrainConfig& config);

// One environment step and one learning step per iteration; episodes reset
// automatically. `on_episode` is called after every finished episode.
TrainResult train(Environment& env, const TrainConfig& config,
                  const std::function<void(const MetricRow&)>& on_episode = {});

void write_metrics_csv(const std::vector<MetricRow>& log, const std::string& path);

}  // namespace distraxion
