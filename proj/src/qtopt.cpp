#include "distraxion/qtopt.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>

namespace distraxion {

void AugConfig::validate() const {
  if (K < 0 || M < 0) throw ConfigError("K and M must be nonnegative");
  if ((K == 0) != (M == 0)) throw ConfigError("K and M must both be zero or both be positive");
  if (K > 0 && (crop.width <= 0 || crop.height <= 0)) throw ConfigError("crop size must be positive");
}

AugMethod parse_aug(const std::string& name) {
  if (name == "none") return AugMethod::none;
  if (name == "rad") return AugMethod::rad;
  if (name == "drq") return AugMethod::drq;
  throw ConfigError("unknown augmentation '" + name + "' (expected none, rad or drq)");
}

AugConfig aug_config(AugMethod method, Size crop) {
  switch (method) {
    case AugMethod::none: return {0, 0, crop};
    case AugMethod::rad: return {1, 1, crop};
    case AugMethod::drq: return {2, 2, crop};
  }
  return {};
}

InputPipeline::InputPipeline(Size frame_size, const AugConfig& aug)
    : pixels_(true), cropping_(aug.cropping()), frame_size_(frame_size) {
  aug.validate();
  if (cropping_ && (aug.crop.width > frame_size.width || aug.crop.height > frame_size.height)) {
    throw ConfigError("crop larger than frame");
  }
  network_size_ = cropping_ ? aug.crop : frame_size;
}

InputPipeline::InputPipeline(int state_dim) : state_dim_(state_dim) {
  if (state_dim <= 0) throw ConfigError("state dimension must be positive");
}

int InputPipeline::input_size() const {
  return pixels_ ? Frame::kChannels * network_size_.width * network_size_.height : state_dim_;
}

PixelOffset InputPipeline::sample_offset(Rng& rng) const {
  if (!pixels_ || !cropping_) return {0, 0};
  return {uniform_int(rng, 0, frame_size_.width - network_size_.width),
          uniform_int(rng, 0, frame_size_.height - network_size_.height)};
}

PixelOffset InputPipeline::center_offset() const {
  if (!pixels_) return {0, 0};
  return {(frame_size_.width - network_size_.width) / 2, (frame_size_.height - network_size_.height) / 2};
}

void InputPipeline::write(const Observation& obs, PixelOffset offset, double* out) const {
  if (!pixels_) {
    if (obs.state.size() != state_dim_) throw std::invalid_argument("state observation has wrong size");
    std::copy(obs.state.data(), obs.state.data() + state_dim_, out);
    return;
  }
  if (!obs.pixels) throw std::invalid_argument("pixel observation missing");
  const Frame& f = *obs.pixels;
  if (f.size() != frame_size_) throw std::invalid_argument("pixel observation has wrong size");
  const int w = network_size_.width;
  const int h = network_size_.height;
  if (offset.x < 0 || offset.y < 0 || offset.x + w > f.width() || offset.y + h > f.height()) {
    throw ImageError("crop offset out of bounds");
  }
  const auto& data = f.data();
  const std::size_t plane = static_cast<std::size_t>(w) * h;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t src = (static_cast<std::size_t>(y + offset.y) * f.width() + (x + offset.x)) * Frame::kChannels;
      const std::size_t dst = static_cast<std::size_t>(y) * w + x;
      for (int c = 0; c < Frame::kChannels; ++c) out[c * plane + dst] = data[src + c] / 255.0;
    }
  }
}

nn::Vector InputPipeline::input(const Observation& obs, PixelOffset offset) const {
  nn::Vector v(input_size());
  write(obs, offset, v.data());
  return v;
}

CropSet sample_crops(int draws, int batch, const InputPipeline& pipeline, Rng& rng) {
  CropSet crops(draws, std::vector<PixelOffset>(batch));
  for (auto& draw : crops)
    for (auto& o : draw) o = pipeline.sample_offset(rng);
  return crops;
}

namespace {

void check_crops(const CropSet& crops, std::size_t batch) {
  for (const auto& c : crops)
    if (c.size() != batch) throw std::invalid_argument("crop set does not match batch size");
}

// Inputs for draw-major columns: column d * B + i is f(obs_i, crops[d][i]).
// An empty crop set yields one uncropped column per transition.
template <typename Get>
nn::Matrix stacked_inputs(std::span<const Transition> batch, const CropSet& crops, const InputPipeline& pipeline,
                          Get get) {
  const int B = static_cast<int>(batch.size());
  const int draws = crops.empty() ? 1 : static_cast<int>(crops.size());
  nn::Matrix x(pipeline.input_size(), draws * B);
  for (int d = 0; d < draws; ++d) {
    for (int i = 0; i < B; ++i) {
      const PixelOffset o = crops.empty() ? PixelOffset{0, 0} : crops[d][i];
      pipeline.write(get(batch[i]), o, x.col(d * B + i).data());
    }
  }
  return x;
}

nn::Matrix stacked_actions(std::span<const Transition> batch, int draws) {
  const int B = static_cast<int>(batch.size());
  if (B == 0) return nn::Matrix(0, 0);
  const auto dim = batch[0].action.size();
  nn::Matrix a(dim, draws * B);
  for (int d = 0; d < draws; ++d)
    for (int i = 0; i < B; ++i) {
      if (batch[i].action.size() != dim) throw std::invalid_argument("inconsistent action sizes");
      a.col(d * B + i) = batch[i].action;
    }
  return a;
}

nn::Vector draw_mean(const nn::Vector& values, int draws, int B) {
  nn::Vector m = nn::Vector::Zero(B);
  for (int d = 0; d < draws; ++d) m += values.segment(d * B, B);
  return m / draws;
}

}  // namespace

nn::Vector drq_target(std::span<const Transition> batch, const CropSet& crops, const ValueFn& value, double gamma,
                      const InputPipeline& pipeline) {
  const int B = static_cast<int>(batch.size());
  check_crops(crops, batch.size());
  if (B == 0) return nn::Vector(0);
  const int draws = crops.empty() ? 1 : static_cast<int>(crops.size());
  const nn::Matrix x = stacked_inputs(batch, crops, pipeline, [](const Transition& t) -> const Observation& {
    return t.next;
  });
  const nn::Vector v = value(x);
  if (v.size() != x.cols()) throw std::invalid_argument("value function returned wrong number of values");
  const nn::Vector vbar = draw_mean(v, draws, B);
  nn::Vector y(B);
  for (int i = 0; i < B; ++i) y[i] = batch[i].reward + gamma * batch[i].discount * vbar[i];
  return y;
}

nn::Vector drq_target(std::span<const Transition> batch, int K, const ValueFn& value, double gamma,
                      const InputPipeline& pipeline, Rng& rng) {
  if (K < 0) throw std::invalid_argument("K must be nonnegative");
  return drq_target(batch, sample_crops(K, static_cast<int>(batch.size()), pipeline, rng), value, gamma, pipeline);
}

double drq_loss(std::span<const Transition> batch, const CropSet& crops, const QFn& q, const nn::Vector& targets,
                const InputPipeline& pipeline) {
  const int B = static_cast<int>(batch.size());
  if (targets.size() != B) throw std::invalid_argument("targets and batch differ in size");
  check_crops(crops, batch.size());
  if (B == 0) return 0.0;
  const int draws = crops.empty() ? 1 : static_cast<int>(crops.size());
  const nn::Matrix x = stacked_inputs(batch, crops, pipeline, [](const Transition& t) -> const Observation& {
    return t.s;
  });
  const nn::Vector qv = q(x, stacked_actions(batch, draws));
  if (qv.size() != x.cols()) throw std::invalid_argument("Q function returned wrong number of values");
  const nn::Vector err = targets - draw_mean(qv, draws, B);
  return err.squaredNorm() / B;
}

double drq_loss(std::span<const Transition> batch, int M, const QFn& q, const nn::Vector& targets,
                const InputPipeline& pipeline, Rng& rng) {
  if (M < 0) throw std::invalid_argument("M must be nonnegative");
  return drq_loss(batch, sample_crops(M, static_cast<int>(batch.size()), pipeline, rng), q, targets, pipeline);
}

CriticLoss parse_critic_loss(const std::string& name) {
  if (name == "squared") return CriticLoss::squared;
  if (name == "cross_entropy") return CriticLoss::cross_entropy;
  throw ConfigError("unknown critic loss '" + name + "' (expected squared or cross_entropy)");
}

double drq_loss_backward(std::span<const Transition> batch, const CropSet& crops, Critic& critic,
                         const nn::Vector& targets, const InputPipeline& pipeline, CriticLoss loss) {
  const int B = static_cast<int>(batch.size());
  if (targets.size() != B) throw std::invalid_argument("targets and batch differ in size");
  check_crops(crops, batch.size());
  if (B == 0) return 0.0;
  const int draws = crops.empty() ? 1 : static_cast<int>(crops.size());
  const nn::Matrix x = stacked_inputs(batch, crops, pipeline, [](const Transition& t) -> const Observation& {
    return t.s;
  });
  const nn::Vector qv = critic.forward(x, stacked_actions(batch, draws));
  const nn::Vector qbar = draw_mean(qv, draws, B);
  nn::Vector dq(B);
  double value = 0.0;
  if (loss == CriticLoss::squared) {
    const nn::Vector err = targets - qbar;
    dq = -2.0 * err / B;
    value = err.squaredNorm() / B;
  } else {
    for (int i = 0; i < B; ++i) {
      const double y = targets[i], z = qbar[i];
      if (!(y >= 0.0 && y <= 1.0)) throw std::invalid_argument("cross-entropy targets must lie in [0, 1]");
      // log(1 + e^z) - y z, stable for large |z|
      value += std::max(z, 0.0) + std::log1p(std::exp(-std::abs(z))) - y * z;
      dq[i] = (1.0 / (1.0 + std::exp(-z)) - y) / B;
    }
    value /= B;
  }
  nn::Vector grad(qv.size());
  for (int d = 0; d < draws; ++d) grad.segment(d * B, B) = dq / draws;
  critic.backward(grad);
  return value;
}

namespace {

nn::Vector cem_values(const Critic& critic, const nn::Matrix& embeddings, const CEMConfig& cem, Rng& rng,
                      nn::Matrix* actions) {
  const int problems = static_cast<int>(embeddings.cols());
  const int dim = critic.config().action_dim;
  auto scorer = [&](const Eigen::MatrixXd& a, int count) -> Eigen::VectorXd {
    nn::Matrix tiled(embeddings.rows(), a.cols());
    for (int p = 0; p < problems; ++p)
      for (int j = 0; j < count; ++j) tiled.col(p * count + j) = embeddings.col(p);
    return critic.head_values(tiled, a);
  };
  Eigen::VectorXd best;
  Eigen::MatrixXd a = cem_maximize_batch(scorer, problems, dim, cem, rng, &best);
  if (actions) *actions = std::move(a);
  return best;
}

}  // namespace

ValueFn cem_value_fn(const Critic& target, const CEMConfig& cem, Rng& rng) {
  return [&target, cem, &rng](const nn::Matrix& inputs) {
    return cem_values(target, target.encode(inputs), cem, rng, nullptr);
  };
}

Eigen::VectorXd greedy_action(const Critic& critic, const InputPipeline& pipeline, const Observation& obs,
                              const CEMConfig& cem, Rng& rng) {
  const nn::Matrix x = pipeline.input(obs, pipeline.center_offset());
  nn::Matrix a;
  cem_values(critic, critic.encode(x), cem, rng, &a);
  return a.col(0);
}

ReplayBuffer::ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
  if (capacity == 0) throw ConfigError("replay capacity must be positive");
  data_.reserve(std::min<std::size_t>(capacity, 1 << 16));
}

void ReplayBuffer::add(Transition t) {
  if (data_.size() < capacity_) {
    data_.push_back(std::move(t));
  } else {
    data_[next_] = std::move(t);
  }
  next_ = (next_ + 1) % capacity_;
}

std::vector<Transition> ReplayBuffer::sample(int count, Rng& rng) const {
  if (data_.empty()) throw std::logic_error("sampling from an empty replay buffer");
  std::vector<Transition> out;
  out.reserve(count);
  const int n = static_cast<int>(data_.size());
  for (int i = 0; i < count; ++i) out.push_back(data_[uniform_int(rng, 0, n - 1)]);
  return out;
}

Observation observe(const Environment& env, const TimeStep& ts, bool state_observations) {
  Observation o;
  if (state_observations) {
    o.state = env.state_observation();
  } else {
    o.pixels = std::make_shared<const Frame>(ts.observation);
  }
  return o;
}

InputPipeline make_pipeline(const Environment& env, const TrainConfig& config) {
  if (config.state_observations) return InputPipeline(static_cast<int>(env.state_observation().size()));
  return InputPipeline(env.render_size(), config.aug);
}

CriticConfig critic_config(const Environment& env, const TrainConfig& config, const InputPipeline& pipeline) {
  CriticConfig c;
  c.pixels = pipeline.pixels();
  c.channels = Frame::kChannels;
  c.width = pipeline.network_size().width;
  c.height = pipeline.network_size().height;
  c.state_dim = pipeline.pixels() ? 0 : pipeline.input_size();
  c.action_dim = env.spec().action_dim;
  c.conv_layers = config.conv_layers;
  c.filters = config.filters;
  c.embedding = config.embedding;
  c.hidden = config.hidden;
  return c;
}

TrainResult train(Environment& env, const TrainConfig& config, const std::function<void(const MetricRow&)>& on_episode) {
  config.aug.validate();
  config.cem.validate();
  if (config.steps < 0) throw ConfigError("steps must be nonnegative");
  if (config.batch <= 0) throw ConfigError("batch must be positive");
  if (!(config.tau >= 0.0 && config.tau <= 1.0)) throw ConfigError("tau must lie in [0, 1]");

  // The pipeline needs the state size, which is known once the env has reset.
  env.reset();
  const InputPipeline pipeline = make_pipeline(env, config);
  const CriticConfig cc = critic_config(env, config, pipeline);
  Rng rng(derive_seed(config.seed, "agent"));
  Critic critic(cc, rng);
  Critic target(cc, rng);
  target.soft_update(critic, 1.0);
  nn::Adam adam(config.learning_rate);
  const auto params = critic.parameters();
  ReplayBuffer replay(config.replay_capacity);

  TrainResult result{critic, pipeline, {}};
  const long learning_starts = std::max<long>(config.learning_starts, config.batch);
  const double decay_steps = std::max(1.0, config.epsilon_decay_fraction * static_cast<double>(config.steps));
  // Pixel agents use the RAD/DrQ crop counts; state agents are a single identity draw.
  const int K = pipeline.pixels() ? config.aug.K : 1;
  const int M = pipeline.pixels() ? config.aug.M : 1;
  // Uncropped pixel agents use the empty crop set; state draws are identity offsets.
  auto draw_crops = [&](int draws) {
    if (pipeline.pixels() && !pipeline.cropping()) return CropSet{};
    return sample_crops(draws, config.batch, pipeline, rng);
  };

  TimeStep ts = env.reset();
  Observation obs = observe(env, ts, config.state_observations);
  double episode_return = 0.0;
  double loss_sum = 0.0;
  long loss_count = 0;
  int episode = 0;
  const int action_dim = env.spec().action_dim;

  for (long step = 1; step <= config.steps; ++step) {
    const double frac = std::min(1.0, static_cast<double>(step - 1) / decay_steps);
    const double epsilon = config.epsilon_start + (config.epsilon_end - config.epsilon_start) * frac;
    Eigen::VectorXd action(action_dim);
    if (uniform(rng, 0.0, 1.0) < epsilon) {
      for (int j = 0; j < action_dim; ++j) action[j] = uniform(rng, -1.0, 1.0);
    } else {
      action = greedy_action(critic, pipeline, obs, config.cem, rng);
    }
    ts = env.step(action);
    Observation next = observe(env, ts, config.state_observations);
    episode_return += ts.reward;
    replay.add({obs, action, ts.reward, next, ts.discount});
    obs = std::move(next);

    if (static_cast<long>(replay.size()) >= learning_starts) {
      std::vector<Transition> batch = replay.sample(config.batch, rng);
      for (auto& t : batch) t.reward *= config.reward_scale;
      const CropSet target_crops = draw_crops(K);
      ValueFn value = cem_value_fn(target, config.cem, rng);
      if (config.loss == CriticLoss::cross_entropy) {
        value = [inner = std::move(value)](const nn::Matrix& x) -> nn::Vector {
          return (1.0 + (-inner(x).array()).exp()).inverse().matrix();
        };
      }
      nn::Vector y = drq_target(batch, target_crops, value, config.gamma, pipeline);
      if (config.loss == CriticLoss::cross_entropy) y = y.cwiseMax(0.0).cwiseMin(1.0);
      const CropSet loss_crops = draw_crops(M);
      critic.zero_grad();
      const double loss = drq_loss_backward(batch, loss_crops, critic, y, pipeline, config.loss);
      if (!std::isfinite(loss)) {
        throw TrainingError("non-finite loss at step " + std::to_string(step) + " (episode " +
                            std::to_string(episode) + ")");
      }
      adam.step(params);
      target.soft_update(critic, config.tau);
      loss_sum += loss;
      ++loss_count;
    }

    if (ts.last) {
      MetricRow row{step, episode, episode_return,
                    loss_count > 0 ? loss_sum / loss_count : std::numeric_limits<double>::quiet_NaN()};
      result.log.push_back(row);
      if (on_episode) on_episode(row);
      ++episode;
      episode_return = 0.0;
      loss_sum = 0.0;
      loss_count = 0;
      ts = env.reset();
      obs = observe(env, ts, config.state_observations);
    }
  }
  result.critic = std::move(critic);
  return result;
}

void write_metrics_csv(const std::vector<MetricRow>& log, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << "step,episode,episode_return,loss\n";
  out.precision(10);
  for (const auto& r : log) out << r.step << ',' << r.episode << ',' << r.episode_return << ',' << r.loss << '\n';
}

}  // namespace distraxion
