#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "distraxion/env.hpp"
#include "distraxion/qtopt.hpp"

namespace distraxion {

class Agent {
 public:
  virtual ~Agent() = default;
  virtual std::string name() const = 0;
  virtual void begin_episode() {}
  virtual Eigen::VectorXd act(const Environment& env, const TimeStep& ts) = 0;
};

// Uniform actions in [-1, 1].
class RandomAgent final : public Agent {
 public:
  explicit RandomAgent(std::uint64_t seed) : rng_(derive_seed(seed, "agent")) {}
  std::string name() const override { return "random"; }
  Eigen::VectorXd act(const Environment& env, const TimeStep& ts) override;

 private:
  Rng rng_;
};

// Hand-written controllers reading the privileged physics state.
// cartpole: energy pumping swing-up with a linear balance controller;
// reacher: Jacobian-transpose PD to the target;
// ball in cup: swing the ball up, then hold the cup under it.
class ScriptedAgent final : public Agent {
 public:
  std::string name() const override { return "scripted"; }
  Eigen::VectorXd act(const Environment& env, const TimeStep& ts) override;
};

Eigen::VectorXd cartpole_controller(const PhysicsState& state, const CartpoleParams& params);
Eigen::VectorXd reacher_controller(const PhysicsState& state, const ReacherParams& params);
Eigen::VectorXd ball_in_cup_controller(const PhysicsState& state, const BallInCupParams& params);

// Greedy CEM policy over a trained critic.
class QtOptAgent final : public Agent {
 public:
  QtOptAgent(const Critic& critic, InputPipeline pipeline, CEMConfig cem, bool state_observations, std::uint64_t seed);
  std::string name() const override { return "qtopt"; }
  Eigen::VectorXd act(const Environment& env, const TimeStep& ts) override;

 private:
  const Critic& critic_;
  InputPipeline pipeline_;
  CEMConfig cem_;
  bool state_observations_;
  Rng rng_;
};

struct EvalSummary {
  std::string task;
  std::string preset;
  std::string agent;
  bool dynamic = false;
  std::uint64_t seed = 0;
  std::vector<double> returns;
  double mean = 0.0;
  // Sample standard deviation over sqrt(n); 0 for fewer than two episodes.
  double standard_error = 0.0;
};

std::vector<double> run_episodes(Environment& env, Agent& agent, int episodes);
void summarize(EvalSummary& s);

void write_csv(const std::vector<EvalSummary>& rows, std::ostream& out);
void write_json(const std::vector<EvalSummary>& rows, std::ostream& out);

}  // namespace distraxion
