#include "distraxion/bench.hpp"

#include <algorithm>
#include <cmath>
#include <json.hpp>
#include <numbers>
#include <stdexcept>

namespace distraxion {

namespace {

double wrap_angle(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

Eigen::VectorXd clipped(Eigen::VectorXd a) { return a.cwiseMax(-1.0).cwiseMin(1.0); }

}  // namespace

Eigen::VectorXd RandomAgent::act(const Environment& env, const TimeStep&) {
  Eigen::VectorXd a(env.spec().action_dim);
  for (Eigen::Index i = 0; i < a.size(); ++i) a[i] = uniform(rng_, -1.0, 1.0);
  return a;
}

Eigen::VectorXd cartpole_controller(const PhysicsState& s, const CartpoleParams& p) {
  const double x = s.q[0], th = wrap_angle(s.q[1]), xd = s.qd[0], td = s.qd[1];
  Eigen::VectorXd a(1);
  if (std::abs(th) < 0.5) {
    a[0] = (20.0 * th + 4.0 * td + 0.5 * x + 1.0 * xd) / p.force_gain;
  } else {
    const double e_pole = 0.5 * (4.0 / 3.0) * p.pole_mass * p.half_length * p.half_length * td * td +
                          p.pole_mass * p.gravity * p.half_length * (1.0 + std::cos(th));
    const double e_up = 2.0 * p.pole_mass * p.gravity * p.half_length;
    a[0] = -3.0 * (e_up - e_pole) * td * std::cos(th) - 0.4 * x - 0.6 * xd;
  }
  return clipped(a);
}

Eigen::VectorXd reacher_controller(const PhysicsState& s, const ReacherParams& p) {
  const double l = p.link_length;
  const double q1 = s.q[0], q2 = s.q[1];
  const Eigen::Vector2d tip(l * std::cos(q1) + l * std::cos(q1 + q2), l * std::sin(q1) + l * std::sin(q1 + q2));
  Eigen::Matrix2d jac;
  jac << -l * std::sin(q1) - l * std::sin(q1 + q2), -l * std::sin(q1 + q2), l * std::cos(q1) + l * std::cos(q1 + q2),
      l * std::cos(q1 + q2);
  const Eigen::Vector2d err = s.aux.head<2>() - tip;
  const Eigen::Vector2d torque = jac.transpose() * (4.0 * err) - 0.01 * s.qd.head<2>();
  return clipped(torque / p.torque_gain);
}

Eigen::VectorXd ball_in_cup_controller(const PhysicsState& s, const BallInCupParams& p) {
  const Eigen::Vector2d cup = s.q.segment<2>(0), ball = s.q.segment<2>(2);
  const Eigen::Vector2d cup_v = s.qd.segment<2>(0), ball_v = s.qd.segment<2>(2);
  const Eigen::Vector2d rel = ball - cup, vrel = ball_v - cup_v;
  Eigen::Vector2d target;
  if (rel.y() > 0.0 && rel.y() < p.cup_height && std::abs(rel.x()) < p.cup_half_width - p.ball_radius) {
    target = cup;
  } else if (rel.y() > -0.05) {
    // Get under the ball.
    target = Eigen::Vector2d(ball.x() + 0.1 * ball_v.x(), cup.y());
  } else {
    // Pump toward the energy of a swing reaching the rim, push against it when above.
    const double energy = 0.5 * vrel.squaredNorm() + p.gravity * rel.y();
    const double dir = energy < p.gravity * p.string_length ? -1.0 : 1.0;
    const double x = dir * 0.25 * (vrel.x() > 0 ? 1.0 : -1.0);
    target = Eigen::Vector2d(std::clamp(x, -p.cup_x_limit, p.cup_x_limit), p.cup_rest_height);
  }
  const Eigen::Vector2d cmd = 8.0 * (target - cup) - 0.8 * cup_v + p.cup_damping * cup_v / p.cup_gain;
  return clipped(cmd);
}

Eigen::VectorXd ScriptedAgent::act(const Environment& env, const TimeStep&) {
  const Task& t = env.task();
  const PhysicsState& s = env.physics_state();
  if (auto* c = dynamic_cast<const CartpoleSwingup*>(&t)) return cartpole_controller(s, c->params());
  if (auto* r = dynamic_cast<const ReacherEasy*>(&t)) return reacher_controller(s, r->params());
  if (auto* b = dynamic_cast<const BallInCupCatch*>(&t)) return ball_in_cup_controller(s, b->params());
  throw std::invalid_argument("no scripted controller for task " + to_string(t.spec().name));
}

QtOptAgent::QtOptAgent(const Critic& critic, InputPipeline pipeline, CEMConfig cem, bool state_observations,
                       std::uint64_t seed)
    : critic_(critic),
      pipeline_(std::move(pipeline)),
      cem_(cem),
      state_observations_(state_observations),
      rng_(derive_seed(seed, "agent")) {}

Eigen::VectorXd QtOptAgent::act(const Environment& env, const TimeStep& ts) {
  return greedy_action(critic_, pipeline_, observe(env, ts, state_observations_), cem_, rng_);
}

std::vector<double> run_episodes(Environment& env, Agent& agent, int episodes) {
  if (episodes <= 0) throw ConfigError("episodes must be positive");
  std::vector<double> returns;
  returns.reserve(episodes);
  for (int e = 0; e < episodes; ++e) {
    agent.begin_episode();
    TimeStep ts = env.reset();
    double total = 0.0;
    while (!ts.last) {
      ts = env.step(agent.act(env, ts));
      total += ts.reward;
    }
    returns.push_back(total);
  }
  return returns;
}

void summarize(EvalSummary& s) {
  const auto n = static_cast<double>(s.returns.size());
  if (s.returns.empty()) {
    s.mean = s.standard_error = 0.0;
    return;
  }
  double sum = 0.0;
  for (double r : s.returns) sum += r;
  s.mean = sum / n;
  if (s.returns.size() < 2) {
    s.standard_error = 0.0;
    return;
  }
  double ss = 0.0;
  for (double r : s.returns) ss += (r - s.mean) * (r - s.mean);
  s.standard_error = std::sqrt(ss / (n - 1.0)) / std::sqrt(n);
}

void write_csv(const std::vector<EvalSummary>& rows, std::ostream& out) {
  out << "task,preset,dynamic,agent,seed,episodes,mean,stderr\n";
  const auto old = out.precision(10);
  for (const auto& r : rows) {
    out << r.task << ',' << r.preset << ',' << (r.dynamic ? "dynamic" : "static") << ',' << r.agent << ',' << r.seed
        << ',' << r.returns.size() << ',' << r.mean << ',' << r.standard_error << '\n';
  }
  out.precision(old);
}

void write_json(const std::vector<EvalSummary>& rows, std::ostream& out) {
  nlohmann::json arr = nlohmann::json::array();
  for (const auto& r : rows) {
    arr.push_back({{"task", r.task},
                   {"preset", r.preset},
                   {"dynamic", r.dynamic},
                   {"agent", r.agent},
                   {"seed", r.seed},
                   {"episodes", r.returns.size()},
                   {"mean", r.mean},
                   {"stderr", r.standard_error},
                   {"returns", r.returns}});
  }
  out << arr.dump(2) << '\n';
}

}  // namespace distraxion
