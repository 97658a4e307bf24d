#include <gtest/gtest.h>

#include <cmath>
#include <json.hpp>
#include <sstream>

#include "distraxion/bench.hpp"

using namespace distraxion;

namespace {

EnvOptions tiny() {
  EnvOptions o;
  o.render_size = {16, 16};
  return o;
}

}  // namespace

TEST(Summary, MeanAndStandardError) {
  EvalSummary s;
  s.returns = {1, 2, 3, 4};
  summarize(s);
  EXPECT_DOUBLE_EQ(s.mean, 2.5);
  // Sample variance 5/3, over n = 4.
  EXPECT_NEAR(s.standard_error, std::sqrt(5.0 / 3.0) / 2.0, 1e-15);
  s.returns = {7};
  summarize(s);
  EXPECT_EQ(s.mean, 7);
  EXPECT_EQ(s.standard_error, 0);
}

TEST(Summary, CsvAndJson) {
  EvalSummary s;
  s.task = "reacher_easy";
  s.preset = "easy";
  s.agent = "random";
  s.dynamic = true;
  s.seed = 9;
  s.returns = {10, 20};
  summarize(s);
  std::ostringstream csv;
  write_csv({s}, csv);
  EXPECT_EQ(csv.str(),
            "task,preset,dynamic,agent,seed,episodes,mean,stderr\n"
            "reacher_easy,easy,dynamic,random,9,2,15,5\n");
  std::ostringstream js;
  write_json({s}, js);
  const auto parsed = nlohmann::json::parse(js.str());
  ASSERT_EQ(parsed.size(), 1u);
  EXPECT_EQ(parsed[0]["task"], "reacher_easy");
  EXPECT_EQ(parsed[0]["dynamic"], true);
  EXPECT_EQ(parsed[0]["returns"].size(), 2u);
  EXPECT_DOUBLE_EQ(parsed[0]["stderr"].get<double>(), 5.0);
}

TEST(Agents, RandomActionsInBoxAndSeeded) {
  auto env = make_env("reacher_easy", "none", false, 1, tiny());
  const TimeStep ts = env->reset();
  RandomAgent a(4), b(4);
  for (int i = 0; i < 50; ++i) {
    const Eigen::VectorXd x = a.act(*env, ts);
    ASSERT_EQ(x.size(), 2);
    EXPECT_LE(x.cwiseAbs().maxCoeff(), 1.0);
    EXPECT_EQ(x, b.act(*env, ts));
  }
}

TEST(Agents, RunEpisodesRejectsZero) {
  auto env = make_env("reacher_easy", "none", false, 1, tiny());
  RandomAgent a(0);
  EXPECT_THROW(run_episodes(*env, a, 0), ConfigError);
}

TEST(Agents, ScriptedBeatsRandomOnEveryTask) {
  for (TaskName t : all_tasks()) {
    auto env = make_env(to_string(t), "none", false, 2, tiny());
    ScriptedAgent scripted;
    RandomAgent random(2);
    EvalSummary s, r;
    s.returns = run_episodes(*env, scripted, 3);
    r.returns = run_episodes(*env, random, 3);
    summarize(s);
    summarize(r);
    EXPECT_GT(s.mean, 2.0 * r.mean) << to_string(t);
  }
}

TEST(Agents, ScriptedIsDeterministic) {
  auto run = [] {
    auto env = make_env("ball_in_cup_catch", "easy", true, 8, tiny());
    ScriptedAgent agent;
    return run_episodes(*env, agent, 2);
  };
  EXPECT_EQ(run(), run());
}
