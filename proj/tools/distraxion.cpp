#include <CLI11.hpp>
#include <malloc.h>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>

#include "distraxion/background.hpp"
#include "distraxion/bench.hpp"
#include "distraxion/env.hpp"
#include "distraxion/protocol.hpp"
#include "distraxion/qtopt.hpp"
#include "distraxion/server.hpp"

namespace fs = std::filesystem;
using namespace distraxion;

namespace {

struct EnvArgs {
  std::string task = "cartpole_swingup";
  std::string preset = "easy";
  bool dynamic = false;
  std::uint64_t seed = 0;
  int width = kDefaultRenderSize.width;
  int height = kDefaultRenderSize.height;
  std::string videos;
  std::string split = "train";
};

void add_env_args(CLI::App* cmd, EnvArgs& a) {
  cmd->add_option("--task", a.task, "cartpole_swingup, reacher_easy or ball_in_cup_catch")->capture_default_str();
  cmd->add_option("--preset", a.preset, "none, easy, medium or blind")->capture_default_str();
  cmd->add_flag("--dynamic", a.dynamic, "Distractions change every step");
  cmd->add_option("--seed", a.seed)->capture_default_str();
  cmd->add_option("--width", a.width)->capture_default_str();
  cmd->add_option("--height", a.height)->capture_default_str();
  cmd->add_option("--videos", a.videos, "Background video root (<root>/<split>/<video>/<frame>.ppm)");
  cmd->add_option("--split", a.split, "train or val")->capture_default_str();
}

EnvOptions env_options(const EnvArgs& a) {
  EnvOptions o;
  o.render_size = {a.width, a.height};
  if (!a.videos.empty()) {
    o.backgrounds = std::make_shared<const BackgroundSet>(load_background_set(a.videos, parse_split(a.split), o.render_size));
  }
  return o;
}

std::unique_ptr<Environment> build_env(const EnvArgs& a, const std::string& preset, std::uint64_t seed,
                                       const EnvOptions& options) {
  return make_env(a.task, preset, a.dynamic, seed, options);
}

void save(const Frame& f, const fs::path& base, const std::string& format) {
  if (format == "png") {
    write_png(f, base.string() + ".png");
  } else {
    write_ppm(f, base.string() + ".ppm");
  }
}

// Frames spaced evenly through one scripted episode.
std::vector<Frame> episode_strip(Environment& env, int count) {
  ScriptedAgent agent;
  std::vector<Frame> frames;
  TimeStep ts = env.reset();
  const int total = env.spec().agent_steps();
  const int every = std::max(1, total / count);
  frames.push_back(ts.observation);
  while (!ts.last && static_cast<int>(frames.size()) < count) {
    ts = env.step(agent.act(env, ts));
    if (env.agent_step() % every == 0) frames.push_back(ts.observation);
  }
  return frames;
}

int cmd_render(const EnvArgs& a, const std::string& out, int frames, int seeds, const std::string& format) {
  fs::create_directories(out);
  const EnvOptions options = env_options(a);
  const std::string tag = a.task + "_" + a.preset + (a.dynamic ? "_dynamic" : "_static");

  auto env = build_env(a, a.preset, a.seed, options);
  save(tile(episode_strip(*env, frames), frames), fs::path(out) / (tag + "_strip"), format);

  // Rows of presets, columns of seeds.
  std::vector<Frame> grid;
  for (const char* preset : {"none", "easy", "medium", "blind"}) {
    for (int s = 0; s < seeds; ++s) grid.push_back(build_env(a, preset, a.seed + s, options)->reset().observation);
  }
  save(tile(grid, seeds), fs::path(out) / (a.task + "_presets"), format);

  // Background blend from the skybox to the video.
  std::vector<Frame> blend;
  const BenchmarkPreset base = make_preset(parse_preset(a.preset == "none" ? "medium" : a.preset), a.dynamic, a.seed);
  for (double beta : {0.0, 0.25, 0.5, 0.75, 1.0}) {
    DifficultyConfig c = base.config;
    c.beta_bg = beta;
    Environment e(parse_task(a.task), c, base.camera_backwards, options);
    blend.push_back(e.reset().observation);
  }
  save(tile(blend, 5), fs::path(out) / (a.task + "_blend"), format);
  std::cout << "wrote " << out << '\n';
  return 0;
}

int cmd_eval(const EnvArgs& a, const std::string& agent_name, int episodes, const std::string& format,
             const std::string& out) {
  auto env = build_env(a, a.preset, a.seed, env_options(a));
  std::unique_ptr<Agent> agent;
  if (agent_name == "random") {
    agent = std::make_unique<RandomAgent>(a.seed);
  } else if (agent_name == "scripted") {
    agent = std::make_unique<ScriptedAgent>();
  } else {
    throw CLI::ValidationError("--agent", "expected random or scripted");
  }
  EvalSummary s{a.task, a.preset, agent->name(), a.dynamic, a.seed, run_episodes(*env, *agent, episodes)};
  summarize(s);
  std::ofstream file;
  if (!out.empty()) {
    file.open(out);
    if (!file) throw std::runtime_error("cannot write " + out);
  }
  std::ostream& os = out.empty() ? std::cout : file;
  if (format == "json") {
    write_json({s}, os);
  } else {
    write_csv({s}, os);
  }
  return 0;
}

struct TrainArgs {
  std::string aug = "rad";
  long steps = 50000;
  std::string out = "run";
  bool state = false;
  int batch = 512;
  int hidden = 256;
  int crop = 84;
  double learning_rate = 1e-4;
  int learning_starts = 1000;
  std::string loss = "squared";
  double reward_scale = 1.0;
  int eval_episodes = 10;
};

int cmd_train(const EnvArgs& a, const TrainArgs& t) {
  fs::create_directories(t.out);
  auto env = build_env(a, a.preset, a.seed, env_options(a));
  TrainConfig c;
  c.aug = aug_config(parse_aug(t.aug), {t.crop, t.crop});
  c.steps = t.steps;
  c.batch = t.batch;
  c.hidden = t.hidden;
  c.learning_rate = t.learning_rate;
  c.learning_starts = t.learning_starts;
  c.loss = parse_critic_loss(t.loss);
  c.reward_scale = t.reward_scale;
  c.state_observations = t.state;
  c.seed = a.seed;
  const fs::path metrics = fs::path(t.out) / "metrics.csv";
  TrainResult r = train(*env, c, [](const MetricRow& row) {
    std::cerr << "step " << row.step << " episode " << row.episode << " return " << row.episode_return << " loss "
              << row.loss << '\n';
  });
  write_metrics_csv(r.log, metrics.string());

  if (t.eval_episodes > 0) {
    auto eval_env = build_env(a, a.preset, a.seed + 1, env_options(a));
    QtOptAgent agent(r.critic, r.pipeline, c.cem, t.state, a.seed);
    EvalSummary s{a.task, a.preset, agent.name(), a.dynamic, a.seed, run_episodes(*eval_env, agent, t.eval_episodes)};
    summarize(s);
    std::ofstream f(fs::path(t.out) / "eval.csv");
    write_csv({s}, f);
    write_csv({s}, std::cout);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  mallopt(M_MMAP_THRESHOLD, 1 << 30);
  mallopt(M_TRIM_THRESHOLD, 1 << 30);
  CLI::App app{"Pixel-based continuous control with visual distractions"};
  app.require_subcommand(1);

  auto* serve_cmd = app.add_subcommand("serve", "Serve environments over the wire protocol");
  int port = 5555;
  std::string bind = "127.0.0.1";
  bool use_stdio = false;
  serve_cmd->add_option("--port", port)->capture_default_str()->check(CLI::Range(0, 65535));
  serve_cmd->add_option("--bind", bind)->capture_default_str();
  serve_cmd->add_flag("--stdio", use_stdio, "Serve one session on stdin/stdout");

  auto* render_cmd = app.add_subcommand("render", "Write frame strips and preset grids");
  EnvArgs render_args;
  std::string render_out = "frames";
  int render_frames = 8, render_seeds = 4;
  std::string render_format = "ppm";
  add_env_args(render_cmd, render_args);
  render_cmd->add_option("--out", render_out)->capture_default_str();
  render_cmd->add_option("--frames", render_frames)->capture_default_str()->check(CLI::PositiveNumber);
  render_cmd->add_option("--seeds", render_seeds)->capture_default_str()->check(CLI::PositiveNumber);
  render_cmd->add_option("--format", render_format)->capture_default_str()->check(CLI::IsMember({"ppm", "png"}));

  auto* eval_cmd = app.add_subcommand("eval", "Evaluate a baseline agent");
  EnvArgs eval_args;
  std::string agent = "random", eval_format = "csv", eval_out;
  int episodes = 100;
  add_env_args(eval_cmd, eval_args);
  eval_cmd->add_option("--agent", agent)->capture_default_str()->check(CLI::IsMember({"random", "scripted"}));
  eval_cmd->add_option("--episodes", episodes)->capture_default_str()->check(CLI::PositiveNumber);
  eval_cmd->add_option("--format", eval_format)->capture_default_str()->check(CLI::IsMember({"csv", "json"}));
  eval_cmd->add_option("--out", eval_out, "Output file (default stdout)");

  auto* train_cmd = app.add_subcommand("train", "Train QT-Opt with crop augmentation");
  EnvArgs train_args;
  TrainArgs targs;
  add_env_args(train_cmd, train_args);
  train_cmd->add_option("--aug", targs.aug)->capture_default_str()->check(CLI::IsMember({"none", "rad", "drq"}));
  train_cmd->add_option("--steps", targs.steps)->capture_default_str();
  train_cmd->add_option("--out", targs.out)->capture_default_str();
  train_cmd->add_flag("--state", targs.state, "Train on low-dimensional state instead of pixels");
  train_cmd->add_option("--batch", targs.batch)->capture_default_str();
  train_cmd->add_option("--hidden", targs.hidden)->capture_default_str();
  train_cmd->add_option("--crop", targs.crop)->capture_default_str();
  train_cmd->add_option("--lr", targs.learning_rate)->capture_default_str();
  train_cmd->add_option("--learning-starts", targs.learning_starts)->capture_default_str();
  train_cmd->add_option("--loss", targs.loss)->capture_default_str()->check(CLI::IsMember({"squared", "cross_entropy"}));
  train_cmd->add_option("--reward-scale", targs.reward_scale, "Multiplies rewards before the target")
      ->capture_default_str();
  train_cmd->add_option("--eval-episodes", targs.eval_episodes)->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*serve_cmd) {
      if (use_stdio) {
        serve_stdio();
        return 0;
      }
      auto server = serve(bind, static_cast<std::uint16_t>(port));
      std::cerr << "listening on " << bind << ':' << server->port() << '\n';
      server->wait();
      return 0;
    }
    if (*render_cmd) return cmd_render(render_args, render_out, render_frames, render_seeds, render_format);
    if (*eval_cmd) return cmd_eval(eval_args, agent, episodes, eval_format, eval_out);
    if (*train_cmd) return cmd_train(train_args, targs);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
