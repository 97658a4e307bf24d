#include "distraxion/protocol.hpp"

#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>

namespace distraxion {

std::vector<std::uint8_t> encode_message(const Message& message) {
  const std::string header = message.header.dump();
  if (header.find('\n') != std::string::npos) throw ProtocolError("header serialization contains a newline");
  const std::size_t n = header.size() + 1 + message.payload.size();
  if (n > kMaxMessageBytes) throw ProtocolError("message exceeds maximum size");
  std::vector<std::uint8_t> out;
  out.reserve(4 + n);
  out.push_back(static_cast<std::uint8_t>(n >> 24));
  out.push_back(static_cast<std::uint8_t>(n >> 16));
  out.push_back(static_cast<std::uint8_t>(n >> 8));
  out.push_back(static_cast<std::uint8_t>(n));
  out.insert(out.end(), header.begin(), header.end());
  out.push_back('\n');
  out.insert(out.end(), message.payload.begin(), message.payload.end());
  return out;
}

Message decode_payload(std::span<const std::uint8_t> payload) {
  const auto newline = std::find(payload.begin(), payload.end(), std::uint8_t{'\n'});
  if (newline == payload.end()) throw ProtocolError("message header is not newline-terminated");
  Message m;
  try {
    m.header = nlohmann::json::parse(payload.begin(), newline);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed JSON header: ") + e.what());
  }
  if (!m.header.is_object()) throw ProtocolError("message header must be a JSON object");
  m.payload.assign(newline + 1, payload.end());
  return m;
}

std::size_t FdStream::read_exact(std::uint8_t* out, std::size_t n) {
  std::size_t got = 0;
  while (got < n) {
    const ssize_t r = ::read(read_fd_, out + got, n - got);
    if (r == 0) break;
    if (r < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("read failed: ") + std::strerror(errno));
    }
    got += static_cast<std::size_t>(r);
  }
  return got;
}

std::optional<Message> FdStream::read_message() {
  std::uint8_t prefix[4];
  const std::size_t got = read_exact(prefix, 4);
  if (got == 0) return std::nullopt;
  if (got < 4) throw ProtocolError("truncated length prefix");
  const std::uint32_t n = (std::uint32_t{prefix[0]} << 24) | (std::uint32_t{prefix[1]} << 16) |
                          (std::uint32_t{prefix[2]} << 8) | std::uint32_t{prefix[3]};
  if (n > kMaxMessageBytes) throw ProtocolError("message length " + std::to_string(n) + " exceeds limit");
  std::vector<std::uint8_t> payload(n);
  if (read_exact(payload.data(), n) < n) throw ProtocolError("truncated message payload");
  return decode_payload(payload);
}

void FdStream::write_message(const Message& message) {
  const std::vector<std::uint8_t> bytes = encode_message(message);
  std::size_t sent = 0;
  while (sent < bytes.size()) {
    const ssize_t w = ::write(write_fd_, bytes.data() + sent, bytes.size() - sent);
    if (w < 0) {
      if (errno == EINTR) continue;
      throw ProtocolError(std::string("write failed: ") + std::strerror(errno));
    }
    sent += static_cast<std::size_t>(w);
  }
}

std::unique_ptr<Environment> default_env_factory(const nlohmann::json& req) {
  const TaskName task = parse_task(req.at("task").get<std::string>());
  const bool dynamic = req.value("dynamic", false);
  const std::uint64_t seed = req.value("seed", std::uint64_t{0});
  EnvOptions options;
  options.render_size = {req.value("width", kDefaultRenderSize.width), req.value("height", kDefaultRenderSize.height)};
  if (req.contains("preset")) {
    return std::make_unique<Environment>(task, make_preset(parse_preset(req.at("preset").get<std::string>()), dynamic, seed),
                                         options);
  }
  if (!req.contains("config")) throw ProtocolError("make request needs either 'preset' or 'config'");
  const nlohmann::json& c = req.at("config");
  DifficultyConfig config;
  config.beta_cam = c.value("beta_cam", 0.0);
  config.beta_rgb = c.value("beta_rgb", 0.0);
  config.beta_bg = c.value("beta_bg", 1.0);
  config.num_videos = c.value("num_videos", 0);
  config.dynamic = dynamic;
  config.seed = seed;
  return std::make_unique<Environment>(task, config, c.value("camera_backwards", false), options);
}

Message timestep_message(const TimeStep& ts) {
  Message m;
  m.header = {{"ok", true},
              {"type", "timestep"},
              {"reward", ts.reward},
              {"discount", ts.discount},
              {"first", ts.first},
              {"last", ts.last},
              {"width", ts.observation.width()},
              {"height", ts.observation.height()},
              {"channels", Frame::kChannels}};
  m.payload = ts.observation.data();
  return m;
}

Message error_message(const std::string& what) { return {{{"ok", false}, {"type", "error"}, {"error", what}}, {}}; }

Message Session::handle(const Message& request, bool& close) {
  close = false;
  try {
    const std::string type = request.header.at("type").get<std::string>();
    if (type == "hello") {
      const int version = request.header.at("version").get<int>();
      if (version != kProtocolVersion) {
        close = true;
        return error_message("protocol version mismatch: server speaks " + std::to_string(kProtocolVersion) +
                             ", client sent " + std::to_string(version));
      }
      greeted_ = true;
      return {{{"ok", true}, {"type", "hello"}, {"version", kProtocolVersion}, {"server", "distraxion"}}, {}};
    }
    if (!greeted_) {
      close = true;
      return error_message("expected hello before '" + type + "'");
    }
    if (type == "make") {
      env_ = factory_(request.header);
      const TaskSpec& spec = env_->spec();
      return {{{"ok", true},
               {"type", "spec"},
               {"task", to_string(spec.name)},
               {"action_dim", spec.action_dim},
               {"action_repeat", spec.action_repeat},
               {"episode_steps", spec.agent_steps()},
               {"width", env_->render_size().width},
               {"height", env_->render_size().height},
               {"channels", Frame::kChannels}},
              {}};
    }
    if (type == "close") {
      close = true;
      env_.reset();
      return {{{"ok", true}, {"type", "bye"}}, {}};
    }
    if (!env_) {
      close = true;
      return error_message("no environment: send make before '" + type + "'");
    }
    if (type == "reset") return timestep_message(env_->reset());
    if (type == "step") {
      const auto values = request.header.at("action").get<std::vector<double>>();
      const Eigen::VectorXd action = Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
      return timestep_message(env_->step(action));
    }
    close = true;
    return error_message("unknown message type '" + type + "'");
  } catch (const std::exception& e) {
    close = true;
    return error_message(e.what());
  }
}

void run_session(FdStream& stream, const EnvFactory& factory) {
  Session session(factory);
  while (true) {
    std::optional<Message> request;
    try {
      request = stream.read_message();
    } catch (const ProtocolError& e) {
      try {
        stream.write_message(error_message(e.what()));
      } catch (const ProtocolError&) {
      }
      return;
    }
    if (!request) return;
    bool close = false;
    const Message response = session.handle(*request, close);
    try {
      stream.write_message(response);
    } catch (const ProtocolError&) {
      return;
    }
    if (close) return;
  }
}

}  // namespace distraxion
