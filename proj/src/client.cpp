#include "distraxion/client.hpp"

#include <netdb.h>
#include <sys/socket.h>
#include <unistd.h>

#include <csignal>
#include <cstring>

namespace distraxion {

RemoteEnv::RemoteEnv(const std::string& host, std::uint16_t port, int version) {
  std::signal(SIGPIPE, SIG_IGN);
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* result = nullptr;
  if (::getaddrinfo(host.c_str(), std::to_string(port).c_str(), &hints, &result) != 0 || result == nullptr) {
    throw ProtocolError("cannot resolve " + host);
  }
  fd_ = ::socket(result->ai_family, result->ai_socktype, result->ai_protocol);
  const int rc = fd_ < 0 ? -1 : ::connect(fd_, result->ai_addr, result->ai_addrlen);
  ::freeaddrinfo(result);
  if (rc < 0) {
    const std::string err = std::strerror(errno);
    if (fd_ >= 0) ::close(fd_);
    fd_ = -1;
    throw ProtocolError("cannot connect to " + host + ":" + std::to_string(port) + ": " + err);
  }
  call({{{"type", "hello"}, {"version", version}}, {}});
}

RemoteEnv::~RemoteEnv() {
  if (fd_ >= 0) ::close(fd_);
}

Message RemoteEnv::call(const Message& request) {
  if (fd_ < 0) throw ProtocolError("connection is closed");
  FdStream stream(fd_, fd_);
  stream.write_message(request);
  std::optional<Message> response = stream.read_message();
  if (!response) throw ProtocolError("server closed the connection");
  if (!response->header.value("ok", false)) {
    throw ProtocolError("server error: " + response->header.value("error", std::string("(no message)")));
  }
  return std::move(*response);
}

RemoteSpec RemoteEnv::make(nlohmann::json request) {
  request["type"] = "make";
  const Message r = call({request, {}});
  try {
    spec_.task = r.header.at("task").get<std::string>();
    spec_.action_dim = r.header.at("action_dim").get<int>();
    spec_.action_repeat = r.header.at("action_repeat").get<int>();
    spec_.episode_steps = r.header.at("episode_steps").get<int>();
    spec_.image_size = {r.header.at("width").get<int>(), r.header.at("height").get<int>()};
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed spec response: ") + e.what());
  }
  return spec_;
}

TimeStep RemoteEnv::reset() { return decode_timestep(call({{{"type", "reset"}}, {}})); }

TimeStep RemoteEnv::step(const Eigen::VectorXd& action) {
  std::vector<double> values(action.data(), action.data() + action.size());
  return decode_timestep(call({{{"type", "step"}, {"action", values}}, {}}));
}

void RemoteEnv::close() {
  if (fd_ < 0) return;
  try {
    call({{{"type", "close"}}, {}});
  } catch (const ProtocolError&) {
  }
  ::close(fd_);
  fd_ = -1;
}

TimeStep decode_timestep(const Message& response) {
  TimeStep ts;
  int width = 0, height = 0, channels = 0;
  try {
    ts.reward = response.header.at("reward").get<double>();
    ts.discount = response.header.at("discount").get<double>();
    ts.first = response.header.value("first", false);
    ts.last = response.header.at("last").get<bool>();
    width = response.header.at("width").get<int>();
    height = response.header.at("height").get<int>();
    channels = response.header.at("channels").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("malformed timestep response: ") + e.what());
  }
  if (channels != Frame::kChannels || width <= 0 || height <= 0 ||
      response.payload.size() != static_cast<std::size_t>(width) * height * channels) {
    throw ProtocolError("timestep pixel payload has " + std::to_string(response.payload.size()) +
                        " bytes, header declares " + std::to_string(width) + "x" + std::to_string(height) + "x" +
                        std::to_string(channels));
  }
  ts.observation = Frame(width, height);
  ts.observation.data() = response.payload;
  return ts;
}

}  // namespace distraxion
