#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <string>

#include "distraxion/protocol.hpp"

namespace distraxion {

struct RemoteSpec {
  std::string task;
  int action_dim = 0;
  int action_repeat = 0;
  int episode_steps = 0;
  Size image_size;
};

// Blocking TCP client for the environment protocol. One request in flight.
class RemoteEnv {
 public:
  // Connects and performs the hello handshake. Throws ProtocolError.
  RemoteEnv(const std::string& host, std::uint16_t port, int version = kProtocolVersion);
  ~RemoteEnv();
  RemoteEnv(const RemoteEnv&) = delete;
  RemoteEnv& operator=(const RemoteEnv&) = delete;

  // `request` carries the make fields; "type" is filled in.
  RemoteSpec make(nlohmann::json request);
  TimeStep reset();
  TimeStep step(const Eigen::VectorXd& action);
  void close();

  const RemoteSpec& spec() const { return spec_; }
  // Sends one message and returns the response; server errors raise ProtocolError.
  Message call(const Message& request);

 private:
  int fd_ = -1;
  RemoteSpec spec_;
};

// Decodes a timestep response. Throws ProtocolError on missing fields or a
// pixel payload whose size disagrees with width * height * channels.
TimeStep decode_timestep(const Message& response);

}  // namespace distraxion
