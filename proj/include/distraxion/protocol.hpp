#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "distraxion/env.hpp"

namespace distraxion {

// Wire format (all messages, both directions):
//   u32 big-endian payload length N
//   N payload bytes = UTF-8 JSON header, '\n', optional raw bytes
// Timestep responses append width * height * 3 bytes of row-major RGB.
inline constexpr int kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxMessageBytes = 64u << 20;

class ProtocolError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Message {
  nlohmann::json header;
  std::vector<std::uint8_t> payload;

  friend bool operator==(const Message&, const Message&) = default;
};

// Full frame including the 4-byte length prefix.
std::vector<std::uint8_t> encode_message(const Message& message);
// Decodes the bytes after the length prefix. Throws ProtocolError.
Message decode_payload(std::span<const std::uint8_t> payload);

// Blocking byte stream over a file descriptor (socket or pipe). Not owning.
class FdStream {
 public:
  FdStream(int read_fd, int write_fd) : read_fd_(read_fd), write_fd_(write_fd) {}

  // nullopt on clean EOF before any byte of a message; ProtocolError on a
  // truncated or oversized message.
  std::optional<Message> read_message();
  void write_message(const Message& message);

 private:
  // Returns bytes read; < n only at EOF.
  std::size_t read_exact(std::uint8_t* out, std::size_t n);

  int read_fd_;
  int write_fd_;
};

using EnvFactory = std::function<std::unique_ptr<Environment>(const nlohmann::json& make_request)>;

// Builds an environment from a make request:
//   {"type":"make","task":T,"preset":P,"dynamic":bool,"seed":u64}
// or with "config":{"beta_cam","beta_rgb","beta_bg","num_videos"} in place of
// "preset" (plus optional "camera_backwards"). Optional "width"/"height".
std::unique_ptr<Environment> default_env_factory(const nlohmann::json& make_request);

Message timestep_message(const TimeStep& ts);
Message error_message(const std::string& what);

// One connection's request/response state machine.
class Session {
 public:
  explicit Session(EnvFactory factory = default_env_factory) : factory_(std::move(factory)) {}

  // Returns the response; sets `close` when the connection must be closed
  // after sending it (errors, close requests).
  Message handle(const Message& request, bool& close);

 private:
  EnvFactory factory_;
  bool greeted_ = false;
  std::unique_ptr<Environment> env_;
};

// Runs a session until EOF, a close request or an error.
void run_session(FdStream& stream, const EnvFactory& factory);

}  // namespace distraxion
