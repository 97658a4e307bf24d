#pragma once

#include <atomic>
#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "distraxion/protocol.hpp"

namespace distraxion {

// TCP server: one thread and one environment per connection.
class Server {
 public:
  // port 0 binds an ephemeral port; see port().
  Server(const std::string& bind_address, std::uint16_t port, EnvFactory factory = default_env_factory);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  std::uint16_t port() const { return port_; }
  void start();
  // Blocks until stop() is called.
  void wait();
  void stop();

 private:
  void accept_loop();

  EnvFactory factory_;
  int listen_fd_ = -1;
  std::uint16_t port_ = 0;
  std::atomic<bool> running_{false};
  std::thread acceptor_;
  std::mutex mutex_;
  std::vector<std::thread> workers_;
  std::vector<int> client_fds_;
};

std::unique_ptr<Server> serve(const std::string& bind_address, std::uint16_t port,
                              EnvFactory factory = default_env_factory);

// Single session over stdin/stdout, for subprocess embedding.
void serve_stdio(const EnvFactory& factory = default_env_factory);

}  // namespace distraxion
