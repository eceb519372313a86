// Copyright 2026 The fedgwas Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


// Blocking TCP transport for protocol frames.
//
// Every node is a FrameServer: it accepts connections and answers each
// request frame with exactly one response frame. Clients hold one
// connection and issue calls sequentially.

#ifndef FEDGWAS_NET_H_
#define FEDGWAS_NET_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "fedgwas/protocol.h"

namespace fedgwas::net {

struct Address {
  std::string host = "127.0.0.1";
  std::uint16_t port = 0;

  // Accepts "host:port" and ":port".
  static Address Parse(std::string_view text);
  std::string ToString() const;
  friend bool operator==(const Address&, const Address&) = default;
};

// Observes every frame a node sends, tagged with the sender's role.
using FrameTap =
    std::function<void(std::string_view sender, std::span<const std::uint8_t>)>;

using Millis = std::chrono::milliseconds;

class Socket {
 public:
  Socket() = default;
  explicit Socket(int fd) : fd_(fd) {}
  Socket(Socket&& other) noexcept : fd_(other.release()) {}
  Socket& operator=(Socket&& other) noexcept;
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  ~Socket() { Close(); }

  int fd() const { return fd_; }
  bool valid() const { return fd_ >= 0; }
  int release();
  void Close();

 private:
  int fd_ = -1;
};

Socket Connect(const Address& addr, Millis timeout);

// Applies receive and send timeouts; zero disables them.
void SetTimeouts(const Socket& s, Millis timeout);

// Writes one frame. Throws Error(kIo) on failure.
void SendFrame(const Socket& s, std::span<const std::uint8_t> frame);
// Reads one frame. Returns an empty vector on orderly EOF before the first
// byte; Error(kTimeout) on SO_RCVTIMEO expiry, ProtocolError on a bad
// header or short payload.
Bytes RecvFrame(const Socket& s);

class Client {
 public:
  Client(Address server, std::string role, Millis timeout,
         FrameTap tap = nullptr);

  // Sends one request and waits for its response, reconnecting first if the
  // previous call broke the connection.
  protocol::Message Call(const protocol::Message& request);
  void Close() { socket_.Close(); }

 private:
  Address server_;
  std::string role_;
  Millis timeout_;
  FrameTap tap_;
  Socket socket_;
};

class FrameServer {
 public:
  using Handler = std::function<protocol::Message(const protocol::Message&)>;

  FrameServer(std::string role, Handler handler, FrameTap tap = nullptr);
  ~FrameServer();
  FrameServer(const FrameServer&) = delete;
  FrameServer& operator=(const FrameServer&) = delete;

  // Binds (port 0 picks a free port) and starts the accept loop.
  void Start(const Address& listen);
  // Stops accepting, shuts down open connections and joins all threads.
  void Stop();
  // Address actually bound, valid after Start.
  const Address& address() const { return bound_; }

 private:
  void AcceptLoop();
  void Serve(int fd);

  std::string role_;
  Handler handler_;
  FrameTap tap_;
  Address bound_;
  Socket listener_;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex mu_;
  std::vector<int> open_fds_;
  std::vector<std::thread> workers_;
};

}  // namespace fedgwas::net

#endif  // FEDGWAS_NET_H_
