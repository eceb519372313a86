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


#include "fedgwas/net.h"

#include <arpa/inet.h>
#include <fcntl.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>
#include <string>
#include <utility>

#include "fedgwas/error.h"

namespace fedgwas::net {
namespace {

Error IoError(const std::string& what) {
  return Error(ErrorCode::kIo, what + ": " + std::strerror(errno));
}

sockaddr_in Resolve(const Address& addr) {
  sockaddr_in sa{};
  sa.sin_family = AF_INET;
  sa.sin_port = htons(addr.port);
  std::string host = addr.host.empty() ? "127.0.0.1" : addr.host;
  if (host == "localhost") host = "127.0.0.1";
  if (inet_pton(AF_INET, host.c_str(), &sa.sin_addr) == 1) return sa;

  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  addrinfo* res = nullptr;
  if (getaddrinfo(host.c_str(), nullptr, &hints, &res) != 0 || !res) {
    throw Error(ErrorCode::kIo, "cannot resolve host '" + host + "'");
  }
  sa.sin_addr = reinterpret_cast<sockaddr_in*>(res->ai_addr)->sin_addr;
  freeaddrinfo(res);
  return sa;
}

// Reads exactly out.size() bytes. Returns the number read before EOF.
std::size_t ReadFull(int fd, std::span<std::uint8_t> out) {
  std::size_t got = 0;
  while (got < out.size()) {
    ssize_t n = ::recv(fd, out.data() + got, out.size() - got, 0);
    if (n == 0) break;
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) {
        throw Error(ErrorCode::kTimeout, "receive timed out");
      }
      throw IoError("recv");
    }
    got += static_cast<std::size_t>(n);
  }
  return got;
}

}  // namespace

Address Address::Parse(std::string_view text) {
  auto colon = text.rfind(':');
  if (colon == std::string_view::npos) {
    throw InvalidArgument("address '" + std::string(text) +
                          "' must be host:port");
  }
  Address a;
  if (colon > 0) a.host = std::string(text.substr(0, colon));
  auto port = text.substr(colon + 1);
  unsigned value = 0;
  auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
  if (ec != std::errc() || ptr != port.data() + port.size() || value > 65535) {
    throw InvalidArgument("bad port in address '" + std::string(text) + "'");
  }
  a.port = static_cast<std::uint16_t>(value);
  return a;
}

std::string Address::ToString() const {
  return host + ":" + std::to_string(port);
}

Socket& Socket::operator=(Socket&& other) noexcept {
  if (this != &other) {
    Close();
    fd_ = other.release();
  }
  return *this;
}

int Socket::release() { return std::exchange(fd_, -1); }

void Socket::Close() {
  if (fd_ >= 0) ::close(std::exchange(fd_, -1));
}

Socket Connect(const Address& addr, Millis timeout) {
  sockaddr_in sa = Resolve(addr);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) throw IoError("socket");

  int flags = ::fcntl(s.fd(), F_GETFL, 0);
  ::fcntl(s.fd(), F_SETFL, flags | O_NONBLOCK);
  int rc = ::connect(s.fd(), reinterpret_cast<sockaddr*>(&sa), sizeof sa);
  if (rc < 0 && errno != EINPROGRESS) {
    throw IoError("connect to " + addr.ToString());
  }
  if (rc < 0) {
    pollfd p{s.fd(), POLLOUT, 0};
    int wait = timeout.count() > 0 ? static_cast<int>(timeout.count()) : -1;
    int ready = ::poll(&p, 1, wait);
    if (ready == 0) {
      throw Error(ErrorCode::kTimeout, "connect to " + addr.ToString() +
                                           " timed out");
    }
    int err = 0;
    socklen_t len = sizeof err;
    ::getsockopt(s.fd(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (ready < 0 || err != 0) {
      errno = err ? err : errno;
      throw IoError("connect to " + addr.ToString());
    }
  }
  ::fcntl(s.fd(), F_SETFL, flags);
  int one = 1;
  ::setsockopt(s.fd(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  SetTimeouts(s, timeout);
  return s;
}

void SetTimeouts(const Socket& s, Millis timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(s.fd(), SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof tv);
  ::setsockopt(s.fd(), SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof tv);
}

void SendFrame(const Socket& s, std::span<const std::uint8_t> frame) {
  std::size_t sent = 0;
  while (sent < frame.size()) {
    ssize_t n = ::send(s.fd(), frame.data() + sent, frame.size() - sent,
                       MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) {
        throw Error(ErrorCode::kTimeout, "send timed out");
      }
      throw IoError("send");
    }
    sent += static_cast<std::size_t>(n);
  }
}

Bytes RecvFrame(const Socket& s) {
  Bytes frame(protocol::kHeaderSize);
  std::size_t got = ReadFull(s.fd(), frame);
  if (got == 0) return {};
  if (got < frame.size()) {
    throw ProtocolError("connection closed inside a frame header");
  }
  auto header = protocol::ParseHeader(frame);
  frame.resize(protocol::kHeaderSize + header.payload_length);
  std::span<std::uint8_t> payload(frame.data() + protocol::kHeaderSize,
                                  header.payload_length);
  std::size_t body = ReadFull(s.fd(), payload);
  if (body < payload.size()) {
    throw ProtocolError("connection closed with " +
                        std::to_string(payload.size() - body) +
                        " payload bytes outstanding");
  }
  return frame;
}

Client::Client(Address server, std::string role, Millis timeout, FrameTap tap)
    : server_(std::move(server)),
      role_(std::move(role)),
      timeout_(timeout),
      tap_(std::move(tap)) {}

protocol::Message Client::Call(const protocol::Message& request) {
  Bytes frame = protocol::Encode(request);
  if (!socket_.valid()) socket_ = Connect(server_, timeout_);
  try {
    if (tap_) tap_(role_, frame);
    SendFrame(socket_, frame);
    Bytes reply = RecvFrame(socket_);
    if (reply.empty()) {
      throw Error(ErrorCode::kIo, "connection to " + server_.ToString() +
                                      " closed before a reply");
    }
    return protocol::Decode(reply);
  } catch (...) {
    socket_.Close();
    throw;
  }
}

FrameServer::FrameServer(std::string role, Handler handler, FrameTap tap)
    : role_(std::move(role)), handler_(std::move(handler)), tap_(std::move(tap)) {}

FrameServer::~FrameServer() { Stop(); }

void FrameServer::Start(const Address& listen) {
  sockaddr_in sa = Resolve(listen);
  Socket s(::socket(AF_INET, SOCK_STREAM | SOCK_CLOEXEC, 0));
  if (!s.valid()) throw IoError("socket");
  int one = 1;
  ::setsockopt(s.fd(), SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  if (::bind(s.fd(), reinterpret_cast<sockaddr*>(&sa), sizeof sa) < 0) {
    throw IoError("bind " + listen.ToString());
  }
  if (::listen(s.fd(), 64) < 0) throw IoError("listen");
  socklen_t len = sizeof sa;
  ::getsockname(s.fd(), reinterpret_cast<sockaddr*>(&sa), &len);
  bound_.host = listen.host.empty() ? "127.0.0.1" : listen.host;
  if (bound_.host == "0.0.0.0") bound_.host = "127.0.0.1";
  bound_.port = ntohs(sa.sin_port);
  listener_ = std::move(s);
  stopping_ = false;
  accept_thread_ = std::thread([this] { AcceptLoop(); });
}

void FrameServer::Stop() {
  if (stopping_.exchange(true)) return;
  if (accept_thread_.joinable()) accept_thread_.join();
  listener_.Close();
  std::vector<std::thread> workers;
  {
    std::lock_guard lock(mu_);
    for (int fd : open_fds_) ::shutdown(fd, SHUT_RDWR);
    workers.swap(workers_);
  }
  for (auto& t : workers) t.join();
}

void FrameServer::AcceptLoop() {
  while (!stopping_) {
    pollfd p{listener_.fd(), POLLIN, 0};
    int ready = ::poll(&p, 1, 50);
    if (ready <= 0) continue;
    int fd = ::accept4(listener_.fd(), nullptr, nullptr, SOCK_CLOEXEC);
    if (fd < 0) continue;
    int one = 1;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    std::lock_guard lock(mu_);
    if (stopping_) {
      ::close(fd);
      break;
    }
    open_fds_.push_back(fd);
    workers_.emplace_back([this, fd] { Serve(fd); });
  }
}

void FrameServer::Serve(int fd) {
  Socket s(fd);
  while (!stopping_) {
    protocol::Message reply;
    bool close_after = false;
    try {
      Bytes frame = RecvFrame(s);
      if (frame.empty()) break;
      protocol::Message request = protocol::Decode(frame);
      try {
        reply = handler_(request);
      } catch (const Error& e) {
        reply = protocol::ErrorMessage{e.code(), e.what(), ""};
      } catch (const std::exception& e) {
        reply = protocol::ErrorMessage{ErrorCode::kInternal, e.what(), ""};
      }
    } catch (const Error& e) {
      // Undecodable input or a broken connection: answer once if possible.
      if (e.code() == ErrorCode::kIo) break;
      reply = protocol::ErrorMessage{e.code(), e.what(), ""};
      close_after = true;
    }
    try {
      Bytes out = protocol::Encode(reply);
      if (tap_) tap_(role_, out);
      SendFrame(s, out);
    } catch (const Error&) {
      break;
    }
    if (close_after) break;
  }
  std::lock_guard lock(mu_);
  std::erase(open_fds_, fd);
}

}  // namespace fedgwas::net
