#pragma once

// Line-delimited JSON reward service.
//
// Request:  {"id": ..., "hypothesis": "...", "reference": "...", "rewards": ["treesim", ...]}
// Response: {"id": ..., "scores": {"treesim": 1.0, ...}, "total": 10.0}
//       or  {"id": ..., "error": "..."}   (id is null when the line is not a valid request)
//
// One response line per request line, in order. Errors never stop the loop.

#include <atomic>
#include <cerrno>
#include <cstring>
#include <istream>
#include <mutex>
#include <ostream>
#include <set>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <nlohmann/json.hpp>

#include "structeval/rewards.hpp"

namespace structeval {

inline std::string handle_reward_request(std::string_view line) {
  nlohmann::ordered_json resp;
  resp["id"] = nullptr;
  nlohmann::json req;
  try {
    req = nlohmann::json::parse(line);
  } catch (const nlohmann::json::parse_error&) {
    resp["error"] = "malformed JSON";
    return resp.dump();
  }
  if (!req.is_object()) {
    resp["error"] = "request must be a JSON object";
    return resp.dump();
  }
  if (auto it = req.find("id"); it != req.end()) resp["id"] = *it;
  try {
    auto str = [&](const char* key) {
      auto it = req.find(key);
      if (it == req.end() || !it->is_string()) throw ConfigError(std::string("missing string field \"") + key + "\"");
      return it->get<std::string>();
    };
    std::string hyp = str("hypothesis");
    std::string ref = str("reference");
    std::vector<std::string> names;
    auto rw = req.find("rewards");
    if (rw == req.end() || !rw->is_array()) throw ConfigError("missing array field \"rewards\"");
    for (const auto& n : *rw) {
      if (!n.is_string()) throw ConfigError("reward names must be strings");
      names.push_back(n.get<std::string>());
    }
    RewardSpec spec(std::move(names));
    auto b = score_reward_detailed(hyp, ref, spec);
    nlohmann::ordered_json scores = nlohmann::ordered_json::object();
    for (const auto& n : spec.components()) scores[n] = b.native.at(n);
    resp["scores"] = scores;
    resp["total"] = b.total;
  } catch (const Error& e) {
    resp["error"] = e.what();
  }
  return resp.dump();
}

// Serves until end of input. Returns the number of requests answered.
inline std::size_t serve_stream(std::istream& in, std::ostream& out) {
  std::size_t n = 0;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::is_blank(line)) continue;
    out << handle_reward_request(line) << '\n';
    out.flush();
    ++n;
  }
  return n;
}

// TCP transport: each connection is served sequentially on its own thread.
class TcpRewardServer {
 public:
  // Throws Error when the address cannot be bound.
  TcpRewardServer(const std::string& host, int port) {
    addrinfo hints{};
    hints.ai_family = AF_UNSPEC;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    std::string port_s = std::to_string(port);
    if (int rc = getaddrinfo(host.empty() ? nullptr : host.c_str(), port_s.c_str(), &hints, &res); rc != 0)
      throw Error("cannot resolve " + host + ": " + gai_strerror(rc));
    for (addrinfo* a = res; a; a = a->ai_next) {
      int fd = ::socket(a->ai_family, a->ai_socktype, a->ai_protocol);
      if (fd < 0) continue;
      int one = 1;
      ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
      if (::bind(fd, a->ai_addr, a->ai_addrlen) == 0 && ::listen(fd, 64) == 0) {
        listen_fd_ = fd;
        break;
      }
      ::close(fd);
    }
    freeaddrinfo(res);
    if (listen_fd_ < 0) throw Error("cannot bind " + host + ":" + port_s + ": " + std::strerror(errno));
  }

  TcpRewardServer(const TcpRewardServer&) = delete;
  TcpRewardServer& operator=(const TcpRewardServer&) = delete;

  ~TcpRewardServer() {
    stop();
    if (listen_fd_ >= 0) ::close(listen_fd_);
  }

  int port() const {
    sockaddr_storage ss{};
    socklen_t len = sizeof ss;
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&ss), &len);
    if (ss.ss_family == AF_INET6) return ntohs(reinterpret_cast<sockaddr_in6*>(&ss)->sin6_port);
    return ntohs(reinterpret_cast<sockaddr_in*>(&ss)->sin_port);
  }

  // Accepts until `stop_flag` becomes true or stop() is called.
  void run(const std::atomic<bool>& stop_flag) {
    while (!stop_flag && !stopping_) {
      pollfd p{listen_fd_, POLLIN, 0};
      int rc = ::poll(&p, 1, 100);
      if (rc <= 0) continue;
      int fd = ::accept(listen_fd_, nullptr, nullptr);
      if (fd < 0) continue;
      std::lock_guard lk(mu_);
      clients_.insert(fd);
      workers_.emplace_back([this, fd] { serve_client(fd); });
    }
    stop();
  }

  void stop() {
    stopping_ = true;
    {
      std::lock_guard lk(mu_);
      for (int fd : clients_) ::shutdown(fd, SHUT_RDWR);
    }
    std::vector<std::thread> ws;
    {
      std::lock_guard lk(mu_);
      ws.swap(workers_);
    }
    for (auto& w : ws)
      if (w.joinable()) w.join();
  }

 private:
  void serve_client(int fd) {
    std::string buf;
    char chunk[4096];
    bool open = true;
    while (open) {
      ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
      if (n <= 0) {
        open = false;
        if (!buf.empty()) buf.push_back('\n');
      } else {
        buf.append(chunk, static_cast<std::size_t>(n));
      }
      std::size_t start = 0, nl;
      std::string out;
      while ((nl = buf.find('\n', start)) != std::string::npos) {
        std::string_view line(buf.data() + start, nl - start);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (!text::is_blank(line)) {
          out += handle_reward_request(line);
          out += '\n';
        }
        start = nl + 1;
      }
      buf.erase(0, start);
      if (!send_all(fd, out)) open = false;
    }
    std::lock_guard lk(mu_);
    clients_.erase(fd);
    ::close(fd);
  }

  static bool send_all(int fd, const std::string& s) {
    std::size_t off = 0;
    while (off < s.size()) {
      ssize_t n = ::send(fd, s.data() + off, s.size() - off, MSG_NOSIGNAL);
      if (n <= 0) return false;
      off += static_cast<std::size_t>(n);
    }
    return true;
  }

  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::mutex mu_;
  std::set<int> clients_;
  std::vector<std::thread> workers_;
};

}  // namespace structeval
