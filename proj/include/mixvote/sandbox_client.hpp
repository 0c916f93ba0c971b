// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <memory>
#include <string>

#include <nlohmann/json.hpp>

#include "mixvote/tool_loop.hpp"

namespace mixvote {

/// Blocking newline-delimited JSON connection over TCP.
class LineSocket {
public:
    LineSocket(const std::string& host, int port, double connect_timeout_s);
    ~LineSocket();
    LineSocket(const LineSocket&) = delete;
    LineSocket& operator=(const LineSocket&) = delete;

    void send_json(const nlohmann::json& j);
    /// Throws std::runtime_error on timeout or a closed connection.
    nlohmann::json read_json(double timeout_s);

private:
    int fd_ = -1;
    std::string buffer_;
};

/// Client for the sandbox worker pool. Every lease holds its own connection:
/// acquire, then exec requests, reset and release on that connection.
///
///   -> {"op":"acquire","timeout_s":3}
///   <- {"op":"acquire","status":"ok","worker":3} | {"op":"acquire","status":"timeout"}
///   -> {"id":"1","code":"print(6*7)","timeout_s":6}
///   <- {"id":"1","stdout":"42\n","stderr":"","status":"ok","elapsed_s":0.01,"truncated":false}
///   -> {"op":"reset"}    <- {"op":"reset","status":"ok"}
///   -> {"op":"release"}  (connection closed afterwards)
class SandboxClient final : public CodeSandbox {
public:
    SandboxClient(std::string host, int port);
    std::unique_ptr<SandboxLease> acquire(double timeout_s) override;

private:
    std::string host_;
    int port_;
    std::atomic<std::uint64_t> next_id_{1};
};

/// Parses "host:port".
std::pair<std::string, int> parse_host_port(const std::string& spec);

} // namespace mixvote
