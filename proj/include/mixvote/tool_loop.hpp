// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stop_token>
#include <string>
#include <vector>

#include "mixvote/voting.hpp"

namespace mixvote {

class Clock;

struct ToolCall {
    std::string id;
    std::string code;
};

struct ChatMessage {
    std::string role; // system, user, assistant, tool
    std::string content;
    std::vector<ToolCall> tool_calls;
    std::string tool_call_id;
};

/// One assistant turn as returned by the model.
struct ChatTurn {
    std::string content;
    std::vector<ToolCall> tool_calls;
    std::vector<TokenTopLogprobs> logprobs;
};

class ChatModel {
public:
    virtual ~ChatModel() = default;
    /// Throws on transport or protocol errors. Returns early (possibly with a
    /// partial turn) once `stop` is requested.
    virtual ChatTurn complete(const std::vector<ChatMessage>& messages, std::int64_t seed, std::stop_token stop) = 0;
    virtual bool health_check() { return true; }
};

enum class ExecStatus { ok, error, timeout };

struct ExecResult {
    std::string stdout_text;
    std::string stderr_text;
    ExecStatus status = ExecStatus::ok;
    double elapsed_s = 0.0;
    bool truncated = false;
};

/// Exclusive use of one sandbox worker; destruction releases it.
class SandboxLease {
public:
    virtual ~SandboxLease() = default;
    [[nodiscard]] virtual int worker_id() const = 0;
    virtual ExecResult execute(const std::string& code, double timeout_s) = 0;
    virtual void reset() = 0;
};

class CodeSandbox {
public:
    virtual ~CodeSandbox() = default;
    /// nullptr when no worker frees up within `timeout_s`.
    virtual std::unique_ptr<SandboxLease> acquire(double timeout_s) = 0;
};

struct ToolLoopOptions {
    int max_turns = 128;
    double acquire_timeout_s = 3.0;
    double exec_timeout_s = 6.0;
};

struct ToolLoopState {
    int turn_count = 0;
    std::vector<ChatMessage> transcript;
    std::optional<std::string> pending_code;
    std::optional<int> lease_worker;
};

struct ToolLoopResult {
    std::optional<int> answer;
    std::optional<double> entropy;
    AttemptStatus status = AttemptStatus::completed;
};

inline constexpr const char* kSandboxUnavailable = "Sandbox unavailable: no execution worker became free in time.";

/// Alternates model turns and code executions until a turn carries no tool
/// call, `max_turns` is reached, the deadline passes on `clock`, or `stop` is
/// requested. The answer is the last boxed integer of the final turn and the
/// entropy comes from that turn's logprobs.
ToolLoopResult run_tool_loop(ToolLoopState& state, ChatModel& model, CodeSandbox* sandbox, std::int64_t seed,
                             const Clock& clock, double deadline, std::stop_token stop,
                             const ToolLoopOptions& options = {});

/// Tool message body for an execution result.
std::string format_tool_output(const ExecResult& r, double timeout_s);

} // namespace mixvote
