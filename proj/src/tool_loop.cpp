// SPDX-License-Identifier: Apache-2.0
#include "mixvote/tool_loop.hpp"

#include <fmt/format.h>

#include "mixvote/orchestrator.hpp"

namespace mixvote {

std::string format_tool_output(const ExecResult& r, double timeout_s)
{
    std::string out = r.stdout_text;
    if (!r.stderr_text.empty()) {
        if (!out.empty() && out.back() != '\n')
            out += '\n';
        out += r.stderr_text;
    }
    if (r.truncated)
        out += "\n[output truncated]";
    if (r.status == ExecStatus::timeout)
        out += fmt::format("\n[execution timed out after {:g} s]", timeout_s);
    if (out.empty())
        out = "[no output]";
    return out;
}

namespace {

void release(std::unique_ptr<SandboxLease>& lease, ToolLoopState& state)
{
    if (!lease)
        return;
    try {
        lease->reset();
    } catch (const std::exception&) {
    }
    lease.reset();
    state.lease_worker.reset();
}

} // namespace

ToolLoopResult run_tool_loop(ToolLoopState& state, ChatModel& model, CodeSandbox* sandbox, std::int64_t seed,
                             const Clock& clock, double deadline, std::stop_token stop,
                             const ToolLoopOptions& options)
{
    ToolLoopResult result;
    std::unique_ptr<SandboxLease> lease;
    struct Guard {
        std::unique_ptr<SandboxLease>& lease;
        ToolLoopState& state;
        ~Guard() { release(lease, state); }
    } guard{lease, state};

    auto interrupted = [&]() -> bool {
        if (stop.stop_requested()) {
            result.status = AttemptStatus::cancelled;
            return true;
        }
        if (clock.now() >= deadline) {
            result.status = AttemptStatus::timed_out;
            return true;
        }
        return false;
    };

    while (state.turn_count < options.max_turns) {
        if (interrupted())
            return result;
        ChatTurn turn = model.complete(state.transcript, seed, stop);
        if (interrupted())
            return result;
        ++state.turn_count;

        ChatMessage reply{"assistant", turn.content, turn.tool_calls, {}};
        state.transcript.push_back(reply);
        if (turn.tool_calls.empty()) {
            result.answer = extract_boxed_answer(turn.content);
            if (result.answer)
                result.entropy = attempt_entropy(turn.logprobs);
            return result;
        }

        for (const auto& call : turn.tool_calls) {
            if (interrupted())
                return result;
            state.pending_code = call.code;
            std::string body;
            if (!sandbox) {
                body = kSandboxUnavailable;
            } else {
                if (!lease) {
                    lease = sandbox->acquire(options.acquire_timeout_s);
                    if (lease)
                        state.lease_worker = lease->worker_id();
                }
                if (!lease) {
                    body = kSandboxUnavailable;
                } else {
                    try {
                        body = format_tool_output(lease->execute(call.code, options.exec_timeout_s),
                                                  options.exec_timeout_s);
                    } catch (const std::exception& e) {
                        body = std::string("Sandbox error: ") + e.what();
                        lease.reset();
                        state.lease_worker.reset();
                    }
                }
            }
            state.pending_code.reset();
            state.transcript.push_back({"tool", body, {}, call.id});
        }
    }
    return result;
}

} // namespace mixvote
