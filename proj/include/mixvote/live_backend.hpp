// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>

#include "mixvote/orchestrator.hpp"
#include "mixvote/tool_loop.hpp"

namespace mixvote {

struct LiveOptions {
    ToolLoopOptions tool_loop;
    /// Upper bound on any attempt's lifetime, from its start.
    double session_timeout_s = 960.0;
};

/// Runs each attempt's tool loop on its own thread. The chat model and the
/// sandbox are shared across attempts and must tolerate concurrent calls.
class LiveBackend final : public AttemptBackend {
public:
    LiveBackend(std::shared_ptr<ChatModel> model, std::shared_ptr<CodeSandbox> sandbox, StrategyPromptSet prompts,
                LiveOptions options = {});
    std::unique_ptr<AttemptHandle> start_attempt(const AttemptRequest& request) override;
    bool health_check() override;

private:
    std::shared_ptr<ChatModel> model_;
    std::shared_ptr<CodeSandbox> sandbox_;
    StrategyPromptSet prompts_;
    LiveOptions options_;
};

} // namespace mixvote
