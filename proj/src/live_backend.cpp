// SPDX-License-Identifier: Apache-2.0
#include "mixvote/live_backend.hpp"

#include <mutex>
#include <thread>

namespace mixvote {

namespace {

class ThreadHandle final : public AttemptHandle {
public:
    ThreadHandle(std::shared_ptr<ChatModel> model, std::shared_ptr<CodeSandbox> sandbox,
                 std::vector<ChatMessage> opening, AttemptRequest request, LiveOptions options)
        : request_(std::move(request))
    {
        const double deadline = clock_.now() + std::min(request_.deadline_s, options.session_timeout_s);
        worker_ = std::jthread([this, model = std::move(model), sandbox = std::move(sandbox),
                                opening = std::move(opening), options, deadline](std::stop_token stop) {
            AttemptResult r;
            r.strategy = request_.strategy;
            r.seed = request_.seed;
            ToolLoopState state;
            state.transcript = opening;
            try {
                const auto out = run_tool_loop(state, *model, sandbox.get(), request_.seed, clock_, deadline, stop,
                                               options.tool_loop);
                r.status = out.status;
                if (out.status == AttemptStatus::completed) {
                    r.answer = out.answer;
                    r.entropy = out.entropy;
                }
            } catch (const std::exception&) {
                r.status = stop.stop_requested() ? AttemptStatus::cancelled : AttemptStatus::failed;
            }
            r.turns = state.turn_count;
            r.latency_s = clock_.now();
            std::lock_guard lock(mutex_);
            result_ = std::move(r);
        });
    }

    ~ThreadHandle() override
    {
        if (canceller_.joinable())
            canceller_.join();
        worker_.request_stop();
        if (worker_.joinable())
            worker_.join();
    }

    std::optional<AttemptResult> poll(double) override
    {
        std::lock_guard lock(mutex_);
        return result_;
    }

    // Stop callbacks can block on a connect in progress, so they run off the
    // coordinator thread.
    void cancel() override
    {
        if (!canceller_.joinable())
            canceller_ = std::jthread([this] { worker_.request_stop(); });
    }

private:
    AttemptRequest request_;
    SteadyClock clock_;
    std::mutex mutex_;
    std::optional<AttemptResult> result_;
    std::jthread worker_;
    std::jthread canceller_;
};

} // namespace

LiveBackend::LiveBackend(std::shared_ptr<ChatModel> model, std::shared_ptr<CodeSandbox> sandbox,
                         StrategyPromptSet prompts, LiveOptions options)
    : model_(std::move(model)), sandbox_(std::move(sandbox)), prompts_(std::move(prompts)), options_(options)
{
    if (!model_)
        throw std::invalid_argument("LiveBackend: no chat model");
}

std::unique_ptr<AttemptHandle> LiveBackend::start_attempt(const AttemptRequest& request)
{
    if (!request.problem)
        throw std::invalid_argument("LiveBackend: request without a problem");
    std::vector<ChatMessage> opening;
    const std::string& system = !request.system_prompt.empty() || !prompts_.has(request.strategy)
                                    ? request.system_prompt
                                    : prompts_.system_prompt(request.strategy);
    if (!system.empty())
        opening.push_back({"system", system, {}, {}});
    opening.push_back({"user", prompts_.user_message(request.problem->text), {}, {}});
    return std::make_unique<ThreadHandle>(model_, sandbox_, std::move(opening), request, options_);
}

bool LiveBackend::health_check()
{
    return model_->health_check();
}

} // namespace mixvote
