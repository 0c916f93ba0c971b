// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "mixvote/tool_loop.hpp"

namespace mixvote {

struct SamplingParams {
    double temperature = 1.0;
    double min_p = 0.02;
    int top_logprobs = 5;
    /// 0 leaves max_tokens unset.
    int max_tokens = 0;
};

struct OpenAIConfig {
    /// e.g. http://127.0.0.1:8000/v1
    std::string base_url;
    std::string model = "gpt-oss-120b";
    std::string api_key;
    SamplingParams sampling;
    double request_timeout_s = 960.0;
    double connect_timeout_s = 5.0;
    bool stream = true;
};

/// Splits "http://host:port/prefix" into the origin and the path prefix
/// (without a trailing slash). Throws std::invalid_argument on other schemes.
std::pair<std::string, std::string> split_base_url(std::string_view url);

/// Chat-completions request body for `messages`, with the single `python`
/// code-execution tool.
nlohmann::json chat_request_body(const OpenAIConfig& config, const std::vector<ChatMessage>& messages,
                                 std::int64_t seed);

/// Accumulates a streamed (server-sent events) or plain JSON completion.
class CompletionAccumulator {
public:
    /// Feeds raw bytes of an event stream. Returns false once [DONE] is seen.
    bool feed_sse(std::string_view bytes);
    /// Applies a complete non-streamed response object.
    void apply_response(const nlohmann::json& response);
    [[nodiscard]] ChatTurn turn() const;

private:
    void apply_chunk(const nlohmann::json& chunk);

    std::string buffer_;
    std::string content_;
    std::vector<ToolCall> calls_;
    std::vector<std::string> arguments_;
    std::vector<TokenTopLogprobs> logprobs_;
    bool done_ = false;
};

/// Chat model speaking the OpenAI-compatible chat-completions protocol.
class OpenAIChatModel final : public ChatModel {
public:
    explicit OpenAIChatModel(OpenAIConfig config);
    ChatTurn complete(const std::vector<ChatMessage>& messages, std::int64_t seed, std::stop_token stop) override;
    /// GET {base}/models answers 200.
    bool health_check() override;

private:
    OpenAIConfig config_;
    std::string origin_;
    std::string prefix_;
};

} // namespace mixvote
