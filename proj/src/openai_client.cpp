// SPDX-License-Identifier: Apache-2.0
#include "mixvote/openai_client.hpp"

#include <cmath>
#include <stdexcept>

#include <httplib.h>

namespace mixvote {

namespace {

constexpr const char* kToolName = "python";

nlohmann::json tool_schema()
{
    return nlohmann::json::array({{
        {"type", "function"},
        {"function",
         {
             {"name", kToolName},
             {"description", "Execute Python code in a persistent sandbox with math, numpy, sympy and mpmath. "
                             "Returns captured stdout and stderr."},
             {"parameters",
              {{"type", "object"},
               {"properties", {{"code", {{"type", "string"}, {"description", "Python source to run"}}}}},
               {"required", {"code"}}}},
         }},
    }});
}

std::string code_from_arguments(const std::string& arguments)
{
    const auto j = nlohmann::json::parse(arguments, nullptr, false);
    if (j.is_object() && j.contains("code") && j["code"].is_string())
        return j["code"].get<std::string>();
    return arguments;
}

std::pair<time_t, time_t> split_seconds(double s)
{
    const double whole = std::floor(std::max(0.0, s));
    return {static_cast<time_t>(whole), static_cast<time_t>((s - whole) * 1e6)};
}

void configure(httplib::Client& cli, const OpenAIConfig& config, double read_timeout)
{
    const auto [cs, cus] = split_seconds(config.connect_timeout_s);
    const auto [rs, rus] = split_seconds(read_timeout);
    cli.set_connection_timeout(cs, cus);
    cli.set_read_timeout(rs, rus);
    cli.set_write_timeout(rs, rus);
    if (!config.api_key.empty())
        cli.set_bearer_token_auth(config.api_key);
}

} // namespace

std::pair<std::string, std::string> split_base_url(std::string_view url)
{
    constexpr std::string_view scheme = "http://";
    if (url.substr(0, scheme.size()) != scheme)
        throw std::invalid_argument("backend URL must start with http://");
    const auto slash = url.find('/', scheme.size());
    std::string origin(url.substr(0, slash));
    std::string prefix = slash == std::string_view::npos ? std::string{} : std::string(url.substr(slash));
    while (!prefix.empty() && prefix.back() == '/')
        prefix.pop_back();
    if (origin.size() == scheme.size())
        throw std::invalid_argument("backend URL has no host");
    return {origin, prefix};
}

nlohmann::json chat_request_body(const OpenAIConfig& config, const std::vector<ChatMessage>& messages,
                                 std::int64_t seed)
{
    auto msgs = nlohmann::json::array();
    for (const auto& m : messages) {
        nlohmann::json j{{"role", m.role}, {"content", m.content}};
        if (!m.tool_calls.empty()) {
            auto calls = nlohmann::json::array();
            for (const auto& c : m.tool_calls)
                calls.push_back({{"id", c.id},
                                 {"type", "function"},
                                 {"function", {{"name", kToolName}, {"arguments", nlohmann::json{{"code", c.code}}.dump()}}}});
            j["tool_calls"] = calls;
        }
        if (m.role == "tool")
            j["tool_call_id"] = m.tool_call_id;
        msgs.push_back(std::move(j));
    }
    nlohmann::json body{
        {"model", config.model},
        {"messages", msgs},
        {"temperature", config.sampling.temperature},
        {"min_p", config.sampling.min_p},
        {"seed", seed},
        {"logprobs", true},
        {"top_logprobs", config.sampling.top_logprobs},
        {"tools", tool_schema()},
        {"stream", config.stream},
    };
    if (config.sampling.max_tokens > 0)
        body["max_tokens"] = config.sampling.max_tokens;
    return body;
}

bool CompletionAccumulator::feed_sse(std::string_view bytes)
{
    buffer_.append(bytes);
    std::size_t pos;
    while (!done_ && (pos = buffer_.find('\n')) != std::string::npos) {
        std::string line = buffer_.substr(0, pos);
        buffer_.erase(0, pos + 1);
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.rfind("data:", 0) != 0)
            continue; // comments, event names, blank separators
        std::string_view data(line);
        data.remove_prefix(5);
        while (!data.empty() && data.front() == ' ')
            data.remove_prefix(1);
        if (data == "[DONE]") {
            done_ = true;
            break;
        }
        apply_chunk(nlohmann::json::parse(data));
    }
    return !done_;
}

void CompletionAccumulator::apply_chunk(const nlohmann::json& chunk)
{
    if (chunk.contains("error"))
        throw std::runtime_error("backend error: " + chunk["error"].dump());
    const auto& choices = chunk.value("choices", nlohmann::json::array());
    if (choices.empty())
        return;
    const auto& choice = choices[0];
    const nlohmann::json delta = choice.contains("delta") ? choice["delta"] : choice.value("message", nlohmann::json::object());
    if (delta.contains("content") && delta["content"].is_string())
        content_ += delta["content"].get<std::string>();
    if (delta.contains("tool_calls") && delta["tool_calls"].is_array()) {
        std::size_t fallback_index = calls_.size();
        for (const auto& tc : delta["tool_calls"]) {
            const std::size_t idx = tc.contains("index") ? tc["index"].get<std::size_t>() : fallback_index++;
            if (idx >= calls_.size()) {
                calls_.resize(idx + 1);
                arguments_.resize(idx + 1);
            }
            if (tc.contains("id") && tc["id"].is_string())
                calls_[idx].id = tc["id"].get<std::string>();
            if (tc.contains("function")) {
                const auto& fn = tc["function"];
                if (fn.contains("arguments") && fn["arguments"].is_string())
                    arguments_[idx] += fn["arguments"].get<std::string>();
            }
        }
    }
    if (choice.contains("logprobs") && choice["logprobs"].is_object()) {
        const auto& lp = choice["logprobs"];
        if (lp.contains("content") && lp["content"].is_array())
            for (const auto& tok : lp["content"]) {
                TokenTopLogprobs top;
                if (tok.contains("top_logprobs") && tok["top_logprobs"].is_array() && !tok["top_logprobs"].empty())
                    for (const auto& alt : tok["top_logprobs"])
                        top.emplace_back(alt.value("token", std::string{}), alt.at("logprob").get<double>());
                else
                    top.emplace_back(tok.value("token", std::string{}), tok.at("logprob").get<double>());
                logprobs_.push_back(std::move(top));
            }
    }
}

void CompletionAccumulator::apply_response(const nlohmann::json& response)
{
    apply_chunk(response);
    done_ = true;
}

ChatTurn CompletionAccumulator::turn() const
{
    ChatTurn t;
    t.content = content_;
    t.logprobs = logprobs_;
    for (std::size_t i = 0; i < calls_.size(); ++i) {
        ToolCall c = calls_[i];
        if (c.id.empty())
            c.id = "call_" + std::to_string(i);
        c.code = code_from_arguments(arguments_[i]);
        t.tool_calls.push_back(std::move(c));
    }
    return t;
}

OpenAIChatModel::OpenAIChatModel(OpenAIConfig config) : config_(std::move(config))
{
    std::tie(origin_, prefix_) = split_base_url(config_.base_url);
}

ChatTurn OpenAIChatModel::complete(const std::vector<ChatMessage>& messages, std::int64_t seed,
                                   std::stop_token stop)
{
    httplib::Client cli(origin_);
    configure(cli, config_, config_.request_timeout_s);
    std::stop_callback on_stop(stop, [&cli] { cli.stop(); });

    CompletionAccumulator acc;
    std::string plain;
    httplib::Request req;
    httplib::Response res;
    req.method = "POST";
    req.path = prefix_ + "/chat/completions";
    req.body = chat_request_body(config_, messages, seed).dump();
    req.set_header("Content-Type", "application/json");
    req.set_header("Accept", config_.stream ? "text/event-stream" : "application/json");
    bool streaming = false;
    req.content_receiver = [&](const char* data, std::size_t n, std::uint64_t, std::uint64_t) {
        if (stop.stop_requested())
            return false;
        if (res.status != 200) {
            plain.append(data, n);
            return true;
        }
        streaming = streaming || res.get_header_value("Content-Type").find("text/event-stream") != std::string::npos;
        if (!streaming) {
            plain.append(data, n);
            return true;
        }
        return acc.feed_sse(std::string_view(data, n));
    };

    if (stop.stop_requested())
        return {};
    httplib::Error err = httplib::Error::Success;
    const bool ok = cli.send(req, res, err);
    if (stop.stop_requested())
        return acc.turn();
    if (!ok && !(err == httplib::Error::Canceled && streaming))
        throw std::runtime_error("chat request failed: " + httplib::to_string(err));
    if (res.status != 200)
        throw std::runtime_error("chat request returned HTTP " + std::to_string(res.status) + ": " + plain.substr(0, 200));
    if (!streaming)
        acc.apply_response(nlohmann::json::parse(plain));
    return acc.turn();
}

bool OpenAIChatModel::health_check()
{
    try {
        httplib::Client cli(origin_);
        configure(cli, config_, std::min(config_.request_timeout_s, 10.0));
        const auto res = cli.Get(prefix_ + "/models");
        return res && res->status == 200;
    } catch (const std::exception&) {
        return false;
    }
}

} // namespace mixvote
