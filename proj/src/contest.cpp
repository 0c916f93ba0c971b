// SPDX-License-Identifier: Apache-2.0
#include "mixvote/contest.hpp"

#include <stdexcept>

#include <fmt/format.h>

namespace mixvote {

int MixerConfig::n_total() const noexcept
{
    int n = 0;
    for (const auto& [label, count] : counts_by_strategy)
        n += count;
    return n;
}

std::vector<std::string> MixerConfig::slots() const
{
    std::vector<std::string> out;
    out.reserve(static_cast<std::size_t>(n_total()));
    for (const auto& [label, count] : counts_by_strategy)
        for (int i = 0; i < count; ++i)
            out.push_back(label);
    return out;
}

std::vector<std::size_t> MixerConfig::slot_strategy_index() const
{
    std::vector<std::size_t> out;
    for (std::size_t s = 0; s < counts_by_strategy.size(); ++s)
        for (int i = 0; i < counts_by_strategy[s].second; ++i)
            out.push_back(s);
    return out;
}

std::string MixerConfig::describe() const
{
    std::string out;
    for (const auto& [label, count] : counts_by_strategy) {
        if (!out.empty())
            out += '+';
        out += std::to_string(count);
    }
    return out;
}

void MixerConfig::validate() const
{
    for (const auto& [label, count] : counts_by_strategy) {
        if (label.empty())
            throw std::invalid_argument("MixerConfig: empty strategy label");
        if (count < 0)
            throw std::invalid_argument("MixerConfig: negative count for '" + label + "'");
    }
    for (std::size_t i = 0; i < counts_by_strategy.size(); ++i)
        for (std::size_t j = i + 1; j < counts_by_strategy.size(); ++j)
            if (counts_by_strategy[i].first == counts_by_strategy[j].first)
                throw std::invalid_argument("MixerConfig: duplicate label '" + counts_by_strategy[i].first + "'");
    if (n_total() < 1)
        throw std::invalid_argument("MixerConfig: n_total must be >= 1");
}

MixerConfig single_strategy_mixer(std::string label, int n, std::string name)
{
    MixerConfig m;
    m.name = name.empty() ? label : std::move(name);
    m.counts_by_strategy.emplace_back(std::move(label), n);
    return m;
}

nlohmann::json ContestConfig::to_json() const
{
    auto mix = nlohmann::json::array();
    for (const auto& [label, count] : mixer.counts_by_strategy)
        mix.push_back({{"strategy", label}, {"count", count}});
    nlohmann::json j;
    j["label"] = label;
    j["mixer"] = {{"name", mixer.name}, {"counts", mix}};
    j["budget"] = {
        {"total_limit_s", budget.total_limit},         {"infra_reserve_s", budget.infra_reserve},
        {"startup_reserve_s", budget.startup_reserve}, {"base_timeout_s", budget.base_timeout},
        {"max_timeout_s", budget.max_timeout},         {"session_timeout_s", budget.session_timeout},
        {"hard_deadline_floor_s", budget.hard_deadline_floor},
    };
    j["vote"] = {{"early_stop", vote.early_stop}, {"quorum", vote.quorum}, {"trivial_max", vote.trivial_max}};
    j["base_seed"] = base_seed;
    j["seed"] = seed;
    j["n_problems"] = n_problems;
    j["source"] = source;
    return j;
}

ProblemRecord make_problem_record(std::string problem_id, double allocation_s, std::optional<int> answer_key,
                                  ProblemOutcome outcome)
{
    ProblemRecord r;
    r.problem_id = std::move(problem_id);
    r.allocation_s = allocation_s;
    r.fallback = false;
    r.elapsed_s = outcome.elapsed_s;
    r.attempts = std::move(outcome.attempts);
    r.tally = std::move(outcome.tally);
    r.final_answer = outcome.final_answer;
    r.answer_key = answer_key;
    r.early_stopped = outcome.early_stopped;
    return r;
}

ProblemRecord make_fallback_record(std::string problem_id, std::optional<int> answer_key)
{
    ProblemRecord r;
    r.problem_id = std::move(problem_id);
    r.fallback = true;
    r.final_answer = 0;
    r.answer_key = answer_key;
    return r;
}

int RunRecord::score() const noexcept
{
    int s = 0;
    for (const auto& p : problems)
        if (p.answer_key && p.final_answer == *p.answer_key)
            ++s;
    return s;
}

bool RunRecord::all_keys_known() const noexcept
{
    for (const auto& p : problems)
        if (!p.answer_key)
            return false;
    return true;
}

std::string problem_id(std::size_t index)
{
    return fmt::format("p{:03d}", index);
}

std::string config_hash(const nlohmann::json& config)
{
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : config.dump()) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return fmt::format("{:016x}", h);
}

} // namespace mixvote
