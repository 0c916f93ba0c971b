// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixvote/budget.hpp"
#include "mixvote/voting.hpp"

namespace mixvote {

/// Strategy label -> attempt count, in assignment order (attempt slots are
/// filled label by label).
struct MixerConfig {
    std::string name;
    std::vector<std::pair<std::string, int>> counts_by_strategy;

    [[nodiscard]] int n_total() const noexcept;
    /// Strategy label of every attempt slot.
    [[nodiscard]] std::vector<std::string> slots() const;
    /// Index of each slot's strategy in counts_by_strategy.
    [[nodiscard]] std::vector<std::size_t> slot_strategy_index() const;
    /// "5+1+1+1" style summary.
    [[nodiscard]] std::string describe() const;
    void validate() const;
    bool operator==(const MixerConfig&) const = default;
};

MixerConfig single_strategy_mixer(std::string label, int n, std::string name = {});

struct VoteOptions {
    bool early_stop = true;
    int quorum = kDefaultQuorum;
    int trivial_max = kDefaultTrivialMax;
    bool operator==(const VoteOptions&) const = default;
};

/// Everything that shapes a contest run apart from the attempt source.
struct ContestConfig {
    std::string label;
    MixerConfig mixer;
    budget::BudgetConfig budget;
    VoteOptions vote;
    std::int64_t base_seed = 42;
    std::uint64_t seed = 0;
    int n_problems = 50;
    /// Free-form description of the attempt source (e.g. the voter model),
    /// carried into the config snapshot.
    nlohmann::json source = nullptr;

    [[nodiscard]] nlohmann::json to_json() const;
};

/// What solving one problem produced, before it is bound to a problem id.
struct ProblemOutcome {
    int final_answer = 0;
    std::vector<AttemptResult> attempts;
    VoteTally tally;
    double elapsed_s = 0.0;
    bool early_stopped = false;
    bool operator==(const ProblemOutcome&) const = default;
};

struct ProblemRecord {
    std::string problem_id;
    double allocation_s = 0.0;
    bool fallback = false;
    double elapsed_s = 0.0;
    std::vector<AttemptResult> attempts;
    VoteTally tally;
    int final_answer = 0;
    std::optional<int> answer_key;
    bool early_stopped = false;

    [[nodiscard]] std::optional<bool> correct() const
    {
        if (!answer_key)
            return std::nullopt;
        return final_answer == *answer_key;
    }
    bool operator==(const ProblemRecord&) const = default;
};

ProblemRecord make_problem_record(std::string problem_id, double allocation_s, std::optional<int> answer_key,
                                  ProblemOutcome outcome);
ProblemRecord make_fallback_record(std::string problem_id, std::optional<int> answer_key);

/// Full log of one contest run.
struct RunRecord {
    std::uint64_t seed = 0;
    std::string label;
    nlohmann::json config;
    std::vector<ProblemRecord> problems;
    double total_elapsed_s = 0.0;

    /// Number of problems whose final answer matches a known key.
    [[nodiscard]] int score() const noexcept;
    [[nodiscard]] bool all_keys_known() const noexcept;
    bool operator==(const RunRecord&) const = default;
};

/// Problem id used for the i-th problem of a generated contest.
std::string problem_id(std::size_t index);

/// FNV-1a 64 of the canonical JSON dump, as 16 hex digits.
std::string config_hash(const nlohmann::json& config);

} // namespace mixvote
