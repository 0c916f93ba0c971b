// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "mixvote/budget.hpp"
#include "mixvote/contest.hpp"
#include "mixvote/sim.hpp"

namespace mixvote {

/// A simulation experiment: one voter model run under one or more mixers.
struct Scenario {
    std::string label = "scenario";
    std::uint64_t seed = 0;
    int replications = 1;
    int problems = 50;
    std::optional<std::string> preset;
    sim::VoterModel voter;
    std::vector<MixerConfig> mixers;
    VoteOptions vote;
    budget::BudgetConfig budget;

    /// Contest configuration for one of the mixers.
    [[nodiscard]] ContestConfig contest_config(const MixerConfig& mixer) const;
};

/// Parse or validation failure, formatted as "origin:line:column: message".
class ScenarioError : public std::runtime_error {
public:
    ScenarioError(const std::string& origin, int line, int column, const std::string& message);
    [[nodiscard]] int line() const noexcept { return line_; }

private:
    int line_;
};

/// Accepted keys:
///
///   label, seed, replications, problems
///   preset: gpt_oss_120b | qwen35_35b_a3b | nemotron_super_120b
///   voter:
///     accuracy: 0.69 | calibrated | {original: 0.69, small_cases: 0.67}
///     mechanism: independent | {common_shock: 0.3} | {fixed_count: 1}
///     cross_strategy_decorrelation, distractor_scatter, distractors: [..]
///     entropy: informative | flat
///     latency: {mean_s, jitter}
///     true_answer
///   mixer: {name, counts: {label: count}}
///   mixers: table | [{name, counts}, ...]
///   vote: {early_stop, quorum, trivial_max}
///   budget: {total_limit_s, ...}
///
/// A preset fills the original-strategy accuracy and an all-original mixer of
/// its size; explicit keys override it.
Scenario parse_scenario(std::string_view text, const std::string& origin = "<scenario>");

/// Throws ScenarioError, including for unreadable files (line 0).
Scenario load_scenario(const std::filesystem::path& path);

} // namespace mixvote
