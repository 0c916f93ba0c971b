// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace mixvote {

inline constexpr int kMinAnswer = 0;
inline constexpr int kMaxAnswer = 99999;

enum class AttemptStatus { completed, timed_out, cancelled, failed };

std::string_view to_string(AttemptStatus s) noexcept;
std::optional<AttemptStatus> parse_status(std::string_view s) noexcept;

/// Outcome of one inference attempt.
struct AttemptResult {
    std::optional<int> answer;
    std::optional<double> entropy; // nats
    AttemptStatus status = AttemptStatus::completed;
    double latency_s = 0.0;
    std::string strategy;
    std::int64_t seed = 0;
    int turns = 0;

    /// Checks the answer/entropy/status coupling; throws std::invalid_argument.
    void validate() const;
    bool operator==(const AttemptResult&) const = default;
};

struct TallyEntry {
    int answer = 0;
    int vote_count = 0;
    double total_weight = 0.0;
    std::vector<std::size_t> attempt_ids;
    bool operator==(const TallyEntry&) const = default;
};

/// Entries are kept sorted by answer value.
struct VoteTally {
    std::vector<TallyEntry> entries;

    [[nodiscard]] int total_votes() const noexcept;
    [[nodiscard]] bool empty() const noexcept { return entries.empty(); }
    bool operator==(const VoteTally&) const = default;
};

/// One decoding position: top-k (token, log-probability) alternatives.
using TokenTopLogprobs = std::vector<std::pair<std::string, double>>;

/// Weight assigned to a vote: 1 + 1/(entropy + 0.1), in (1, 11].
double entropy_weight(double entropy);

/// Mean per-token Shannon entropy (nats) after renormalising each position's
/// top-k probabilities. Empty input yields 0.
double attempt_entropy(std::span<const TokenTopLogprobs> tokens);

/// Entropy used when an answered attempt carries none.
inline constexpr double kNeutralEntropy = 1.0;

VoteTally tally(std::span<const AttemptResult> attempts);

/// Answer with the highest total weight; ties within 1e-9 go to the higher
/// vote count, then to the smaller answer. Empty tally yields 0.
int select_final(const VoteTally& t);

inline constexpr int kDefaultQuorum = 4;
inline constexpr int kDefaultTrivialMax = 1;

/// Returns an answer above trivial_max that has at least `quorum`
/// unweighted completed votes, if any.
std::optional<int> early_stop_check(std::span<const AttemptResult> attempts_so_far,
                                    int quorum = kDefaultQuorum,
                                    int trivial_max = kDefaultTrivialMax);

} // namespace mixvote
