// SPDX-License-Identifier: Apache-2.0
#include "mixvote/voting.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace mixvote {

std::string_view to_string(AttemptStatus s) noexcept
{
    switch (s) {
    case AttemptStatus::completed: return "completed";
    case AttemptStatus::timed_out: return "timed_out";
    case AttemptStatus::cancelled: return "cancelled";
    case AttemptStatus::failed: return "failed";
    }
    return "failed";
}

std::optional<AttemptStatus> parse_status(std::string_view s) noexcept
{
    if (s == "completed") return AttemptStatus::completed;
    if (s == "timed_out") return AttemptStatus::timed_out;
    if (s == "cancelled") return AttemptStatus::cancelled;
    if (s == "failed") return AttemptStatus::failed;
    return std::nullopt;
}

void AttemptResult::validate() const
{
    if (answer && status != AttemptStatus::completed)
        throw std::invalid_argument("AttemptResult: answer present on a non-completed attempt");
    if (entropy && !answer)
        throw std::invalid_argument("AttemptResult: entropy without an answer");
    if (answer && (*answer < kMinAnswer || *answer > kMaxAnswer))
        throw std::invalid_argument("AttemptResult: answer outside [0, 99999]");
    if (entropy && !(*entropy >= 0.0))
        throw std::invalid_argument("AttemptResult: entropy must be non-negative");
}

int VoteTally::total_votes() const noexcept
{
    int n = 0;
    for (const auto& e : entries)
        n += e.vote_count;
    return n;
}

double entropy_weight(double entropy)
{
    if (!(entropy >= 0.0))
        throw std::invalid_argument("entropy_weight: entropy must be non-negative");
    return 1.0 + 1.0 / (entropy + 0.1);
}

double attempt_entropy(std::span<const TokenTopLogprobs> tokens)
{
    if (tokens.empty())
        return 0.0;

    double total = 0.0;
    for (const auto& dist : tokens) {
        if (dist.empty())
            throw std::invalid_argument("attempt_entropy: empty token distribution");
        double max_lp = -INFINITY;
        for (const auto& [tok, lp] : dist) {
            if (!std::isfinite(lp))
                throw std::invalid_argument("attempt_entropy: non-finite log-probability");
            max_lp = std::max(max_lp, lp);
        }
        // Renormalise in a shifted space for stability.
        double z = 0.0;
        for (const auto& [tok, lp] : dist)
            z += std::exp(lp - max_lp);
        double h = 0.0;
        for (const auto& [tok, lp] : dist) {
            const double q = std::exp(lp - max_lp) / z;
            if (q > 0.0)
                h -= q * std::log(q);
        }
        total += h;
    }
    return total / static_cast<double>(tokens.size());
}

VoteTally tally(std::span<const AttemptResult> attempts)
{
    std::map<int, TallyEntry> by_answer;
    for (std::size_t i = 0; i < attempts.size(); ++i) {
        const auto& a = attempts[i];
        if (a.status != AttemptStatus::completed || !a.answer)
            continue;
        auto& e = by_answer[*a.answer];
        e.answer = *a.answer;
        e.vote_count += 1;
        e.total_weight += entropy_weight(a.entropy.value_or(kNeutralEntropy));
        e.attempt_ids.push_back(i);
    }
    VoteTally t;
    t.entries.reserve(by_answer.size());
    for (auto& [answer, entry] : by_answer)
        t.entries.push_back(std::move(entry));
    return t;
}

int select_final(const VoteTally& t)
{
    constexpr double kWeightTie = 1e-9;
    const TallyEntry* best = nullptr;
    for (const auto& e : t.entries) {
        if (!best) {
            best = &e;
            continue;
        }
        const double dw = e.total_weight - best->total_weight;
        if (dw > kWeightTie) {
            best = &e;
        } else if (std::abs(dw) <= kWeightTie) {
            if (e.vote_count > best->vote_count
                || (e.vote_count == best->vote_count && e.answer < best->answer))
                best = &e;
        }
    }
    return best ? best->answer : 0;
}

std::optional<int> early_stop_check(std::span<const AttemptResult> attempts_so_far, int quorum, int trivial_max)
{
    if (quorum < 1)
        throw std::invalid_argument("early_stop_check: quorum must be >= 1");
    std::map<int, int> counts;
    for (const auto& a : attempts_so_far) {
        if (a.status != AttemptStatus::completed || !a.answer || *a.answer <= trivial_max)
            continue;
        if (++counts[*a.answer] >= quorum)
            return *a.answer;
    }
    return std::nullopt;
}

} // namespace mixvote
