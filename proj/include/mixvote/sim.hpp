// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "mixvote/contest.hpp"
#include "mixvote/rng.hpp"
#include "mixvote/voting.hpp"

namespace mixvote::sim {

/// Every attempt is an independent Bernoulli(p).
struct Independent {
    bool operator==(const Independent&) const = default;
};

/// With probability rho the whole run copies one latent draw, otherwise all
/// attempts are independent. Pairwise correlation of correctness is rho.
struct CommonShock {
    double rho = 0.0;
    bool operator==(const CommonShock&) const = default;
};

/// Exactly `correct_per_run` attempts are correct, at uniformly random slots.
/// Produces negative pairwise correlation -1/(n-1).
struct FixedCount {
    int correct_per_run = 0;
    bool operator==(const FixedCount&) const = default;
};

using CorrelationMechanism = std::variant<Independent, CommonShock, FixedCount>;

/// Informative: correct attempts draw lower entropy than wrong ones.
/// Flat: every answered attempt reports the same entropy, so weighted voting
/// reduces to plurality.
enum class EntropyModel { informative, flat };

inline constexpr double kCorrectEntropyMean = 0.3;
inline constexpr double kWrongEntropyMean = 1.2;
inline constexpr double kEntropyLogSd = 0.25;
inline constexpr double kFlatEntropy = 0.5;

struct LatencyModel {
    double mean_s = 120.0;
    /// Coefficient of variation of the lognormal latency.
    double jitter = 0.5;
    bool operator==(const LatencyModel&) const = default;
};

/// Synthetic correlated-voter parameters for one problem.
struct VoterModel {
    std::vector<std::pair<std::string, double>> accuracy_by_strategy;
    CorrelationMechanism mechanism = Independent{};
    /// Probability that a strategy draws its own latent instead of the shared
    /// one in a shocked run. 0 means mixing strategies buys no decorrelation.
    double cross_strategy_decorrelation = 0.0;
    int distractor_scatter = 1;
    /// Explicit wrong answers; generated below the true answer when empty.
    std::vector<int> distractors;
    EntropyModel entropy = EntropyModel::informative;
    LatencyModel latency;
    int true_answer = 42;

    /// Accuracy of `strategy`; throws std::invalid_argument for unknown labels.
    [[nodiscard]] double accuracy(std::string_view strategy) const;
    [[nodiscard]] int distractor_at(int i) const;
    void validate(int n_total) const;
    bool operator==(const VoterModel&) const = default;
};

nlohmann::json to_json(const VoterModel& m);

/// Per-problem shared randomness.
struct ProblemLatent {
    bool shocked = false;
    /// Latent uniform each strategy compares against its accuracy when shocked,
    /// indexed like MixerConfig::counts_by_strategy.
    std::vector<double> shared_u;
    /// FixedCount only: which slots are correct.
    std::vector<bool> forced_correct;
};

/// The slice of ProblemLatent one attempt sees.
struct AttemptLatent {
    std::optional<double> shared_u;
    std::optional<bool> forced_correct;
};

AttemptLatent latent_for_slot(const ProblemLatent& latent, const MixerConfig& mixer, int slot);

rng::Stream problem_stream(std::uint64_t seed, std::size_t problem_index);
rng::Stream attempt_stream(std::uint64_t seed, std::size_t problem_index, std::int64_t attempt_seed);

ProblemLatent draw_problem_latent(const VoterModel& model, const MixerConfig& mixer, rng::Stream stream);

/// Draws one attempt. The result is always `completed` with an answer; the
/// caller decides timeouts and cancellation from the latency.
AttemptResult sample_attempt(const VoterModel& model, std::string_view strategy, const AttemptLatent& latent,
                             rng::Stream& stream, std::int64_t attempt_seed);

/// Draws every attempt of a problem in slot order.
std::vector<AttemptResult> sample_problem_attempts(const VoterModel& model, const MixerConfig& mixer,
                                                   std::uint64_t seed, std::size_t problem_index,
                                                   std::int64_t base_seed);

/// Runs the parallel-attempt / early-stop / vote stages in virtual time.
ProblemOutcome simulate_problem(const VoterModel& model, const MixerConfig& mixer, double budget_s,
                                std::uint64_t seed, std::size_t problem_index, const VoteOptions& vote = {},
                                std::int64_t base_seed = 42);

/// Sequential contest: allocate, simulate, advance, for every model.
RunRecord simulate_contest(std::span<const VoterModel> models, const ContestConfig& config);

/// `n_problems` copies of `tmpl` with distinct true answers.
std::vector<VoterModel> contest_models(const VoterModel& tmpl, int n_problems);

/// True answer of the i-th generated problem.
int generated_true_answer(std::size_t index);

// Strategies, mixers and model presets.

namespace strategy {
inline constexpr const char* original = "original";
inline constexpr const char* small_cases = "small_cases";
inline constexpr const char* work_backwards = "work_backwards";
inline constexpr const char* classify = "classify";
inline constexpr const char* code_first = "code_first";
inline constexpr const char* formalize_first = "formalize_first";
} // namespace strategy

/// Mixer rows in the order they are reported: baseline, conservative,
/// aggressive, equal.
std::vector<MixerConfig> table_mixers();

/// Leaderboard scores of each strategy run alone (8 attempts).
std::vector<std::pair<std::string, double>> isolated_strategy_scores();

/// Per-attempt accuracy of each strategy, by inverting its isolated score
/// through the binomial majority model.
std::vector<std::pair<std::string, double>> calibrated_strategy_accuracies(int n = 8, int n_problems = 50);

struct ModelPreset {
    std::string name;
    int n_attempts = 8;
    double p = 0.0;
    [[nodiscard]] int threshold() const noexcept { return n_attempts / 2 + 1; }
};

/// Cross-model (N, p) presets.
std::vector<ModelPreset> model_presets();
std::optional<ModelPreset> find_preset(std::string_view name);

} // namespace mixvote::sim
