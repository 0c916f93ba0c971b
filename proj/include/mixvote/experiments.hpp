// SPDX-License-Identifier: Apache-2.0
#pragma once

// Monte Carlo replication kernels. Each kernel has an OpenMP path and a
// serial reference path; both consume the same per-replication counter-based
// streams, so their outputs are identical element for element.

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "mixvote/contest.hpp"
#include "mixvote/sim.hpp"
#include "mixvote/stats.hpp"

namespace mixvote::sim {

enum class Exec { serial, parallel };

/// Calls fn(r) for r in [0, reps). Parallel mode distributes r across OpenMP
/// threads; the first exception thrown by any fn is rethrown after the loop.
void for_each_replication(int reps, Exec exec, const std::function<void(int)>& fn);

/// Seed of replication r.
std::uint64_t replication_seed(std::uint64_t seed, int r);

/// Scores of `reps` independent contests over `models`.
std::vector<int> replicate_scores(std::span<const VoterModel> models, const ContestConfig& config, int reps,
                                  Exec exec = Exec::parallel);

struct ScoreSummary {
    double mean = 0.0;
    double sigma = 0.0;
    /// Standard error of the mean.
    double se = 0.0;
    int contests = 0;
};

ScoreSummary summarize_scores(std::span<const int> scores);

struct MixerRow {
    std::string mixer;
    std::string counts;
    ScoreSummary summary;
};

/// Mean and spread of the contest score for each mixer. The template supplies
/// per-strategy accuracies, the correlation mechanism and the cross-strategy
/// decorrelation; `base` supplies budget and vote options.
std::vector<MixerRow> mixer_experiment(const VoterModel& tmpl, std::span<const MixerConfig> mixers,
                                       int contests_per_mixer, std::uint64_t seed, const ContestConfig& base,
                                       Exec exec = Exec::parallel);

struct CorrelationResult {
    double pooled_rho = 0.0;
    /// Single-run estimates of the runs whose p_hat is in (0, 1).
    std::vector<double> per_run_rho;
    std::vector<stats::RunCounts> runs;
    int excluded = 0;
};

/// Draws `runs` independent problems of `n` attempts using the first strategy
/// of `model` and estimates the pairwise correlation of correctness.
CorrelationResult correlation_experiment(const VoterModel& model, int n, int runs, std::uint64_t seed,
                                         Exec exec = Exec::parallel);

} // namespace mixvote::sim
