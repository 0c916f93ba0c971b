// SPDX-License-Identifier: Apache-2.0
#include "mixvote/experiments.hpp"

#include <cmath>
#include <exception>
#include <mutex>
#include <stdexcept>

#include <omp.h>

namespace mixvote::sim {

namespace {
constexpr int kContestProblems = 50;
}

void for_each_replication(int reps, Exec exec, const std::function<void(int)>& fn)
{
    if (reps < 0)
        throw std::invalid_argument("for_each_replication: negative replication count");
    if (exec == Exec::serial) {
        for (int r = 0; r < reps; ++r)
            fn(r);
        return;
    }

    std::exception_ptr first_error;
    std::mutex error_mutex;
#pragma omp parallel for schedule(dynamic, 16)
    for (int r = 0; r < reps; ++r) {
        try {
            fn(r);
        } catch (...) {
            std::lock_guard lock(error_mutex);
            if (!first_error)
                first_error = std::current_exception();
        }
    }
    if (first_error)
        std::rethrow_exception(first_error);
}

std::uint64_t replication_seed(std::uint64_t seed, int r)
{
    return rng::derive_seed(seed, static_cast<std::uint64_t>(r));
}

std::vector<int> replicate_scores(std::span<const VoterModel> models, const ContestConfig& config, int reps,
                                  Exec exec)
{
    std::vector<int> scores(static_cast<std::size_t>(std::max(0, reps)));
    for_each_replication(reps, exec, [&](int r) {
        ContestConfig c = config;
        c.seed = replication_seed(config.seed, r);
        scores[static_cast<std::size_t>(r)] = simulate_contest(models, c).score();
    });
    return scores;
}

ScoreSummary summarize_scores(std::span<const int> scores)
{
    ScoreSummary s;
    s.contests = static_cast<int>(scores.size());
    if (scores.empty())
        return s;
    if (scores.size() == 1) {
        s.mean = scores.front();
        return s;
    }
    const auto d = stats::summarize_runs(scores);
    s.mean = d.mu;
    s.sigma = d.sigma;
    s.se = d.sigma / std::sqrt(static_cast<double>(scores.size()));
    return s;
}

std::vector<MixerRow> mixer_experiment(const VoterModel& tmpl, std::span<const MixerConfig> mixers,
                                       int contests_per_mixer, std::uint64_t seed, const ContestConfig& base,
                                       Exec exec)
{
    const auto models = contest_models(tmpl, kContestProblems);
    std::vector<MixerRow> rows;
    rows.reserve(mixers.size());
    for (std::size_t i = 0; i < mixers.size(); ++i) {
        ContestConfig c = base;
        c.mixer = mixers[i];
        c.seed = rng::derive_seed(seed, 0x4D49580000ULL + i);
        const auto scores = replicate_scores(models, c, contests_per_mixer, exec);
        rows.push_back({mixers[i].name, mixers[i].describe(), summarize_scores(scores)});
    }
    return rows;
}

CorrelationResult correlation_experiment(const VoterModel& model, int n, int runs, std::uint64_t seed, Exec exec)
{
    if (runs < 1)
        throw std::invalid_argument("correlation_experiment: need at least one run");
    if (n < 2)
        throw std::invalid_argument("correlation_experiment: need at least two attempts per run");
    const auto mixer = single_strategy_mixer(model.accuracy_by_strategy.at(0).first, n);
    model.validate(n);

    CorrelationResult result;
    result.runs.resize(static_cast<std::size_t>(runs));
    for_each_replication(runs, exec, [&](int r) {
        const auto attempts = sample_problem_attempts(model, mixer, seed, static_cast<std::size_t>(r), 42);
        int correct = 0;
        for (const auto& a : attempts)
            if (a.answer == model.true_answer)
                ++correct;
        result.runs[static_cast<std::size_t>(r)] = {n, correct};
    });

    for (const auto& rc : result.runs) {
        if (rc.correct_votes == 0 || rc.correct_votes == rc.n) {
            ++result.excluded;
            continue;
        }
        result.per_run_rho.push_back(stats::mom_rho(rc.n, rc.correct_votes).rho_hat);
    }
    if (result.excluded == runs)
        throw stats::UndefinedEstimate("correlation_experiment: every run is degenerate");
    result.pooled_rho = stats::pooled_rho(result.runs);
    return result;
}

} // namespace mixvote::sim
