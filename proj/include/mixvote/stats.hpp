// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

namespace mixvote::stats {

/// Raised when a correlation estimate is undefined (all-correct or all-wrong runs).
class UndefinedEstimate : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

struct CorrelationEstimate {
    int n_attempts = 0;
    int correct_votes = 0;
    double rho_hat = 0.0;
    double p_hat = 0.0;
};

/// Majority-vote score model: a problem is solved when at least `threshold`
/// of `n` Bernoulli(p) attempts are correct.
struct ScoreModel {
    double p = 0.0;
    int n = 8;
    int threshold = 5;
    int n_problems = 50;

    void validate() const;
    [[nodiscard]] double expected_score() const;
};

/// Default majority threshold, floor(n/2) + 1.
constexpr int majority_threshold(int n) noexcept { return n / 2 + 1; }

struct RunDistribution {
    std::vector<int> scores;
    double mu = 0.0;
    double sigma = 0.0;
    int min = 0;
    int max = 0;
};

/// n / (1 + (n-1) rho). Throws std::domain_error outside the exchangeable
/// feasible region (denominator <= 0).
double effective_sample_size(int n, double rho);

/// Single-run method-of-moments estimate of pairwise correlation from the
/// count of correct votes. Throws UndefinedEstimate when correct_votes is 0 or n.
CorrelationEstimate mom_rho(int n, int correct_votes);

/// One run's (attempts, correct votes) pair.
struct RunCounts {
    int n = 0;
    int correct_votes = 0;
};

/// Method-of-moments estimate pooled across repeated runs of the same size.
/// The pair moment is averaged per run and p is pooled over all attempts.
double pooled_rho(std::span<const RunCounts> runs);

/// P(X >= threshold) for X ~ Binomial(n, p), exact summation with
/// log-space coefficients (n up to 1024).
double binomial_upper_tail(int n, int threshold, double p);

double majority_success_probability(const ScoreModel& model);

/// Inverse of the expected-score map in p, by bisection to 1e-9.
double invert_score_to_p(double expected_score, int n, int threshold, int n_problems = 50);

/// Normal upper tail P(S >= target), S ~ N(mu, sigma). No continuity correction.
double lottery_single(double mu, double sigma, double target);

/// 1 - (1 - p_single)^k: chance that the best of k submissions clears the target.
double lottery_max_over_k(double p_single, int k);

/// Sample mean, sample standard deviation (n-1), min and max.
RunDistribution summarize_runs(std::span<const int> scores);

} // namespace mixvote::stats
