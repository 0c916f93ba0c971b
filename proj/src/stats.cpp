// SPDX-License-Identifier: Apache-2.0
#include "mixvote/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace mixvote::stats {

namespace {

constexpr int kMaxBinomialN = 1024;

void require(bool cond, const char* what)
{
    if (!cond)
        throw std::invalid_argument(what);
}

} // namespace

void ScoreModel::validate() const
{
    require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "ScoreModel: p must lie in [0, 1]");
    require(n >= 1 && n <= kMaxBinomialN, "ScoreModel: n must lie in [1, 1024]");
    require(threshold >= 1 && threshold <= n, "ScoreModel: threshold must lie in [1, n]");
    require(n_problems >= 0, "ScoreModel: n_problems must be non-negative");
}

double ScoreModel::expected_score() const
{
    return n_problems * majority_success_probability(*this);
}

double effective_sample_size(int n, double rho)
{
    require(n >= 1, "effective_sample_size: n must be >= 1");
    require(std::isfinite(rho) && rho <= 1.0, "effective_sample_size: rho must be finite and <= 1");
    const double denom = 1.0 + (n - 1) * rho;
    if (denom <= 0.0)
        throw std::domain_error("effective_sample_size: 1 + (n-1) rho <= 0, outside the exchangeable region");
    return n / denom;
}

CorrelationEstimate mom_rho(int n, int correct_votes)
{
    require(n >= 2, "mom_rho: n must be >= 2");
    require(correct_votes >= 0 && correct_votes <= n, "mom_rho: correct_votes must lie in [0, n]");
    if (correct_votes == 0 || correct_votes == n)
        throw UndefinedEstimate("mom_rho: p_hat in {0, 1} leaves rho undefined");

    const double nn = n;
    const double vc = correct_votes;
    const double p_hat = vc / nn;
    const double pair_rate = vc * (vc - 1.0) / (nn * (nn - 1.0));
    const double rho_hat = (pair_rate - p_hat * p_hat) / (p_hat * (1.0 - p_hat));
    return {n, correct_votes, rho_hat, p_hat};
}

double pooled_rho(std::span<const RunCounts> runs)
{
    require(!runs.empty(), "pooled_rho: no runs");
    const int n = runs.front().n;
    require(n >= 2, "pooled_rho: n must be >= 2");

    long long total_correct = 0;
    double pair_sum = 0.0;
    for (const auto& r : runs) {
        require(r.n == n, "pooled_rho: runs must share the same n");
        require(r.correct_votes >= 0 && r.correct_votes <= n, "pooled_rho: correct_votes must lie in [0, n]");
        total_correct += r.correct_votes;
        const double vc = r.correct_votes;
        pair_sum += vc * (vc - 1.0);
    }
    const double runs_n = static_cast<double>(runs.size());
    const double p_pool = static_cast<double>(total_correct) / (runs_n * n);
    if (p_pool <= 0.0 || p_pool >= 1.0)
        throw UndefinedEstimate("pooled_rho: pooled p_hat in {0, 1} leaves rho undefined");

    const double pair_rate = pair_sum / (runs_n * n * (n - 1.0));
    return (pair_rate - p_pool * p_pool) / (p_pool * (1.0 - p_pool));
}

double binomial_upper_tail(int n, int threshold, double p)
{
    require(n >= 0 && n <= kMaxBinomialN, "binomial_upper_tail: n must lie in [0, 1024]");
    require(std::isfinite(p) && p >= 0.0 && p <= 1.0, "binomial_upper_tail: p must lie in [0, 1]");
    if (threshold <= 0)
        return 1.0;
    if (threshold > n)
        return 0.0;
    if (p == 0.0)
        return 0.0;
    if (p == 1.0)
        return 1.0;

    const double log_p = std::log(p);
    const double log_q = std::log1p(-p);

    // log C(n, k) accumulated from k = 0 upward.
    double log_coeff = 0.0;
    for (int k = 0; k < threshold; ++k)
        log_coeff += std::log(static_cast<double>(n - k)) - std::log(static_cast<double>(k + 1));

    double sum = 0.0;
    for (int k = threshold; k <= n; ++k) {
        sum += std::exp(log_coeff + k * log_p + (n - k) * log_q);
        if (k < n)
            log_coeff += std::log(static_cast<double>(n - k)) - std::log(static_cast<double>(k + 1));
    }
    return std::clamp(sum, 0.0, 1.0);
}

double majority_success_probability(const ScoreModel& model)
{
    model.validate();
    return binomial_upper_tail(model.n, model.threshold, model.p);
}

double invert_score_to_p(double expected_score, int n, int threshold, int n_problems)
{
    require(n_problems >= 1, "invert_score_to_p: n_problems must be >= 1");
    require(std::isfinite(expected_score) && expected_score >= 0.0 && expected_score <= n_problems,
            "invert_score_to_p: expected_score must lie in [0, n_problems]");
    ScoreModel probe{0.0, n, threshold, n_problems};
    probe.validate();

    if (expected_score <= 0.0)
        return 0.0;
    if (expected_score >= n_problems)
        return 1.0;

    const double target = expected_score / n_problems;
    double lo = 0.0;
    double hi = 1.0;
    while (hi - lo > 1e-9) {
        const double mid = 0.5 * (lo + hi);
        if (binomial_upper_tail(n, threshold, mid) < target)
            lo = mid;
        else
            hi = mid;
    }
    return 0.5 * (lo + hi);
}

double lottery_single(double mu, double sigma, double target)
{
    require(std::isfinite(mu) && std::isfinite(target), "lottery_single: mu and target must be finite");
    require(std::isfinite(sigma) && sigma > 0.0, "lottery_single: sigma must be positive");
    return 0.5 * std::erfc((target - mu) / (sigma * std::sqrt(2.0)));
}

double lottery_max_over_k(double p_single, int k)
{
    require(std::isfinite(p_single) && p_single >= 0.0 && p_single <= 1.0,
            "lottery_max_over_k: p_single must lie in [0, 1]");
    require(k >= 0, "lottery_max_over_k: k must be >= 0");
    return 1.0 - std::pow(1.0 - p_single, k);
}

RunDistribution summarize_runs(std::span<const int> scores)
{
    require(scores.size() >= 2, "summarize_runs: need at least 2 scores");
    RunDistribution d;
    d.scores.assign(scores.begin(), scores.end());
    const double count = static_cast<double>(scores.size());
    d.mu = std::accumulate(scores.begin(), scores.end(), 0.0) / count;
    double ss = 0.0;
    for (int s : scores)
        ss += (s - d.mu) * (s - d.mu);
    d.sigma = std::sqrt(ss / (count - 1.0));
    const auto [lo, hi] = std::minmax_element(scores.begin(), scores.end());
    d.min = *lo;
    d.max = *hi;
    return d;
}

} // namespace mixvote::stats
