#include <doctest.h>

#include <cmath>
#include <map>

#include "mixvote/sim.hpp"
#include "mixvote/stats.hpp"

using namespace mixvote;
using namespace mixvote::sim;

namespace {

VoterModel model_with(double p, CorrelationMechanism mech = Independent{})
{
    VoterModel m;
    m.accuracy_by_strategy = {{strategy::original, p}};
    m.mechanism = mech;
    return m;
}

ContestConfig contest(int n = 8, bool early_stop = true, std::uint64_t seed = 1)
{
    ContestConfig c;
    c.label = "test";
    c.mixer = single_strategy_mixer(strategy::original, n);
    c.vote.early_stop = early_stop;
    c.seed = seed;
    return c;
}

// Pearson correlation of correctness between slots 0 and 1 over many problems.
double slot_pair_correlation(const VoterModel& m, const MixerConfig& mixer, int problems, std::uint64_t seed)
{
    double s0 = 0, s1 = 0, s01 = 0;
    for (int i = 0; i < problems; ++i) {
        const auto a = sample_problem_attempts(m, mixer, seed, static_cast<std::size_t>(i), 42);
        const double x = a[0].answer == m.true_answer ? 1.0 : 0.0;
        const double y = a[1].answer == m.true_answer ? 1.0 : 0.0;
        s0 += x;
        s1 += y;
        s01 += x * y;
    }
    const double m0 = s0 / problems, m1 = s1 / problems;
    const double cov = s01 / problems - m0 * m1;
    return cov / std::sqrt(m0 * (1 - m0) * m1 * (1 - m1));
}

} // namespace

TEST_CASE("voter model validation")
{
    CHECK_NOTHROW(model_with(0.5).validate(8));
    CHECK_THROWS(model_with(1.5).validate(8));
    CHECK_THROWS(model_with(0.5, CommonShock{1.2}).validate(8));
    CHECK_THROWS(model_with(0.5, FixedCount{9}).validate(8));
    auto m = model_with(0.5);
    m.distractors = {42};
    CHECK_THROWS(m.validate(8));
    m.distractors = {1, 2};
    CHECK_THROWS(m.validate(8));
    m.distractor_scatter = 2;
    CHECK_NOTHROW(m.validate(8));
    m.distractor_scatter = 0;
    m.distractors.clear();
    CHECK_THROWS(m.validate(8));
    CHECK_THROWS((void)model_with(0.5).accuracy("nope"));
}

TEST_CASE("sample_attempt extremes")
{
    const auto mixer = single_strategy_mixer(strategy::original, 8);
    for (std::size_t i = 0; i < 200; ++i) {
        for (const auto& a : sample_problem_attempts(model_with(1.0), mixer, 3, i, 42)) {
            REQUIRE(a.answer == 42);
            REQUIRE(a.status == AttemptStatus::completed);
            REQUIRE(a.latency_s > 0);
            REQUIRE(a.entropy.has_value());
        }
        for (const auto& a : sample_problem_attempts(model_with(0.0), mixer, 3, i, 42))
            REQUIRE(a.answer == model_with(0.0).distractor_at(0));
    }
    CHECK_THROWS(sample_problem_attempts(model_with(0.5), single_strategy_mixer("other", 2), 3, 0, 42));
}

TEST_CASE("distractor scatter")
{
    auto m = model_with(0.0);
    m.distractor_scatter = 5;
    const auto mixer = single_strategy_mixer(strategy::original, 8);
    std::map<int, int> seen;
    for (std::size_t i = 0; i < 500; ++i)
        for (const auto& a : sample_problem_attempts(m, mixer, 9, i, 42))
            ++seen[*a.answer];
    CHECK(seen.size() == 5);
    CHECK(seen.count(42) == 0);
    for (const auto& [ans, count] : seen)
        CHECK(count == doctest::Approx(800).epsilon(0.15));
}

TEST_CASE("correct attempts report lower mean entropy")
{
    const auto mixer = single_strategy_mixer(strategy::original, 8);
    double ec = 0, ew = 0;
    int nc = 0, nw = 0;
    for (std::size_t i = 0; i < 2000; ++i)
        for (const auto& a : sample_problem_attempts(model_with(0.5), mixer, 2, i, 42)) {
            if (a.answer == 42) {
                ec += *a.entropy;
                ++nc;
            } else {
                ew += *a.entropy;
                ++nw;
            }
        }
    CHECK(ec / nc == doctest::Approx(kCorrectEntropyMean).epsilon(0.02));
    CHECK(ew / nw == doctest::Approx(kWrongEntropyMean).epsilon(0.02));
}

TEST_CASE("latency mean and jitter")
{
    auto m = model_with(0.5);
    m.latency = {60.0, 0.3};
    const auto mixer = single_strategy_mixer(strategy::original, 8);
    double s = 0, s2 = 0;
    int n = 0;
    for (std::size_t i = 0; i < 5000; ++i)
        for (const auto& a : sample_problem_attempts(m, mixer, 4, i, 42)) {
            s += a.latency_s;
            s2 += a.latency_s * a.latency_s;
            ++n;
        }
    const double mean = s / n;
    const double sd = std::sqrt(s2 / n - mean * mean);
    CHECK(mean == doctest::Approx(60.0).epsilon(0.01));
    CHECK(sd / mean == doctest::Approx(0.3).epsilon(0.03));
}

TEST_CASE("common shock pairwise correlation is rho")
{
    const auto mixer = single_strategy_mixer(strategy::original, 2);
    const double r = slot_pair_correlation(model_with(0.7, CommonShock{0.3}), mixer, 100000, 17);
    CHECK(std::abs(r - 0.3) < 0.01);
    const double r0 = slot_pair_correlation(model_with(0.7), mixer, 100000, 17);
    CHECK(std::abs(r0) < 0.01);
}

TEST_CASE("fixed count correlation is -1/(n-1)")
{
    const auto mixer = single_strategy_mixer(strategy::original, 8);
    const auto m = model_with(0.5, FixedCount{3});
    for (std::size_t i = 0; i < 100; ++i) {
        int correct = 0;
        for (const auto& a : sample_problem_attempts(m, mixer, 5, i, 42))
            correct += a.answer == 42;
        REQUIRE(correct == 3);
    }
    CHECK(std::abs(slot_pair_correlation(m, mixer, 100000, 5) + 1.0 / 7.0) < 0.01);
}

TEST_CASE("cross-strategy decorrelation")
{
    MixerConfig mixer{"pair", {{"a", 1}, {"b", 1}}};
    VoterModel m;
    m.accuracy_by_strategy = {{"a", 0.7}, {"b", 0.7}};
    m.mechanism = CommonShock{0.4};
    m.cross_strategy_decorrelation = 0.0;
    CHECK(std::abs(slot_pair_correlation(m, mixer, 100000, 8) - 0.4) < 0.01);
    // Each strategy keeps the shared draw with probability 1-d, so the
    // correlation across strategies is rho (1-d)^2.
    m.cross_strategy_decorrelation = 0.5;
    CHECK(std::abs(slot_pair_correlation(m, mixer, 100000, 8) - 0.1) < 0.01);
    m.cross_strategy_decorrelation = 1.0;
    CHECK(std::abs(slot_pair_correlation(m, mixer, 100000, 8)) < 0.01);
}

TEST_CASE("simulate_problem basics")
{
    const auto mixer = single_strategy_mixer(strategy::original, 8);
    const auto out = simulate_problem(model_with(1.0), mixer, 342, 1, 0);
    CHECK(out.final_answer == 42);
    CHECK(out.early_stopped);
    CHECK(out.attempts.size() == 8);
    int completed = 0;
    double fourth = 0;
    for (const auto& a : out.attempts)
        if (a.status == AttemptStatus::completed) {
            ++completed;
            fourth = std::max(fourth, a.latency_s);
        } else {
            CHECK(a.status == AttemptStatus::cancelled);
        }
    CHECK(completed == 4);
    CHECK(out.elapsed_s == fourth);

    const auto zero = simulate_problem(model_with(1.0), mixer, 0, 1, 0);
    CHECK(zero.final_answer == 0);
    CHECK(zero.tally.empty());
    for (const auto& a : zero.attempts)
        CHECK(a.status == AttemptStatus::timed_out);
    CHECK(zero.elapsed_s == 0);

    VoteOptions off;
    off.early_stop = false;
    const auto full = simulate_problem(model_with(1.0), mixer, 342, 1, 0, off);
    CHECK_FALSE(full.early_stopped);
    for (const auto& a : full.attempts)
        CHECK(a.status == AttemptStatus::completed);
}

TEST_CASE("strict-majority configuration matches the binomial tail")
{
    auto m = model_with(0.69);
    m.entropy = EntropyModel::flat;
    const auto mixer = single_strategy_mixer(strategy::original, 8);
    VoteOptions off;
    off.early_stop = false;
    constexpr int n = 10000;
    int solved = 0;
    for (int i = 0; i < n; ++i) {
        const auto out = simulate_problem(m, mixer, 900, 77, static_cast<std::size_t>(i), off);
        int correct = 0;
        for (const auto& a : out.attempts)
            correct += a.answer == 42;
        // Flat weights and downward distractors: solved exactly when a strict majority is correct.
        REQUIRE((out.final_answer == 42) == (correct >= 5));
        solved += out.final_answer == 42;
    }
    CHECK(std::abs(static_cast<double>(solved) / n - stats::binomial_upper_tail(8, 5, 0.69)) < 0.01);
}

TEST_CASE("early stop agrees with the full plurality")
{
    auto m = model_with(0.6);
    m.entropy = EntropyModel::flat;
    m.distractor_scatter = 3;
    const auto mixer = single_strategy_mixer(strategy::original, 8);
    VoteOptions off;
    off.early_stop = false;
    int compared = 0;
    for (std::size_t i = 0; i < 3000; ++i) {
        const auto early = simulate_problem(m, mixer, 900, 12, i);
        const auto full = simulate_problem(m, mixer, 900, 12, i, off);
        if (!early.early_stopped)
            continue;
        const auto quorum = early_stop_check(early.attempts);
        REQUIRE(quorum.has_value());
        if (*quorum == full.final_answer) {
            REQUIRE(early.final_answer == full.final_answer);
            ++compared;
        }
    }
    CHECK(compared > 1000);
}

TEST_CASE("simulate_contest")
{
    const auto perfect = contest_models(model_with(1.0), 50);
    const auto r = simulate_contest(perfect, contest());
    CHECK(r.score() == 50);
    CHECK(r.problems.size() == 50);
    CHECK(r.total_elapsed_s <= 17100);
    CHECK(r.problems[3].problem_id == "p003");
    CHECK(r.problems[3].answer_key == generated_true_answer(3));

    CHECK(simulate_contest(perfect, contest(8, true, 5)) == simulate_contest(perfect, contest(8, true, 5)));
    CHECK_FALSE(simulate_contest(perfect, contest(8, true, 5)) == simulate_contest(perfect, contest(8, true, 6)));
    CHECK_THROWS(simulate_contest(contest_models(model_with(1.0), 49), contest()));
}

TEST_CASE("contest mean follows the binomial model")
{
    auto tmpl = model_with(0.69);
    tmpl.entropy = EntropyModel::flat;
    const auto models = contest_models(tmpl, 50);
    double sum = 0;
    for (std::uint64_t s = 0; s < 1000; ++s)
        sum += simulate_contest(models, contest(8, false, s)).score();
    CHECK(std::abs(sum / 1000 - 39.4) < 0.3);
}

TEST_CASE("pathological latency falls back everywhere")
{
    auto tmpl = model_with(1.0);
    tmpl.latency = {5000.0, 0.01};
    const auto r = simulate_contest(contest_models(tmpl, 50), contest());
    CHECK(r.score() == 0);
    CHECK(r.total_elapsed_s <= 17100);
    for (const auto& p : r.problems)
        CHECK(p.final_answer == 0);
}

TEST_CASE("presets")
{
    const auto acc = calibrated_strategy_accuracies();
    REQUIRE(acc.size() == 6);
    CHECK(acc[0].second == doctest::Approx(0.69353).epsilon(1e-4));
    CHECK(acc[1].second == doctest::Approx(0.66601).epsilon(1e-4));
    CHECK(acc[2].second == doctest::Approx(0.68613).epsilon(1e-4));
    CHECK(acc[3].second == doctest::Approx(0.65640).epsilon(1e-4));
    for (const auto& [label, p] : acc) {
        double score = 0;
        for (const auto& [l2, s] : isolated_strategy_scores())
            if (l2 == label)
                score = s;
        CHECK(stats::ScoreModel{p, 8, 5, 50}.expected_score() == doctest::Approx(score).epsilon(1e-6));
    }
    const auto mixers = table_mixers();
    REQUIRE(mixers.size() == 4);
    CHECK(mixers[1].describe() == "5+1+1+1");
    for (const auto& mx : mixers)
        CHECK(mx.n_total() == 8);
    CHECK(find_preset("nemotron_super_120b")->threshold() == 2);
    CHECK(find_preset("qwen35_35b_a3b")->n_attempts == 16);
    CHECK_FALSE(find_preset("x").has_value());
}
