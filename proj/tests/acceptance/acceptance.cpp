// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Runs on the simulator backend only.

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <unistd.h>
#include <vector>

#include <fmt/core.h>

#include "mixvote/budget.hpp"
#include "mixvote/cli.hpp"
#include "mixvote/experiments.hpp"
#include "mixvote/orchestrator.hpp"
#include "mixvote/run_log.hpp"
#include "mixvote/stats.hpp"

using namespace mixvote;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

// Independent oracles.

double binomial_tail(int n, int k0, double p)
{
    double tail = 0.0;
    for (int k = k0; k <= n; ++k) {
        double c = 1.0;
        for (int j = 0; j < k; ++j)
            c = c * (n - j) / (j + 1);
        tail += c * std::pow(p, k) * std::pow(1 - p, n - k);
    }
    return tail;
}

double normal_upper(double z)
{
    return 0.5 * std::erfc(z / std::sqrt(2.0));
}

bool near(double a, double b, double tol)
{
    return std::abs(a - b) <= tol;
}

sim::VoterModel strict_majority_voter(double p)
{
    sim::VoterModel m;
    m.accuracy_by_strategy = {{sim::strategy::original, p}};
    m.distractor_scatter = 1;
    m.entropy = sim::EntropyModel::flat;
    m.latency = {10.0, 0.5};
    return m;
}

Outcome effective_votes()
{
    const double ess = stats::effective_sample_size(8, 0.3);
    const double oracle = 8.0 / (1.0 + 7.0 * 0.3);
    return {near(ess, 2.58, 0.01) && near(ess, oracle, 1e-12), fmt::format("ESS(8, 0.3) = {:.4f}", ess)};
}

Outcome rho_identity()
{
    double worst = 0.0;
    for (int n = 2; n <= 64; ++n)
        for (int vc = 1; vc < n; ++vc)
            worst = std::max(worst, std::abs(stats::mom_rho(n, vc).rho_hat + 1.0 / (n - 1)));
    const double r3 = stats::mom_rho(3, 1).rho_hat;
    const double r16 = stats::mom_rho(16, 8).rho_hat;
    const auto point = [](int n) { return stats::mom_rho(n, n / 2).rho_hat; };
    const std::vector<int> large{7, 7, 11, 16, 16};
    double sum_large = 0.0;
    for (int n : large)
        sum_large += point(n);
    const double mean_large = sum_large / 5;
    const double mean_all = (sum_large + 3 * point(3)) / 8;
    const bool ok = worst <= 1e-12 && near(r3, -0.5, 5e-4) && near(r16, -0.0667, 5e-5) &&
                    near(mean_large, -0.113, 0.001) && near(mean_all, -0.258, 0.001);
    return {ok, fmt::format("max |err| {:.1e}; N=3 {:.4f}, N=16 {:.4f}; means {:.4f}, {:.4f}", worst, r3, r16,
                            mean_large, mean_all)};
}

Outcome binomial_round_trip()
{
    const double p = stats::invert_score_to_p(39.7, 8, 5, 50);
    const double forward = stats::ScoreModel{0.69, 8, 5, 50}.expected_score();
    const double oracle = 50 * binomial_tail(8, 5, 0.69);
    const bool ok = p >= 0.68 && p <= 0.70 && near(forward, 39.4, 0.1) && near(forward, oracle, 1e-9) &&
                    near(50 * binomial_tail(8, 5, p), 39.7, 1e-6);
    return {ok, fmt::format("p = {:.5f}; score(0.69) = {:.4f}", p, forward)};
}

Outcome lottery()
{
    const double single = stats::lottery_single(39.7, 1.7, 44);
    const double k13 = stats::lottery_max_over_k(single, 13);
    const double oracle = normal_upper((44 - 39.7) / 1.7);
    const bool ok = single >= 0.005 && single <= 0.007 && k13 >= 0.067 && k13 <= 0.077 &&
                    near(single, oracle, 1e-12) && near(k13, 1 - std::pow(1 - oracle, 13), 1e-12);
    return {ok, fmt::format("P(>=44) = {:.5f}; K=13 {:.4f}", single, k13)};
}

Outcome baseline_distribution()
{
    const std::vector<int> scores{44, 41, 40, 40, 40, 40, 40, 39, 39, 39, 39, 38, 37};
    const auto d = stats::summarize_runs(scores);
    const double mean = std::accumulate(scores.begin(), scores.end(), 0.0) / scores.size();
    double ss = 0.0;
    for (int s : scores)
        ss += (s - mean) * (s - mean);
    const double sd = std::sqrt(ss / (scores.size() - 1));
    const bool ok = near(d.mu, 39.69, 0.01) && near(d.sigma, 1.65, 0.05) && d.min == 37 && d.max == 44 &&
                    near(d.mu, mean, 1e-12) && near(d.sigma, sd, 1e-12);
    return {ok, fmt::format("mu {:.4f}, sigma {:.4f}, range {}..{}", d.mu, d.sigma, d.min, d.max)};
}

Outcome monte_carlo()
{
    const auto models = sim::contest_models(strict_majority_voter(0.69), 50);
    ContestConfig cfg;
    cfg.label = "acceptance";
    cfg.mixer = single_strategy_mixer(sim::strategy::original, 8);
    cfg.vote.early_stop = false;
    cfg.seed = 20250101;
    const auto scores = sim::replicate_scores(models, cfg, 10000);
    const auto s = sim::summarize_scores(scores);
    const double oracle = 50 * binomial_tail(8, 5, 0.69);

    sim::VoterModel ind;
    ind.accuracy_by_strategy = {{sim::strategy::original, 0.69}};
    const double rho_ind = sim::correlation_experiment(ind, 8, 10000, 17).pooled_rho;
    auto shocked = ind;
    shocked.mechanism = sim::CommonShock{0.3};
    const double rho_shock = sim::correlation_experiment(shocked, 8, 10000, 17).pooled_rho;

    const bool ok = std::abs(s.mean - oracle) < 3 * s.se && std::abs(rho_ind) <= 0.02 && rho_shock >= 0.28 &&
                    rho_shock <= 0.32;
    return {ok, fmt::format("mean {:.3f} vs {:.3f} (se {:.3f}); rho independent {:+.4f}, shock {:.4f}", s.mean,
                            oracle, s.se, rho_ind, rho_shock)};
}

Outcome mixer_ordering()
{
    sim::VoterModel tmpl;
    for (const auto& [label, p] : sim::calibrated_strategy_accuracies())
        tmpl.accuracy_by_strategy.emplace_back(label, p);
    tmpl.cross_strategy_decorrelation = 0.0;
    tmpl.distractor_scatter = 1;
    tmpl.entropy = sim::EntropyModel::flat;
    ContestConfig base;
    base.label = "mixers";
    base.vote.early_stop = false;
    const auto mixers = sim::table_mixers();
    const auto rows = sim::mixer_experiment(tmpl, mixers, 10000, 7, base);
    const auto& b = rows.front().summary;
    const auto& e = rows.back().summary;
    const double se = std::hypot(b.se, e.se);
    std::string detail;
    for (const auto& r : rows)
        detail += fmt::format("{} {:.3f}; ", r.mixer, r.summary.mean);
    detail += fmt::format("gap {:.1f} se", (b.mean - e.mean) / se);
    return {rows.front().mixer == "baseline" && rows.back().mixer == "equal" && b.mean - e.mean > 2 * se, detail};
}

Outcome budget_guarantee()
{
    const budget::BudgetConfig config;
    const double limit = 17100.0;
    std::mt19937_64 gen(4242);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int over = 0, unaccounted = 0, fallbacks = 0;
    double worst = 0.0;
    for (int t = 0; t < 100000; ++t) {
        auto state = budget::initial_state(config, 50);
        double total = 0.0;
        const int style = t % 4;
        for (int i = 0; i < 50; ++i) {
            const auto a = budget::allocate(state, config);
            if (a.fallback) {
                ++fallbacks;
                state = budget::advance(state, 0.0);
                continue;
            }
            if (!(a.seconds > 0.0)) {
                ++unaccounted;
                continue;
            }
            // Attempts are cut at the hard deadline, so a problem never
            // consumes more than its allocation.
            double used = 0.0;
            switch (style) {
            case 0: used = a.seconds * unit(gen); break;
            case 1: used = a.seconds; break;
            case 2: used = unit(gen) < 0.5 ? a.seconds : 0.0; break;
            default: used = a.seconds * std::pow(unit(gen), 0.2); break;
            }
            total += used;
            state = budget::advance(state, used);
        }
        if (state.problems_remaining != 0)
            ++unaccounted;
        over += total > limit + 1e-6;
        worst = std::max(worst, total);
    }
    return {over == 0 && unaccounted == 0 && config.solving_budget() == limit,
            fmt::format("10^5 traces: {} over budget, {} unaccounted, {} fallbacks, max total {:.3f} s", over,
                        unaccounted, fallbacks, worst)};
}

Outcome orchestrator_equivalence()
{
    std::mt19937_64 gen(99);
    int equal = 0;
    for (int i = 0; i < 20; ++i) {
        sim::VoterModel tmpl;
        for (const auto& [label, p] : sim::calibrated_strategy_accuracies())
            tmpl.accuracy_by_strategy.emplace_back(label, p);
        tmpl.mechanism = sim::CommonShock{0.3};
        tmpl.cross_strategy_decorrelation = 0.3;
        tmpl.latency = {300.0, 0.8};
        const auto models = sim::contest_models(tmpl, 50);
        ContestConfig cfg;
        cfg.label = "equivalence";
        cfg.mixer = sim::table_mixers()[i % 4];
        cfg.seed = gen();
        if (i % 2)
            cfg.budget.total_limit = 9000;

        SimulatorBackend backend(models, cfg.mixer, cfg.seed);
        VirtualClock clock(0.0);
        VectorProblemSource source(simulated_problems(models));
        std::ostringstream log;
        RunLogWriter writer(log);
        const auto orch = run_contest(source, cfg, backend, clock, cfg.budget.solving_budget(), &writer);
        const auto direct = sim::simulate_contest(models, cfg);
        equal += orch == direct && log.str() == run_log_string(direct);
    }
    return {equal == 20, fmt::format("{}/20 seeds identical (records and log bytes)", equal)};
}

std::string slurp(const fs::path& p)
{
    std::ifstream in(p, std::ios::binary);
    return {std::istreambuf_iterator<char>(in), {}};
}

Outcome determinism()
{
    const auto root = fs::temp_directory_path() / ("mixvote-acceptance-" + std::to_string(::getpid()));
    fs::remove_all(root);
    fs::create_directories(root);
    std::ofstream(root / "s.yaml") << "label: determinism\nseed: 123\nreplications: 8\n"
                                      "voter: {accuracy: calibrated, mechanism: {common_shock: 0.2}}\n"
                                      "mixers: table\n";
    std::ostringstream sink;
    int rc = 0;
    for (const char* run : {"a", "b"}) {
        cli::SimulateArgs s;
        s.scenario = root / "s.yaml";
        s.out = root / run;
        rc |= cli::cmd_simulate(s, sink, sink);
        rc |= cli::cmd_analyze({root / run / "logs", root / run / "report"}, sink, sink);
    }
    int files = 0, differ = 0;
    for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
        if (!e.is_regular_file())
            continue;
        ++files;
        differ += slurp(e.path()) != slurp(root / "b" / fs::relative(e.path(), root / "a"));
    }
    fs::remove_all(root);
    return {rc == 0 && files > 40 && differ == 0, fmt::format("{} files compared, {} differ", files, differ)};
}

} // namespace

int main()
{
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"effective votes", effective_votes},
        {"rho identity", rho_identity},
        {"binomial round trip", binomial_round_trip},
        {"lottery", lottery},
        {"baseline distribution", baseline_distribution},
        {"monte carlo oracle", monte_carlo},
        {"mixer ordering", mixer_ordering},
        {"budget guarantee", budget_guarantee},
        {"orchestrator equivalence", orchestrator_equivalence},
        {"determinism", determinism},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        const auto start = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
        failed += !o.pass;
        std::cout << fmt::format("{} [{:2}] {}: {} ({:.2f} s)\n", o.pass ? "PASS" : "FAIL", i + 1,
                                 criteria[i].first, o.detail, secs)
                  << std::flush;
    }
    std::cout << fmt::format("{}/{} criteria passed\n", criteria.size() - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
