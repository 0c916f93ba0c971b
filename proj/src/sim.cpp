// SPDX-License-Identifier: Apache-2.0
#include "mixvote/sim.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "mixvote/budget.hpp"
#include "mixvote/stats.hpp"

namespace mixvote::sim {

namespace {

constexpr std::uint32_t kShuffleOffset = 1000;

template <class... Ts>
struct overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

} // namespace

double VoterModel::accuracy(std::string_view strategy) const
{
    for (const auto& [label, p] : accuracy_by_strategy)
        if (label == strategy)
            return p;
    throw std::invalid_argument("VoterModel: unknown strategy '" + std::string(strategy) + "'");
}

int VoterModel::distractor_at(int i) const
{
    if (!distractors.empty())
        return distractors.at(static_cast<std::size_t>(i));
    // Values just below the true answer: under flat weights a tied vote then
    // resolves against the truth, matching the strict-majority model.
    return ((true_answer - 1 - i) % (kMaxAnswer + 1) + (kMaxAnswer + 1)) % (kMaxAnswer + 1);
}

void VoterModel::validate(int n_total) const
{
    if (accuracy_by_strategy.empty())
        throw std::invalid_argument("VoterModel: no strategies");
    for (const auto& [label, p] : accuracy_by_strategy)
        if (!(p >= 0.0 && p <= 1.0))
            throw std::invalid_argument("VoterModel: accuracy of '" + label + "' outside [0, 1]");
    if (true_answer < kMinAnswer || true_answer > kMaxAnswer)
        throw std::invalid_argument("VoterModel: true answer outside [0, 99999]");
    if (distractor_scatter < 1 || distractor_scatter > kMaxAnswer)
        throw std::invalid_argument("VoterModel: distractor_scatter must be >= 1");
    if (!distractors.empty() && static_cast<int>(distractors.size()) != distractor_scatter)
        throw std::invalid_argument("VoterModel: explicit distractors must number distractor_scatter");
    for (int i = 0; i < distractor_scatter; ++i) {
        const int d = distractor_at(i);
        if (d == true_answer)
            throw std::invalid_argument("VoterModel: a distractor equals the true answer");
        if (d < kMinAnswer || d > kMaxAnswer)
            throw std::invalid_argument("VoterModel: distractor outside [0, 99999]");
    }
    if (!(cross_strategy_decorrelation >= 0.0 && cross_strategy_decorrelation <= 1.0))
        throw std::invalid_argument("VoterModel: cross_strategy_decorrelation outside [0, 1]");
    if (!(latency.mean_s > 0.0) || !(latency.jitter >= 0.0))
        throw std::invalid_argument("VoterModel: latency mean must be positive and jitter non-negative");
    std::visit(overloaded{
                   [](const Independent&) {},
                   [](const CommonShock& c) {
                       if (!(c.rho >= 0.0 && c.rho <= 1.0))
                           throw std::invalid_argument("VoterModel: common_shock rho outside [0, 1]");
                   },
                   [n_total](const FixedCount& f) {
                       if (f.correct_per_run < 0 || f.correct_per_run > n_total)
                           throw std::invalid_argument("VoterModel: fixed_count exceeds the attempt count");
                   },
               },
               mechanism);
}

nlohmann::json to_json(const VoterModel& m)
{
    auto acc = nlohmann::json::array();
    for (const auto& [label, p] : m.accuracy_by_strategy)
        acc.push_back({{"strategy", label}, {"p", p}});
    nlohmann::json mech = std::visit(
        overloaded{
            [](const Independent&) { return nlohmann::json{{"type", "independent"}}; },
            [](const CommonShock& c) { return nlohmann::json{{"type", "common_shock"}, {"rho", c.rho}}; },
            [](const FixedCount& f) {
                return nlohmann::json{{"type", "fixed_count"}, {"correct_per_run", f.correct_per_run}};
            },
        },
        m.mechanism);
    return {
        {"accuracy", acc},
        {"mechanism", mech},
        {"cross_strategy_decorrelation", m.cross_strategy_decorrelation},
        {"distractor_scatter", m.distractor_scatter},
        {"distractors", m.distractors},
        {"entropy", m.entropy == EntropyModel::flat ? "flat" : "informative"},
        {"latency", {{"mean_s", m.latency.mean_s}, {"jitter", m.latency.jitter}}},
    };
}

rng::Stream problem_stream(std::uint64_t seed, std::size_t problem_index)
{
    return {seed, rng::Domain::problem, static_cast<std::uint32_t>(problem_index), 0};
}

rng::Stream attempt_stream(std::uint64_t seed, std::size_t problem_index, std::int64_t attempt_seed)
{
    return {seed, rng::Domain::attempt, static_cast<std::uint32_t>(problem_index),
            static_cast<std::uint32_t>(attempt_seed)};
}

ProblemLatent draw_problem_latent(const VoterModel& model, const MixerConfig& mixer, rng::Stream stream)
{
    ProblemLatent latent;
    const int n = mixer.n_total();
    const std::size_t n_strategies = mixer.counts_by_strategy.size();
    std::visit(overloaded{
                   [](const Independent&) {},
                   [&](const CommonShock& c) {
                       latent.shocked = stream.uniform_at(0) < c.rho;
                       if (!latent.shocked)
                           return;
                       const double base = stream.uniform_at(1);
                       latent.shared_u.resize(n_strategies);
                       for (std::size_t j = 0; j < n_strategies; ++j) {
                           const auto k = static_cast<std::uint32_t>(2 + 2 * j);
                           const bool own = stream.uniform_at(k) < model.cross_strategy_decorrelation;
                           latent.shared_u[j] = own ? stream.uniform_at(k + 1) : base;
                       }
                   },
                   [&](const FixedCount& f) {
                       std::vector<int> slots(static_cast<std::size_t>(n));
                       std::iota(slots.begin(), slots.end(), 0);
                       stream.seek(kShuffleOffset);
                       latent.forced_correct.assign(static_cast<std::size_t>(n), false);
                       for (int i = 0; i < f.correct_per_run && i < n; ++i) {
                           const auto j = static_cast<std::size_t>(i) + stream.below(static_cast<std::uint32_t>(n - i));
                           std::swap(slots[static_cast<std::size_t>(i)], slots[j]);
                           latent.forced_correct[static_cast<std::size_t>(slots[static_cast<std::size_t>(i)])] = true;
                       }
                   },
               },
               model.mechanism);
    return latent;
}

AttemptLatent latent_for_slot(const ProblemLatent& latent, const MixerConfig& mixer, int slot)
{
    AttemptLatent a;
    if (latent.shocked) {
        int seen = 0;
        for (std::size_t j = 0; j < mixer.counts_by_strategy.size(); ++j) {
            seen += mixer.counts_by_strategy[j].second;
            if (slot < seen) {
                a.shared_u = latent.shared_u.at(j);
                break;
            }
        }
    }
    if (!latent.forced_correct.empty())
        a.forced_correct = static_cast<bool>(latent.forced_correct.at(static_cast<std::size_t>(slot)));
    return a;
}

AttemptResult sample_attempt(const VoterModel& model, std::string_view strategy, const AttemptLatent& latent,
                             rng::Stream& stream, std::int64_t attempt_seed)
{
    const double p = model.accuracy(strategy);

    // Fixed draw layout: 0 correctness, 1 distractor, 2-3 entropy, 4-5 latency.
    stream.seek(0);
    const double u = stream.uniform();
    const double pick = stream.uniform();
    const double z_entropy = stream.normal();
    const double z_latency = stream.normal();

    bool correct = u < p;
    if (latent.forced_correct)
        correct = *latent.forced_correct;
    else if (latent.shared_u)
        correct = *latent.shared_u < p;

    AttemptResult a;
    a.status = AttemptStatus::completed;
    a.strategy = std::string(strategy);
    a.seed = attempt_seed;
    if (correct) {
        a.answer = model.true_answer;
    } else {
        const int k = std::min(model.distractor_scatter - 1, static_cast<int>(pick * model.distractor_scatter));
        a.answer = model.distractor_at(k);
    }

    if (model.entropy == EntropyModel::flat) {
        a.entropy = kFlatEntropy;
    } else {
        const double mean = correct ? kCorrectEntropyMean : kWrongEntropyMean;
        const double mu = std::log(mean) - 0.5 * kEntropyLogSd * kEntropyLogSd;
        a.entropy = std::exp(mu + kEntropyLogSd * z_entropy);
    }

    const double log_sd = std::sqrt(std::log1p(model.latency.jitter * model.latency.jitter));
    const double log_mu = std::log(model.latency.mean_s) - 0.5 * log_sd * log_sd;
    a.latency_s = std::exp(log_mu + log_sd * z_latency);
    return a;
}

std::vector<AttemptResult> sample_problem_attempts(const VoterModel& model, const MixerConfig& mixer,
                                                   std::uint64_t seed, std::size_t problem_index,
                                                   std::int64_t base_seed)
{
    const auto latent = draw_problem_latent(model, mixer, problem_stream(seed, problem_index));
    const auto labels = mixer.slots();
    std::vector<AttemptResult> attempts;
    attempts.reserve(labels.size());
    for (std::size_t slot = 0; slot < labels.size(); ++slot) {
        const std::int64_t attempt_seed = base_seed + static_cast<std::int64_t>(slot);
        auto stream = attempt_stream(seed, problem_index, attempt_seed);
        attempts.push_back(sample_attempt(model, labels[slot],
                                          latent_for_slot(latent, mixer, static_cast<int>(slot)), stream,
                                          attempt_seed));
    }
    return attempts;
}

ProblemOutcome simulate_problem(const VoterModel& model, const MixerConfig& mixer, double budget_s,
                                std::uint64_t seed, std::size_t problem_index, const VoteOptions& vote,
                                std::int64_t base_seed)
{
    ProblemOutcome out;
    out.attempts = sample_problem_attempts(model, mixer, seed, problem_index, base_seed);
    auto& attempts = out.attempts;

    std::vector<std::size_t> order(attempts.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return attempts[a].latency_s < attempts[b].latency_s; });

    std::vector<AttemptResult> answered;
    std::optional<double> stop_time;
    bool any_timeout = false;
    double last_completion = 0.0;
    for (std::size_t idx : order) {
        auto& a = attempts[idx];
        if (stop_time) {
            a.status = AttemptStatus::cancelled;
            a.answer.reset();
            a.entropy.reset();
            a.latency_s = *stop_time;
            continue;
        }
        if (a.latency_s > budget_s) {
            a.status = AttemptStatus::timed_out;
            a.answer.reset();
            a.entropy.reset();
            a.latency_s = budget_s;
            any_timeout = true;
            continue;
        }
        last_completion = a.latency_s;
        answered.push_back(a);
        if (vote.early_stop && early_stop_check(answered, vote.quorum, vote.trivial_max))
            stop_time = a.latency_s;
    }

    out.early_stopped = stop_time.has_value();
    out.elapsed_s = stop_time ? *stop_time : (any_timeout ? budget_s : last_completion);
    out.tally = tally(attempts);
    out.final_answer = select_final(out.tally);
    return out;
}

RunRecord simulate_contest(std::span<const VoterModel> models, const ContestConfig& config)
{
    config.mixer.validate();
    if (static_cast<int>(models.size()) != config.n_problems)
        throw std::invalid_argument("simulate_contest: model count differs from n_problems");
    for (const auto& m : models)
        m.validate(config.mixer.n_total());

    RunRecord record;
    record.seed = config.seed;
    record.label = config.label;
    record.config = config.to_json();
    record.problems.reserve(models.size());

    auto state = budget::initial_state(config.budget, static_cast<int>(models.size()));
    double total = 0.0;
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto alloc = budget::allocate(state, config.budget);
        if (alloc.fallback) {
            record.problems.push_back(make_fallback_record(problem_id(i), models[i].true_answer));
            state = budget::advance(state, 0.0);
            continue;
        }
        auto outcome = simulate_problem(models[i], config.mixer, alloc.seconds, config.seed, i, config.vote,
                                        config.base_seed);
        const double elapsed = outcome.elapsed_s;
        record.problems.push_back(
            make_problem_record(problem_id(i), alloc.seconds, models[i].true_answer, std::move(outcome)));
        state = budget::advance(state, elapsed);
        total += elapsed;
    }
    record.total_elapsed_s = total;
    return record;
}

int generated_true_answer(std::size_t index)
{
    return static_cast<int>((1000 + 37 * index) % (kMaxAnswer + 1));
}

std::vector<VoterModel> contest_models(const VoterModel& tmpl, int n_problems)
{
    std::vector<VoterModel> models(static_cast<std::size_t>(std::max(0, n_problems)), tmpl);
    for (std::size_t i = 0; i < models.size(); ++i)
        models[i].true_answer = generated_true_answer(i);
    return models;
}

std::vector<MixerConfig> table_mixers()
{
    using namespace strategy;
    auto make = [](std::string name, int o, int s, int b, int c) {
        MixerConfig m;
        m.name = std::move(name);
        m.counts_by_strategy = {{original, o}, {small_cases, s}, {work_backwards, b}, {classify, c}};
        return m;
    };
    return {make("baseline", 8, 0, 0, 0), make("conservative", 5, 1, 1, 1), make("aggressive", 3, 2, 2, 1),
            make("equal", 2, 2, 2, 2)};
}

std::vector<std::pair<std::string, double>> isolated_strategy_scores()
{
    using namespace strategy;
    return {{original, 39.7},  {small_cases, 37.0}, {work_backwards, 39.0},
            {classify, 36.0},  {code_first, 37.7},  {formalize_first, 39.0}};
}

std::vector<std::pair<std::string, double>> calibrated_strategy_accuracies(int n, int n_problems)
{
    std::vector<std::pair<std::string, double>> out;
    for (const auto& [label, score] : isolated_strategy_scores())
        out.emplace_back(label, stats::invert_score_to_p(score, n, stats::majority_threshold(n), n_problems));
    return out;
}

std::vector<ModelPreset> model_presets()
{
    return {{"gpt_oss_120b", 8, 0.69}, {"qwen35_35b_a3b", 16, 0.46}, {"nemotron_super_120b", 3, 0.46}};
}

std::optional<ModelPreset> find_preset(std::string_view name)
{
    for (auto& p : model_presets())
        if (p.name == name)
            return p;
    return std::nullopt;
}

} // namespace mixvote::sim
