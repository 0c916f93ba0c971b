// SPDX-License-Identifier: Apache-2.0
#include "mixvote/orchestrator.hpp"

#include <algorithm>
#include <charconv>
#include <numeric>
#include <stdexcept>
#include <thread>

#include "mixvote/budget.hpp"
#include "mixvote/run_log.hpp"

namespace mixvote {

double SteadyClock::now() const
{
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - origin_).count();
}

void SteadyClock::sleep_for(double seconds)
{
    if (seconds > 0.0)
        std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
}

void VirtualClock::sleep_for(double seconds)
{
    if (seconds > 0.0)
        t_.store(t_.load() + seconds);
}

std::optional<Problem> VectorProblemSource::next()
{
    if (pos_ >= problems_.size())
        return std::nullopt;
    return problems_[pos_++];
}

std::vector<Problem> simulated_problems(std::span<const sim::VoterModel> models)
{
    std::vector<Problem> out;
    out.reserve(models.size());
    for (std::size_t i = 0; i < models.size(); ++i)
        out.push_back({problem_id(i), {}, models[i].true_answer});
    return out;
}

namespace {

class PresampledHandle final : public AttemptHandle {
public:
    explicit PresampledHandle(AttemptResult r) : result_(std::move(r)) {}

    std::optional<AttemptResult> poll(double t) override
    {
        if (cancelled_ || result_.latency_s > t)
            return std::nullopt;
        return result_;
    }
    void cancel() override { cancelled_ = true; }

private:
    AttemptResult result_;
    bool cancelled_ = false;
};

AttemptResult failed_attempt(const AttemptRequest& req)
{
    AttemptResult a;
    a.status = AttemptStatus::failed;
    a.strategy = req.strategy;
    a.seed = req.seed;
    return a;
}

} // namespace

SimulatorBackend::SimulatorBackend(std::vector<sim::VoterModel> models, MixerConfig mixer, std::uint64_t seed)
    : models_(std::move(models)), mixer_(std::move(mixer)), seed_(seed)
{
    mixer_.validate();
    for (const auto& m : models_)
        m.validate(mixer_.n_total());
}

std::unique_ptr<AttemptHandle> SimulatorBackend::start_attempt(const AttemptRequest& request)
{
    if (request.problem_index >= models_.size())
        throw std::out_of_range("SimulatorBackend: no voter model for problem index");
    const auto& model = models_[request.problem_index];
    sim::AttemptLatent slot_latent;
    {
        std::lock_guard lock(mutex_);
        auto it = latents_.find(request.problem_index);
        if (it == latents_.end())
            it = latents_
                     .emplace(request.problem_index,
                              sim::draw_problem_latent(model, mixer_, sim::problem_stream(seed_, request.problem_index)))
                     .first;
        slot_latent = sim::latent_for_slot(it->second, mixer_, request.attempt_index);
    }
    auto stream = sim::attempt_stream(seed_, request.problem_index, request.seed);
    return std::make_unique<PresampledHandle>(
        sim::sample_attempt(model, request.strategy, slot_latent, stream, request.seed));
}

ProblemOutcome solve_problem(const Problem& problem, std::size_t problem_index, const ContestConfig& config,
                             double budget_s, AttemptBackend& backend, Clock& clock,
                             const OrchestratorOptions& options)
{
    if (!(options.poll_interval_s > 0.0))
        throw std::invalid_argument("solve_problem: poll interval must be positive");
    const auto labels = config.mixer.slots();
    const std::size_t n = labels.size();
    const double start = clock.now();

    std::vector<std::unique_ptr<AttemptHandle>> handles(n);
    std::vector<AttemptResult> attempts(n);
    std::vector<bool> done(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        AttemptRequest req;
        req.problem = &problem;
        req.problem_index = problem_index;
        req.strategy = labels[i];
        if (options.prompts.has(labels[i]))
            req.system_prompt = options.prompts.system_prompt(labels[i]);
        req.seed = config.base_seed + static_cast<std::int64_t>(i);
        req.attempt_index = static_cast<int>(i);
        req.n_total = static_cast<int>(n);
        req.deadline_s = budget_s;
        try {
            handles[i] = backend.start_attempt(req);
        } catch (const std::exception&) {
            attempts[i] = failed_attempt(req);
            done[i] = true;
        }
        if (!handles[i] && !done[i]) {
            attempts[i] = failed_attempt(req);
            done[i] = true;
        }
    }

    std::vector<AttemptResult> answered;
    std::optional<double> stop_time;
    bool any_timeout = false;
    double last_completion = 0.0;

    auto close_rest = [&](AttemptStatus status, double latency) {
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i])
                continue;
            handles[i]->cancel();
            auto& a = attempts[i];
            a = AttemptResult{};
            a.status = status;
            a.strategy = labels[i];
            a.seed = config.base_seed + static_cast<std::int64_t>(i);
            a.latency_s = latency;
            done[i] = true;
        }
    };

    for (;;) {
        double t = clock.now() - start;
        const bool at_deadline = t >= budget_s || budget_s - t < 1e-9;
        if (at_deadline)
            t = budget_s;

        std::vector<std::size_t> fresh;
        for (std::size_t i = 0; i < n; ++i) {
            if (done[i])
                continue;
            if (auto r = handles[i]->poll(t)) {
                attempts[i] = std::move(*r);
                done[i] = true;
                fresh.push_back(i);
            }
        }
        std::stable_sort(fresh.begin(), fresh.end(), [&](std::size_t a, std::size_t b) {
            return attempts[a].latency_s < attempts[b].latency_s;
        });

        for (std::size_t i : fresh) {
            auto& a = attempts[i];
            if (stop_time) {
                a.status = AttemptStatus::cancelled;
                a.answer.reset();
                a.entropy.reset();
                a.latency_s = *stop_time;
                continue;
            }
            if (a.latency_s > budget_s || a.status == AttemptStatus::timed_out) {
                a.status = AttemptStatus::timed_out;
                a.answer.reset();
                a.entropy.reset();
                a.latency_s = budget_s;
                any_timeout = true;
                continue;
            }
            if (a.status != AttemptStatus::completed)
                continue;
            last_completion = std::max(last_completion, a.latency_s);
            answered.push_back(a);
            if (config.vote.early_stop && early_stop_check(answered, config.vote.quorum, config.vote.trivial_max))
                stop_time = a.latency_s;
        }

        if (stop_time) {
            close_rest(AttemptStatus::cancelled, *stop_time);
            break;
        }
        if (std::all_of(done.begin(), done.end(), [](bool d) { return d; }))
            break;
        if (at_deadline) {
            close_rest(AttemptStatus::timed_out, budget_s);
            any_timeout = true;
            break;
        }
        clock.sleep_for(std::min(options.poll_interval_s, budget_s - t));
    }

    handles.clear();

    ProblemOutcome out;
    out.early_stopped = stop_time.has_value();
    if (clock.is_virtual())
        out.elapsed_s = stop_time ? *stop_time : (any_timeout ? budget_s : last_completion);
    else
        out.elapsed_s = std::min(clock.now() - start, budget_s);
    out.attempts = std::move(attempts);
    out.tally = tally(out.attempts);
    out.final_answer = select_final(out.tally);
    return out;
}

RunRecord run_contest(ProblemSource& source, const ContestConfig& config, AttemptBackend& backend, Clock& clock,
                      double solving_deadline, RunLogWriter* log, const OrchestratorOptions& options)
{
    config.mixer.validate();
    RunRecord record;
    record.seed = config.seed;
    record.label = config.label;
    record.config = config.to_json();

    budget::BudgetState state{solving_deadline - clock.now(), config.n_problems};
    double total = 0.0;
    std::size_t index = 0;
    while (auto problem = source.next()) {
        // More problems than announced: keep allocating from what is left.
        if (state.problems_remaining <= 0)
            state.problems_remaining = 1;
        const auto alloc = budget::allocate(state, config.budget);
        if (alloc.fallback) {
            record.problems.push_back(make_fallback_record(problem->id, problem->answer_key));
            state = budget::advance(state, 0.0);
        } else {
            auto outcome = solve_problem(*problem, index, config, alloc.seconds, backend, clock, options);
            const double elapsed = outcome.elapsed_s;
            record.problems.push_back(
                make_problem_record(problem->id, alloc.seconds, problem->answer_key, std::move(outcome)));
            state = budget::advance(state, elapsed);
            total += elapsed;
        }
        if (log)
            log->problem(record.problems.back());
        ++index;
    }
    record.total_elapsed_s = total;
    if (log)
        log->footer(record);
    return record;
}

std::optional<int> extract_boxed_answer(std::string_view text)
{
    constexpr std::string_view tag = "\\boxed{";
    std::optional<int> found;
    std::size_t pos = 0;
    while ((pos = text.find(tag, pos)) != std::string_view::npos) {
        const std::size_t begin = pos + tag.size();
        pos = begin;
        const std::size_t end = text.find('}', begin);
        if (end == std::string_view::npos)
            break;
        std::string_view body = text.substr(begin, end - begin);
        while (!body.empty() && (body.front() == ' ' || body.front() == '\t'))
            body.remove_prefix(1);
        while (!body.empty() && (body.back() == ' ' || body.back() == '\t'))
            body.remove_suffix(1);
        if (body.empty() || body.size() > 6)
            continue;
        int value = 0;
        const auto [ptr, ec] = std::from_chars(body.data(), body.data() + body.size(), value);
        if (ec != std::errc{} || ptr != body.data() + body.size() || value < 0 || value > 99999)
            continue;
        found = value;
    }
    return found;
}

} // namespace mixvote
