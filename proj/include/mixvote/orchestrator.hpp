// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <atomic>
#include <chrono>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mixvote/contest.hpp"
#include "mixvote/prompts.hpp"
#include "mixvote/sim.hpp"
#include "mixvote/voting.hpp"

namespace mixvote {

class RunLogWriter;

/// Monotonic time source in seconds.
class Clock {
public:
    virtual ~Clock() = default;
    [[nodiscard]] virtual double now() const = 0;
    virtual void sleep_for(double seconds) = 0;
    /// Virtual clocks only move when slept on; elapsed time is then taken
    /// from attempt latencies instead of clock deltas.
    [[nodiscard]] virtual bool is_virtual() const noexcept = 0;
};

class SteadyClock final : public Clock {
public:
    SteadyClock() : origin_(std::chrono::steady_clock::now()) {}
    [[nodiscard]] double now() const override;
    void sleep_for(double seconds) override;
    [[nodiscard]] bool is_virtual() const noexcept override { return false; }

private:
    std::chrono::steady_clock::time_point origin_;
};

class VirtualClock final : public Clock {
public:
    explicit VirtualClock(double start = 0.0) : t_(start) {}
    [[nodiscard]] double now() const override { return t_.load(); }
    void sleep_for(double seconds) override;
    [[nodiscard]] bool is_virtual() const noexcept override { return true; }
    void set(double t) { t_.store(t); }

private:
    std::atomic<double> t_;
};

struct Problem {
    std::string id;
    std::string text;
    std::optional<int> answer_key;
};

class ProblemSource {
public:
    virtual ~ProblemSource() = default;
    /// Next problem, or nullopt when the source is exhausted.
    virtual std::optional<Problem> next() = 0;
};

class VectorProblemSource final : public ProblemSource {
public:
    explicit VectorProblemSource(std::vector<Problem> problems) : problems_(std::move(problems)) {}
    std::optional<Problem> next() override;

private:
    std::vector<Problem> problems_;
    std::size_t pos_ = 0;
};

/// Problems matching the simulator's generated contest (ids and keys).
std::vector<Problem> simulated_problems(std::span<const sim::VoterModel> models);

struct AttemptRequest {
    const Problem* problem = nullptr;
    std::size_t problem_index = 0;
    std::string strategy;
    std::string system_prompt;
    std::int64_t seed = 0;
    int attempt_index = 0;
    int n_total = 0;
    /// Seconds from problem start until the attempt must end.
    double deadline_s = 0.0;
};

/// One running attempt. poll() and cancel() are called only by the
/// coordinator thread.
class AttemptHandle {
public:
    virtual ~AttemptHandle() = default;
    /// The attempt's result if it has finished by `t` seconds after problem start.
    virtual std::optional<AttemptResult> poll(double t) = 0;
    /// Idempotent cooperative cancellation.
    virtual void cancel() = 0;
};

class AttemptBackend {
public:
    virtual ~AttemptBackend() = default;
    /// Throws on failure to start; the coordinator records the attempt as failed.
    virtual std::unique_ptr<AttemptHandle> start_attempt(const AttemptRequest& request) = 0;
    virtual bool health_check() { return true; }
};

/// Replays the simulator's voter streams through the backend interface.
class SimulatorBackend final : public AttemptBackend {
public:
    SimulatorBackend(std::vector<sim::VoterModel> models, MixerConfig mixer, std::uint64_t seed);
    std::unique_ptr<AttemptHandle> start_attempt(const AttemptRequest& request) override;

private:
    std::vector<sim::VoterModel> models_;
    MixerConfig mixer_;
    std::uint64_t seed_;
    std::mutex mutex_;
    std::map<std::size_t, sim::ProblemLatent> latents_;
};

struct OrchestratorOptions {
    double poll_interval_s = 0.1;
    /// Strategy prompts; empty prompts are sent when a label is missing.
    StrategyPromptSet prompts;
};

/// Starts every attempt, polls for completions, applies the early-stop
/// quorum, cancels survivors at quorum or deadline and votes.
ProblemOutcome solve_problem(const Problem& problem, std::size_t problem_index, const ContestConfig& config,
                             double budget_s, AttemptBackend& backend, Clock& clock,
                             const OrchestratorOptions& options = {});

/// Allocate, solve (or fall back to 0), advance and log, for every problem
/// the source yields. `solving_deadline` is the clock time at which the
/// solving budget runs out.
RunRecord run_contest(ProblemSource& source, const ContestConfig& config, AttemptBackend& backend, Clock& clock,
                      double solving_deadline, RunLogWriter* log = nullptr, const OrchestratorOptions& options = {});

/// Last \boxed{N} with N an integer literal in [0, 99999].
std::optional<int> extract_boxed_answer(std::string_view text);

} // namespace mixvote
