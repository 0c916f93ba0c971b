// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>

namespace mixvote::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kEnvironmentError = 3 };

/// Writes through a temporary sibling and renames it into place.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

struct SimulateArgs {
    std::filesystem::path scenario;
    std::optional<std::uint64_t> seed;
    std::optional<int> reps;
    std::filesystem::path out = "out";
    bool serial = false;
};

/// Writes logs/<mixer>-<rep>.jsonl per replication and summary.csv under
/// `out`. Nothing is written when the scenario does not load.
int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err);

struct AnalyzeArgs {
    std::filesystem::path logs;
    /// Defaults to <logs>/report.
    std::optional<std::filesystem::path> out;
};

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err);

struct LotteryArgs {
    double mu = 39.7;
    double sigma = 1.7;
    double target = 44.0;
    int k = 13;
    std::optional<std::filesystem::path> out;
};

/// Prints the K table as CSV; with `out`, also writes lottery.csv and lottery.svg there.
int cmd_lottery(const LotteryArgs& args, std::ostream& out, std::ostream& err);

struct BudgetTraceArgs {
    std::optional<std::filesystem::path> config;
    std::filesystem::path trace;
    int problems = 50;
};

/// Replays allocate/advance over a consumption trace and prints one CSV row
/// per problem.
int cmd_budget_trace(const BudgetTraceArgs& args, std::ostream& out, std::ostream& err);

struct LiveArgs {
    std::filesystem::path problems;
    std::string backend_url;
    std::string model = "gpt-oss-120b";
    std::string api_key_env = "OPENAI_API_KEY";
    std::filesystem::path prompts_dir = "prompts";
    std::optional<std::string> sandbox;
    std::optional<std::filesystem::path> config;
    std::filesystem::path out = "live.jsonl";
    std::optional<std::uint64_t> seed;
};

/// Problems file: one JSON object per line with "id", "problem" and an
/// optional integer "answer".
int cmd_live(const LiveArgs& args, std::ostream& out, std::ostream& err);

} // namespace mixvote::cli
