#include <iostream>

#include <CLI11.hpp>

#include "mixvote/cli.hpp"

int main(int argc, char** argv)
{
    namespace cli = mixvote::cli;
    CLI::App app{"Budgeted majority-vote orchestrator and correlated-voter simulator"};
    app.require_subcommand(1);
    int status = cli::kOk;

    cli::SimulateArgs sim;
    std::uint64_t sim_seed = 0;
    int sim_reps = 0;
    auto* simulate = app.add_subcommand("simulate", "Run a scenario and write run logs plus summary.csv");
    simulate->add_option("--scenario", sim.scenario, "Scenario YAML")->required();
    auto* seed_opt = simulate->add_option("--seed", sim_seed, "Master seed (overrides the scenario)");
    auto* reps_opt = simulate->add_option("--reps", sim_reps, "Replications (overrides the scenario)");
    simulate->add_option("--out", sim.out, "Output directory")->capture_default_str();
    simulate->add_flag("--serial", sim.serial, "Run replications on one thread");
    simulate->callback([&] {
        if (*seed_opt)
            sim.seed = sim_seed;
        if (*reps_opt)
            sim.reps = sim_reps;
        status = cli::cmd_simulate(sim, std::cout, std::cerr);
    });

    cli::AnalyzeArgs an;
    std::string an_out;
    auto* analyze = app.add_subcommand("analyze", "Turn a directory of run logs into tables and plots");
    analyze->add_option("--logs", an.logs, "Directory of .jsonl run logs")->required();
    auto* an_out_opt = analyze->add_option("--out", an_out, "Report directory (default <logs>/report)");
    analyze->callback([&] {
        if (*an_out_opt)
            an.out = an_out;
        status = cli::cmd_analyze(an, std::cout, std::cerr);
    });

    cli::LotteryArgs lot;
    std::string lot_out;
    auto* lottery = app.add_subcommand("lottery", "Probability that the best of K submissions reaches a target");
    lottery->add_option("--mu", lot.mu)->capture_default_str();
    lottery->add_option("--sigma", lot.sigma)->capture_default_str();
    lottery->add_option("--target", lot.target)->capture_default_str();
    lottery->add_option("--k", lot.k)->capture_default_str();
    auto* lot_out_opt = lottery->add_option("--out", lot_out, "Also write lottery.csv and lottery.svg here");
    lottery->callback([&] {
        if (*lot_out_opt)
            lot.out = lot_out;
        status = cli::cmd_lottery(lot, std::cout, std::cerr);
    });

    cli::BudgetTraceArgs bt;
    std::string bt_config;
    auto* trace = app.add_subcommand("budget-trace", "Replay per-problem budget allocation over a consumption trace");
    auto* bt_config_opt = trace->add_option("--config", bt_config, "YAML with budget keys");
    trace->add_option("--trace", bt.trace, "Consumed seconds per problem")->required();
    trace->add_option("--problems", bt.problems, "Problem count")->capture_default_str();
    trace->callback([&] {
        if (*bt_config_opt)
            bt.config = bt_config;
        status = cli::cmd_budget_trace(bt, std::cout, std::cerr);
    });

    cli::LiveArgs live;
    std::string live_config, live_sandbox;
    std::uint64_t live_seed = 0;
    auto* run_live = app.add_subcommand("live", "Run a contest against an OpenAI-compatible endpoint");
    run_live->add_option("--problems", live.problems, "JSONL problems file")->required();
    run_live->add_option("--backend-url", live.backend_url, "e.g. http://127.0.0.1:8000/v1")->required();
    run_live->add_option("--model", live.model)->capture_default_str();
    run_live->add_option("--api-key-env", live.api_key_env, "Environment variable holding the API key")
        ->capture_default_str();
    run_live->add_option("--prompts-dir", live.prompts_dir)->capture_default_str();
    auto* sandbox_opt = run_live->add_option("--sandbox", live_sandbox, "Sandbox pool host:port");
    auto* live_config_opt = run_live->add_option("--config", live_config, "Scenario YAML (mixer, vote, budget)");
    auto* live_seed_opt = run_live->add_option("--seed", live_seed);
    run_live->add_option("--out", live.out, "Run log path")->capture_default_str();
    run_live->callback([&] {
        if (*sandbox_opt)
            live.sandbox = live_sandbox;
        if (*live_config_opt)
            live.config = live_config;
        if (*live_seed_opt)
            live.seed = live_seed;
        status = cli::cmd_live(live, std::cout, std::cerr);
    });

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : cli::kInputError;
    }
    return status;
}
