// SPDX-License-Identifier: Apache-2.0
#include "mixvote/cli.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>
#include <yaml-cpp/yaml.h>

#include "mixvote/budget.hpp"
#include "mixvote/experiments.hpp"
#include "mixvote/live_backend.hpp"
#include "mixvote/openai_client.hpp"
#include "mixvote/orchestrator.hpp"
#include "mixvote/report.hpp"
#include "mixvote/run_log.hpp"
#include "mixvote/sandbox_client.hpp"
#include "mixvote/scenario.hpp"
#include "mixvote/stats.hpp"

namespace fs = std::filesystem;

namespace mixvote::cli {

void write_file_atomic(const fs::path& path, const std::string& contents)
{
    if (path.has_parent_path())
        fs::create_directories(path.parent_path());
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw fs::filesystem_error("cannot write", tmp, std::make_error_code(std::errc::io_error));
        f << contents;
        f.flush();
        if (!f)
            throw fs::filesystem_error("write failed", tmp, std::make_error_code(std::errc::io_error));
    }
    fs::rename(tmp, path);
}

namespace {

std::string file_safe(std::string_view s)
{
    std::string out;
    for (char c : s)
        out += std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.' || c == '+' ? c : '_';
    return out.empty() ? "run" : out;
}

std::string summary_csv(const Scenario& s, const std::vector<std::vector<int>>& scores)
{
    auto configs = nlohmann::json::array();
    for (const auto& m : s.mixers)
        configs.push_back(s.contest_config(m).to_json());
    report::CsvTable t({"scenario", "mixer", "counts", "replications", "mu", "sigma", "se", "min", "max"});
    for (std::size_t i = 0; i < s.mixers.size(); ++i) {
        const auto d = sim::summarize_scores(scores[i]);
        const auto [lo, hi] = std::minmax_element(scores[i].begin(), scores[i].end());
        t.row({s.label, s.mixers[i].name, s.mixers[i].describe(), std::to_string(scores[i].size()),
               report::csv_number(d.mean), report::csv_number(d.sigma), report::csv_number(d.se),
               std::to_string(*lo), std::to_string(*hi)});
    }
    return t.str(report::provenance_line(config_hash(configs), std::to_string(s.seed)));
}

} // namespace

int cmd_simulate(const SimulateArgs& args, std::ostream& out, std::ostream& err)
{
    Scenario s;
    try {
        s = load_scenario(args.scenario);
        if (args.seed)
            s.seed = *args.seed;
        if (args.reps) {
            if (*args.reps < 1)
                throw std::invalid_argument("--reps must be at least 1");
            s.replications = *args.reps;
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    const auto models = sim::contest_models(s.voter, s.problems);
    std::vector<std::vector<int>> scores(s.mixers.size(), std::vector<int>(static_cast<std::size_t>(s.replications)));
    try {
        fs::create_directories(args.out / "logs");
        for (std::size_t m = 0; m < s.mixers.size(); ++m) {
            const auto base = s.contest_config(s.mixers[m]);
            const auto stem = file_safe(s.mixers[m].name);
            sim::for_each_replication(s.replications, args.serial ? sim::Exec::serial : sim::Exec::parallel,
                                      [&](int r) {
                                          auto c = base;
                                          c.seed = sim::replication_seed(s.seed, r);
                                          const auto rec = sim::simulate_contest(models, c);
                                          scores[m][static_cast<std::size_t>(r)] = rec.score();
                                          write_file_atomic(args.out / "logs" / fmt::format("{}-{:05d}.jsonl", stem, r),
                                                            run_log_string(rec));
                                      });
        }
        write_file_atomic(args.out / "summary.csv", summary_csv(s, scores));
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kEnvironmentError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    for (std::size_t m = 0; m < s.mixers.size(); ++m) {
        const auto d = sim::summarize_scores(scores[m]);
        out << fmt::format("{} {}: {} runs, mean {:.4f}, sigma {:.4f}\n", s.label, s.mixers[m].name, d.contests,
                           d.mean, d.sigma);
    }
    return kOk;
}

int cmd_analyze(const AnalyzeArgs& args, std::ostream& out, std::ostream& err)
{
    std::error_code ec;
    if (!fs::is_directory(args.logs, ec)) {
        err << "error: " << args.logs.string() << " is not a directory\n";
        return kInputError;
    }
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(args.logs, ec))
        if (entry.is_regular_file() && entry.path().extension() == ".jsonl")
            files.push_back(entry.path());
    std::sort(files.begin(), files.end());

    std::vector<report::NamedLog> logs;
    for (const auto& f : files) {
        std::ifstream in(f, std::ios::binary);
        if (!in) {
            err << "error: cannot read " << f.string() << '\n';
            return kEnvironmentError;
        }
        auto parsed = read_run_log(in);
        if (parsed.record.problems.empty() && !parsed.has_footer) {
            err << "warning: " << f.filename().string() << " holds no records\n";
            continue;
        }
        logs.push_back({f.stem().string(), std::move(parsed)});
    }
    if (logs.empty()) {
        err << "error: no run logs in " << args.logs.string() << '\n';
        return kInputError;
    }

    const auto bundle = report::analyze_logs(logs);
    const auto dir = args.out.value_or(args.logs / "report");
    try {
        for (const auto& [name, contents] : bundle.files())
            write_file_atomic(dir / name, contents);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kEnvironmentError;
    }
    if (bundle.corrupt_lines > 0)
        err << "warning: skipped " << bundle.corrupt_lines << " corrupt log lines\n";
    out << fmt::format("{} logs, {} problems, {} correlation points ({} excluded) -> {}\n", logs.size(),
                       bundle.problems, bundle.correlation.size(), bundle.excluded, dir.string());
    return kOk;
}

int cmd_lottery(const LotteryArgs& args, std::ostream& out, std::ostream& err)
{
    std::vector<report::LotteryRow> rows;
    try {
        if (!std::isfinite(args.mu) || !std::isfinite(args.target))
            throw std::invalid_argument("mu and target must be finite");
        rows = report::lottery_table(args.mu, args.sigma, args.target, args.k);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
    report::CsvTable t({"k", "p_max"});
    report::Chart chart{fmt::format("P(max >= {:g}) over K submissions", args.target),
                        "K", "probability", 1.0, static_cast<double>(std::max(2, args.k)), 0.0, 1.0, {}, {}, {}, {}};
    report::Series s{fmt::format("mu={:g} sigma={:g}", args.mu, args.sigma), {}, true};
    for (const auto& r : rows) {
        t.row({std::to_string(r.k), report::csv_number(r.probability)});
        s.points.push_back({static_cast<double>(r.k), r.probability});
    }
    chart.series.push_back(std::move(s));
    const auto provenance = report::provenance_line(
        config_hash({{"mu", args.mu}, {"sigma", args.sigma}, {"target", args.target}, {"k", args.k}}), "none");
    const auto csv = t.str(provenance);
    out << csv;
    if (args.out) {
        try {
            write_file_atomic(*args.out / "lottery.csv", csv);
            write_file_atomic(*args.out / "lottery.svg", chart.svg());
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return kEnvironmentError;
        }
    }
    return kOk;
}

namespace {

budget::BudgetConfig budget_config_file(const fs::path& path)
{
    const auto root = YAML::LoadFile(path.string());
    if (root.IsMap() && root["budget"])
        return budget::budget_from_yaml(root["budget"]);
    return budget::budget_from_yaml(root);
}

std::vector<double> read_trace(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open trace " + path.string());
    std::vector<double> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos)
            line.erase(hash);
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ss(line);
        std::string tok;
        while (ss >> tok) {
            double v = 0.0;
            std::size_t used = 0;
            try {
                v = std::stod(tok, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != tok.size() || !std::isfinite(v))
                throw std::invalid_argument(fmt::format("{}:{}: not a number: '{}'", path.string(), lineno, tok));
            if (v < 0.0)
                throw std::invalid_argument(
                    fmt::format("{}:{}: negative consumption {}", path.string(), lineno, tok));
            out.push_back(v);
        }
    }
    return out;
}

} // namespace

int cmd_budget_trace(const BudgetTraceArgs& args, std::ostream& out, std::ostream& err)
{
    budget::BudgetConfig config;
    std::vector<double> trace;
    try {
        if (args.config)
            config = budget_config_file(*args.config);
        config.validate();
        trace = read_trace(args.trace);
        if (args.problems < 0)
            throw std::invalid_argument("--problems must be non-negative");
        if (static_cast<int>(trace.size()) > args.problems)
            throw std::invalid_argument(
                fmt::format("trace has {} entries for {} problems", trace.size(), args.problems));
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    report::CsvTable t({"problem", "time_left", "allocation", "consumed", "remaining", "fallback"});
    auto state = budget::initial_state(config, args.problems);
    int fallbacks = 0;
    double total = 0.0;
    for (int i = 0; i < args.problems; ++i) {
        const auto alloc = budget::allocate(state, config);
        const double consumed = alloc.fallback ? 0.0 : (i < static_cast<int>(trace.size()) ? trace[i] : 0.0);
        const double before = state.time_left;
        state = budget::advance(state, consumed);
        fallbacks += alloc.fallback;
        total += consumed;
        t.row({std::to_string(i + 1), report::csv_number(before),
               alloc.fallback ? std::string{} : report::csv_number(alloc.seconds), report::csv_number(consumed),
               report::csv_number(state.time_left), alloc.fallback ? "1" : "0"});
    }
    out << t.str();
    err << fmt::format("{} problems, {} fallbacks, {:.4f} s consumed of {:.4f} s\n", args.problems, fallbacks, total,
                       config.solving_budget());
    return kOk;
}

namespace {

std::vector<Problem> read_problems(const fs::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw std::invalid_argument("cannot open problems file " + path.string());
    std::vector<Problem> out;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        const auto j = nlohmann::json::parse(line, nullptr, false);
        if (!j.is_object() || !j.contains("problem") || !j["problem"].is_string())
            throw std::invalid_argument(
                fmt::format("{}:{}: expected an object with a \"problem\" string", path.string(), lineno));
        Problem p;
        p.id = j.contains("id") ? (j["id"].is_string() ? j["id"].get<std::string>() : j["id"].dump())
                                : problem_id(out.size());
        p.text = j["problem"].get<std::string>();
        if (j.contains("answer") && !j["answer"].is_null()) {
            if (!j["answer"].is_number_integer())
                throw std::invalid_argument(fmt::format("{}:{}: answer must be an integer", path.string(), lineno));
            p.answer_key = j["answer"].get<int>();
        }
        out.push_back(std::move(p));
    }
    return out;
}

} // namespace

int cmd_live(const LiveArgs& args, std::ostream& out, std::ostream& err)
{
    Scenario s;
    std::vector<Problem> problems;
    StrategyPromptSet prompts;
    OpenAIConfig oc;
    std::shared_ptr<CodeSandbox> sandbox;
    try {
        s = args.config ? load_scenario(*args.config) : parse_scenario("label: live\n");
        if (args.seed)
            s.seed = *args.seed;
        problems = read_problems(args.problems);
        prompts = load_prompt_dir(args.prompts_dir);
        for (const auto& [label, count] : s.mixers.front().counts_by_strategy)
            if (count > 0 && !prompts.has(label))
                throw std::invalid_argument("no prompt for strategy '" + label + "' in " + args.prompts_dir.string());
        oc.base_url = args.backend_url;
        oc.model = args.model;
        if (const char* key = std::getenv(args.api_key_env.c_str()))
            oc.api_key = key;
        oc.request_timeout_s = s.budget.session_timeout;
        (void)split_base_url(oc.base_url);
        if (args.sandbox) {
            const auto [host, port] = parse_host_port(*args.sandbox);
            sandbox = std::make_shared<SandboxClient>(host, port);
        }
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }

    LiveOptions lo;
    lo.session_timeout_s = s.budget.session_timeout;
    LiveBackend backend(std::make_shared<OpenAIChatModel>(oc), sandbox, prompts, lo);
    if (!backend.health_check()) {
        err << "error: backend " << args.backend_url << " is unreachable\n";
        return kEnvironmentError;
    }

    auto config = s.contest_config(s.mixers.front());
    config.n_problems = static_cast<int>(problems.size());
    config.source = {{"backend", "openai"}, {"model", args.model}};
    OrchestratorOptions options;
    options.prompts = prompts;

    std::ofstream log(args.out, std::ios::binary | std::ios::trunc);
    if (!log) {
        err << "error: cannot write " << args.out.string() << '\n';
        return kEnvironmentError;
    }
    RunLogWriter writer(log);
    VectorProblemSource source(std::move(problems));
    SteadyClock clock;
    const auto rec = run_contest(source, config, backend, clock, clock.now() + config.budget.solving_budget(), &writer,
                                 options);
    if (rec.all_keys_known())
        out << fmt::format("{} problems, score {}, {:.1f} s\n", rec.problems.size(), rec.score(), rec.total_elapsed_s);
    else
        out << fmt::format("{} problems, {:.1f} s\n", rec.problems.size(), rec.total_elapsed_s);
    return kOk;
}

} // namespace mixvote::cli
