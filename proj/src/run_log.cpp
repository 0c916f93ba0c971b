// SPDX-License-Identifier: Apache-2.0
#include "mixvote/run_log.hpp"

#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace mixvote {

namespace {

template <class T>
nlohmann::json opt(const std::optional<T>& v)
{
    return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

template <class T>
std::optional<T> opt_from(const nlohmann::json& j, const char* key)
{
    const auto it = j.find(key);
    if (it == j.end() || it->is_null())
        return std::nullopt;
    return it->get<T>();
}

} // namespace

nlohmann::json to_json(const AttemptResult& a)
{
    return {
        {"seed", a.seed},
        {"strategy", a.strategy},
        {"status", std::string(to_string(a.status))},
        {"answer", opt(a.answer)},
        {"entropy", opt(a.entropy)},
        {"latency_s", a.latency_s},
        {"turns", a.turns},
    };
}

nlohmann::json to_json(const VoteTally& t)
{
    auto arr = nlohmann::json::array();
    for (const auto& e : t.entries)
        arr.push_back({{"answer", e.answer}, {"votes", e.vote_count}, {"weight", e.total_weight},
                       {"attempts", e.attempt_ids}});
    return arr;
}

nlohmann::json to_json(const ProblemRecord& p)
{
    auto attempts = nlohmann::json::array();
    for (const auto& a : p.attempts)
        attempts.push_back(to_json(a));
    return {
        {"problem_id", p.problem_id},
        {"allocation_s", p.allocation_s},
        {"fallback", p.fallback},
        {"elapsed_s", p.elapsed_s},
        {"attempts", attempts},
        {"tally", to_json(p.tally)},
        {"final", p.final_answer},
        {"answer_key", opt(p.answer_key)},
        {"correct", opt(p.correct())},
        {"early_stopped", p.early_stopped},
    };
}

nlohmann::json footer_json(const RunRecord& r)
{
    return {
        {"footer", true},
        {"label", r.label},
        {"seed", r.seed},
        {"problems", r.problems.size()},
        {"score_if_known", r.all_keys_known() ? nlohmann::json(r.score()) : nlohmann::json(nullptr)},
        {"total_elapsed_s", r.total_elapsed_s},
        {"config_hash", config_hash(r.config)},
        {"config", r.config},
    };
}

AttemptResult attempt_from_json(const nlohmann::json& j)
{
    AttemptResult a;
    a.seed = j.at("seed").get<std::int64_t>();
    a.strategy = j.at("strategy").get<std::string>();
    const auto status = parse_status(j.at("status").get<std::string>());
    if (!status)
        throw std::invalid_argument("unknown attempt status");
    a.status = *status;
    a.answer = opt_from<int>(j, "answer");
    a.entropy = opt_from<double>(j, "entropy");
    a.latency_s = j.at("latency_s").get<double>();
    a.turns = j.value("turns", 0);
    a.validate();
    return a;
}

ProblemRecord problem_from_json(const nlohmann::json& j)
{
    ProblemRecord p;
    p.problem_id = j.at("problem_id").get<std::string>();
    p.allocation_s = j.at("allocation_s").get<double>();
    p.fallback = j.value("fallback", false);
    p.elapsed_s = j.at("elapsed_s").get<double>();
    for (const auto& a : j.at("attempts"))
        p.attempts.push_back(attempt_from_json(a));
    for (const auto& e : j.at("tally")) {
        TallyEntry entry;
        entry.answer = e.at("answer").get<int>();
        entry.vote_count = e.at("votes").get<int>();
        entry.total_weight = e.at("weight").get<double>();
        entry.attempt_ids = e.value("attempts", std::vector<std::size_t>{});
        p.tally.entries.push_back(std::move(entry));
    }
    p.final_answer = j.at("final").get<int>();
    p.answer_key = opt_from<int>(j, "answer_key");
    p.early_stopped = j.value("early_stopped", false);
    return p;
}

void RunLogWriter::problem(const ProblemRecord& p)
{
    out_ << to_json(p).dump() << '\n';
    out_.flush();
}

void RunLogWriter::footer(const RunRecord& r)
{
    out_ << footer_json(r).dump() << '\n';
    out_.flush();
}

void write_run_log(std::ostream& out, const RunRecord& record)
{
    RunLogWriter w(out);
    for (const auto& p : record.problems)
        w.problem(p);
    w.footer(record);
}

std::string run_log_string(const RunRecord& record)
{
    std::ostringstream os;
    write_run_log(os, record);
    return os.str();
}

ParsedLog read_run_log(std::istream& in)
{
    ParsedLog log;
    std::string line;
    while (std::getline(in, line)) {
        if (line.find_first_not_of(" \t\r") == std::string::npos)
            continue;
        try {
            const auto j = nlohmann::json::parse(line);
            if (!j.is_object())
                throw std::invalid_argument("not an object");
            if (j.value("footer", false)) {
                log.has_footer = true;
                log.record.label = j.value("label", std::string{});
                log.record.seed = j.value("seed", std::uint64_t{0});
                log.record.total_elapsed_s = j.value("total_elapsed_s", 0.0);
                log.record.config = j.value("config", nlohmann::json(nullptr));
                log.config_hash = j.value("config_hash", std::string{});
            } else {
                log.record.problems.push_back(problem_from_json(j));
            }
        } catch (const std::exception&) {
            ++log.corrupt_lines;
        }
    }
    return log;
}

} // namespace mixvote
