// SPDX-License-Identifier: Apache-2.0
#include "mixvote/scenario.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <fmt/format.h>
#include <yaml-cpp/yaml.h>

namespace mixvote {

ScenarioError::ScenarioError(const std::string& origin, int line, int column, const std::string& message)
    : std::runtime_error(fmt::format("{}:{}:{}: {}", origin, line, column, message)), line_(line)
{
}

namespace {

class Reader {
public:
    explicit Reader(std::string origin) : origin_(std::move(origin)) {}

    [[noreturn]] void fail(const YAML::Node& at, const std::string& message) const
    {
        const auto m = at.Mark();
        if (m.is_null())
            throw ScenarioError(origin_, 0, 0, message);
        throw ScenarioError(origin_, m.line + 1, m.column + 1, message);
    }

    void require_map(const YAML::Node& n, std::string_view what) const
    {
        if (!n.IsMap())
            fail(n, fmt::format("{} must be a mapping", what));
    }

    void only_keys(const YAML::Node& n, std::initializer_list<std::string_view> allowed) const
    {
        for (const auto& kv : n) {
            const auto key = kv.first.as<std::string>();
            bool ok = false;
            for (auto a : allowed)
                ok = ok || key == a;
            if (!ok)
                fail(kv.first, fmt::format("unknown key '{}'", key));
        }
    }

    template <class T>
    T scalar(const YAML::Node& n, std::string_view what) const
    {
        if (!n.IsScalar())
            fail(n, fmt::format("{} must be a scalar", what));
        try {
            return n.as<T>();
        } catch (const YAML::Exception&) {
            fail(n, fmt::format("{}: cannot read '{}'", what, n.Scalar()));
        }
    }

    double probability(const YAML::Node& n, std::string_view what) const
    {
        const auto v = scalar<double>(n, what);
        if (!(v >= 0.0 && v <= 1.0))
            fail(n, fmt::format("{} must lie in [0, 1]", what));
        return v;
    }

    int count(const YAML::Node& n, std::string_view what, int min) const
    {
        const auto v = scalar<int>(n, what);
        if (v < min)
            fail(n, fmt::format("{} must be at least {}", what, min));
        return v;
    }

    void accuracy(const YAML::Node& n, sim::VoterModel& m) const
    {
        m.accuracy_by_strategy.clear();
        if (n.IsScalar() && n.Scalar() == "calibrated") {
            m.accuracy_by_strategy = sim::calibrated_strategy_accuracies();
            return;
        }
        if (n.IsScalar()) {
            m.accuracy_by_strategy = {{sim::strategy::original, probability(n, "voter.accuracy")}};
            return;
        }
        require_map(n, "voter.accuracy");
        for (const auto& kv : n)
            m.accuracy_by_strategy.emplace_back(kv.first.as<std::string>(),
                                                probability(kv.second, "accuracy of " + kv.first.as<std::string>()));
        if (m.accuracy_by_strategy.empty())
            fail(n, "voter.accuracy is empty");
    }

    sim::CorrelationMechanism mechanism(const YAML::Node& n) const
    {
        if (n.IsScalar()) {
            if (n.Scalar() == "independent")
                return sim::Independent{};
            fail(n, fmt::format("unknown mechanism '{}'", n.Scalar()));
        }
        require_map(n, "voter.mechanism");
        if (n.size() != 1)
            fail(n, "voter.mechanism needs exactly one of common_shock, fixed_count");
        const auto kv = *n.begin();
        const auto kind = kv.first.as<std::string>();
        if (kind == "common_shock")
            return sim::CommonShock{probability(kv.second, "common_shock")};
        if (kind == "fixed_count")
            return sim::FixedCount{count(kv.second, "fixed_count", 0)};
        if (kind == "independent")
            return sim::Independent{};
        fail(kv.first, fmt::format("unknown mechanism '{}'", kind));
    }

    void voter(const YAML::Node& n, sim::VoterModel& m) const
    {
        require_map(n, "voter");
        only_keys(n, {"accuracy", "mechanism", "cross_strategy_decorrelation", "distractor_scatter", "distractors",
                      "entropy", "latency", "true_answer"});
        if (n["accuracy"])
            accuracy(n["accuracy"], m);
        if (n["mechanism"])
            m.mechanism = mechanism(n["mechanism"]);
        if (n["cross_strategy_decorrelation"])
            m.cross_strategy_decorrelation =
                probability(n["cross_strategy_decorrelation"], "voter.cross_strategy_decorrelation");
        if (n["distractor_scatter"])
            m.distractor_scatter = count(n["distractor_scatter"], "voter.distractor_scatter", 1);
        if (const auto d = n["distractors"]) {
            if (!d.IsSequence())
                fail(d, "voter.distractors must be a list");
            m.distractors.clear();
            for (const auto& v : d)
                m.distractors.push_back(scalar<int>(v, "distractor"));
        }
        if (const auto e = n["entropy"]) {
            const auto s = scalar<std::string>(e, "voter.entropy");
            if (s == "informative")
                m.entropy = sim::EntropyModel::informative;
            else if (s == "flat")
                m.entropy = sim::EntropyModel::flat;
            else
                fail(e, fmt::format("unknown entropy model '{}'", s));
        }
        if (const auto l = n["latency"]) {
            require_map(l, "voter.latency");
            only_keys(l, {"mean_s", "jitter"});
            if (l["mean_s"])
                m.latency.mean_s = scalar<double>(l["mean_s"], "latency.mean_s");
            if (l["jitter"])
                m.latency.jitter = scalar<double>(l["jitter"], "latency.jitter");
            if (!(m.latency.mean_s > 0.0) || !(m.latency.jitter >= 0.0))
                fail(l, "latency needs mean_s > 0 and jitter >= 0");
        }
        if (n["true_answer"])
            m.true_answer = scalar<int>(n["true_answer"], "voter.true_answer");
    }

    MixerConfig mixer(const YAML::Node& n) const
    {
        require_map(n, "mixer");
        only_keys(n, {"name", "counts"});
        MixerConfig m;
        if (n["name"])
            m.name = scalar<std::string>(n["name"], "mixer.name");
        const auto c = n["counts"];
        if (!c)
            fail(n, "mixer needs counts");
        require_map(c, "mixer.counts");
        for (const auto& kv : c)
            m.counts_by_strategy.emplace_back(kv.first.as<std::string>(), count(kv.second, "mixer count", 0));
        if (m.name.empty())
            m.name = m.describe();
        try {
            m.validate();
        } catch (const std::invalid_argument& e) {
            fail(n, e.what());
        }
        return m;
    }

    const std::string& origin() const { return origin_; }

private:
    std::string origin_;
};

} // namespace

ContestConfig Scenario::contest_config(const MixerConfig& mixer) const
{
    ContestConfig c;
    c.label = label;
    c.mixer = mixer;
    c.budget = budget;
    c.vote = vote;
    c.seed = seed;
    c.n_problems = problems;
    c.source = sim::to_json(voter);
    return c;
}

Scenario parse_scenario(std::string_view text, const std::string& origin)
{
    const Reader rd(origin);
    YAML::Node root;
    try {
        root = YAML::Load(std::string(text));
    } catch (const YAML::ParserException& e) {
        throw ScenarioError(origin, e.mark.line + 1, e.mark.column + 1, e.msg);
    }
    if (!root.IsMap())
        rd.fail(root, "scenario must be a mapping");
    rd.only_keys(root, {"label", "seed", "replications", "problems", "preset", "voter", "mixer", "mixers", "vote",
                        "budget"});

    Scenario s;
    if (root["label"])
        s.label = rd.scalar<std::string>(root["label"], "label");
    if (s.label.empty() || s.label.find_first_of("/\\") != std::string::npos)
        rd.fail(root["label"], "label must be a non-empty name without path separators");
    if (root["seed"])
        s.seed = rd.scalar<std::uint64_t>(root["seed"], "seed");
    if (root["replications"])
        s.replications = rd.count(root["replications"], "replications", 1);
    if (root["problems"])
        s.problems = rd.count(root["problems"], "problems", 0);

    s.voter.accuracy_by_strategy = {{sim::strategy::original, 0.69}};
    if (const auto p = root["preset"]) {
        const auto name = rd.scalar<std::string>(p, "preset");
        const auto preset = sim::find_preset(name);
        if (!preset)
            rd.fail(p, fmt::format("unknown preset '{}'", name));
        s.preset = name;
        s.voter.accuracy_by_strategy = {{sim::strategy::original, preset->p}};
        s.mixers = {single_strategy_mixer(sim::strategy::original, preset->n_attempts, name)};
    }
    if (root["voter"])
        rd.voter(root["voter"], s.voter);

    if (root["mixer"] && root["mixers"])
        rd.fail(root["mixers"], "give either mixer or mixers, not both");
    if (const auto m = root["mixer"])
        s.mixers = {rd.mixer(m)};
    if (const auto ms = root["mixers"]) {
        if (ms.IsScalar() && ms.Scalar() == "table") {
            s.mixers = sim::table_mixers();
        } else {
            if (!ms.IsSequence() || ms.size() == 0)
                rd.fail(ms, "mixers must be 'table' or a non-empty list");
            s.mixers.clear();
            for (const auto& m : ms)
                s.mixers.push_back(rd.mixer(m));
        }
    }
    if (s.mixers.empty())
        s.mixers = {single_strategy_mixer(sim::strategy::original, 8, "baseline")};
    for (std::size_t i = 0; i < s.mixers.size(); ++i)
        for (std::size_t j = 0; j < i; ++j)
            if (s.mixers[i].name == s.mixers[j].name)
                rd.fail(root["mixers"], fmt::format("duplicate mixer name '{}'", s.mixers[i].name));

    if (const auto v = root["vote"]) {
        rd.require_map(v, "vote");
        rd.only_keys(v, {"early_stop", "quorum", "trivial_max"});
        if (v["early_stop"])
            s.vote.early_stop = rd.scalar<bool>(v["early_stop"], "vote.early_stop");
        if (v["quorum"])
            s.vote.quorum = rd.count(v["quorum"], "vote.quorum", 1);
        if (v["trivial_max"])
            s.vote.trivial_max = rd.scalar<int>(v["trivial_max"], "vote.trivial_max");
    }
    if (const auto b = root["budget"]) {
        try {
            s.budget = budget::budget_from_yaml(b);
        } catch (const std::exception& e) {
            rd.fail(b, e.what());
        }
    }

    const YAML::Node where = root["voter"] ? root["voter"] : root;
    for (const auto& m : s.mixers) {
        for (const auto& [label, count] : m.counts_by_strategy) {
            bool known = false;
            for (const auto& [l, p] : s.voter.accuracy_by_strategy)
                known = known || l == label;
            if (!known && count > 0)
                rd.fail(where, fmt::format("mixer '{}' uses strategy '{}' with no accuracy", m.name, label));
        }
        try {
            s.voter.validate(m.n_total());
        } catch (const std::invalid_argument& e) {
            rd.fail(where, e.what());
        }
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw ScenarioError(path.string(), 0, 0, "cannot open file");
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_scenario(ss.str(), path.string());
}

} // namespace mixvote
