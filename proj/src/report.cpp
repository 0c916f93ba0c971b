// SPDX-License-Identifier: Apache-2.0
#include "mixvote/report.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <fmt/format.h>

#include "mixvote/stats.hpp"

namespace mixvote::report {

std::string csv_field(std::string_view s)
{
    if (s.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(s);
    std::string out = "\"";
    for (char c : s) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

std::string csv_number(double v)
{
    auto s = fmt::format("{:.4f}", v);
    if (s == "-0.0000")
        s = "0.0000";
    return s;
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

CsvTable& CsvTable::row(std::vector<std::string> fields)
{
    if (fields.size() != header_.size())
        throw std::invalid_argument("CsvTable: row width does not match the header");
    rows_.push_back(std::move(fields));
    return *this;
}

std::string CsvTable::str(std::string_view provenance) const
{
    std::string out;
    if (!provenance.empty()) {
        out += "# ";
        out += provenance;
        out += "\r\n";
    }
    auto line = [&](const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i) {
            if (i)
                out += ',';
            out += csv_field(fields[i]);
        }
        out += "\r\n";
    };
    line(header_);
    for (const auto& r : rows_)
        line(r);
    return out;
}

std::string provenance_line(std::string_view config_hash, std::string_view seed)
{
    return fmt::format("mixvote {} config_hash={} seed={}", kToolVersion, config_hash, seed);
}

namespace {

constexpr double kWidth = 640, kHeight = 420;
constexpr double kLeft = 70, kRight = 150, kTop = 40, kBottom = 50;
constexpr const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b", "#17becf"};

std::string xml_escape(std::string_view s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
        case '&': out += "&amp;"; break;
        case '<': out += "&lt;"; break;
        case '>': out += "&gt;"; break;
        case '"': out += "&quot;"; break;
        default: out += c;
        }
    }
    return out;
}

const char* color(std::size_t i)
{
    return kPalette[i % std::size(kPalette)];
}

} // namespace

std::string Chart::svg() const
{
    const double pw = kWidth - kLeft - kRight, ph = kHeight - kTop - kBottom;
    const double xs = x_max > x_min ? pw / (x_max - x_min) : 1.0;
    const double ys = y_max > y_min ? ph / (y_max - y_min) : 1.0;
    auto px = [&](double x) { return kLeft + (std::clamp(x, x_min, x_max) - x_min) * xs; };
    auto py = [&](double y) { return kTop + ph - (std::clamp(y, y_min, y_max) - y_min) * ys; };

    std::string s = fmt::format(
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
        "font-family=\"sans-serif\" font-size=\"12\">\n"
        "<rect width=\"{0}\" height=\"{1}\" fill=\"white\"/>\n"
        "<text x=\"{2:.1f}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n"
        "<text x=\"{2:.1f}\" y=\"{4:.1f}\" text-anchor=\"middle\">{5}</text>\n"
        "<text x=\"16\" y=\"{6:.1f}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {6:.1f})\">{7}</text>\n"
        "<rect x=\"{8:.1f}\" y=\"{9:.1f}\" width=\"{10:.1f}\" height=\"{11:.1f}\" fill=\"none\" stroke=\"#333\"/>\n",
        kWidth, kHeight, kLeft + pw / 2, xml_escape(title), kHeight - 12, xml_escape(x_label), kTop + ph / 2,
        xml_escape(y_label), kLeft, kTop, pw, ph);

    for (int i = 0; i <= 5; ++i) {
        const double xv = x_min + (x_max - x_min) * i / 5.0;
        const double yv = y_min + (y_max - y_min) * i / 5.0;
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"middle\">{:.3g}</text>\n", px(xv),
                         kTop + ph + 18, xv);
        s += fmt::format("<text x=\"{:.1f}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", kLeft - 6,
                         py(yv) + 4, yv);
    }
    for (double r : h_rules)
        s += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#888\" "
                         "stroke-dasharray=\"4 3\"/>\n",
                         kLeft, py(r), kLeft + pw, py(r));
    for (double r : v_rules)
        s += fmt::format("<line x1=\"{:.1f}\" y1=\"{:.1f}\" x2=\"{:.1f}\" y2=\"{:.1f}\" stroke=\"#d62728\" "
                         "stroke-dasharray=\"4 3\"/>\n",
                         px(r), kTop, px(r), kTop + ph);

    for (std::size_t i = 0; i < series.size(); ++i) {
        const auto& ser = series[i];
        if (i == 0 && bar_width) {
            for (const auto& p : ser.points) {
                const double x0 = px(p.x - *bar_width / 2), x1 = px(p.x + *bar_width / 2);
                s += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"{:.1f}\" height=\"{:.1f}\" fill=\"{}\"/>\n",
                                 x0, py(p.y), std::max(0.5, x1 - x0 - 1), py(y_min) - py(p.y), color(i));
            }
        } else if (ser.line) {
            std::string pts;
            for (const auto& p : ser.points)
                pts += fmt::format("{}{:.1f},{:.1f}", pts.empty() ? "" : " ", px(p.x), py(p.y));
            s += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", color(i),
                             pts);
        } else {
            for (const auto& p : ser.points)
                s += fmt::format("<circle cx=\"{:.1f}\" cy=\"{:.1f}\" r=\"3\" fill=\"{}\"/>\n", px(p.x), py(p.y),
                                 color(i));
        }
        const double ly = kTop + 14 + 18 * static_cast<double>(i);
        s += fmt::format("<rect x=\"{:.1f}\" y=\"{:.1f}\" width=\"10\" height=\"10\" fill=\"{}\"/>\n"
                         "<text x=\"{:.1f}\" y=\"{:.1f}\">{}</text>\n",
                         kLeft + pw + 12, ly - 9, color(i), kLeft + pw + 28, ly, xml_escape(ser.label));
    }
    s += "</svg>\n";
    return s;
}

namespace {

std::string counts_of(const nlohmann::json& mixer, int& n_total)
{
    std::string out;
    n_total = 0;
    if (!mixer.is_object() || !mixer.contains("counts"))
        return out;
    for (const auto& c : mixer["counts"]) {
        const int k = c.value("count", 0);
        n_total += k;
        out += (out.empty() ? "" : "+") + std::to_string(k);
    }
    return out;
}

} // namespace

ReportBundle analyze_logs(const std::vector<NamedLog>& logs)
{
    ReportBundle b;
    std::vector<std::vector<stats::RunCounts>> pooled;
    std::map<std::pair<std::string, std::string>, std::size_t> group_index;
    std::vector<std::pair<long, long>> answered_correct;
    auto hashes = nlohmann::json::array();
    std::optional<std::string> common_seed;
    bool mixed_seeds = false;

    for (const auto& [name, parsed] : logs) {
        const auto& rec = parsed.record;
        const auto& cfg = rec.config;
        b.corrupt_lines += parsed.corrupt_lines;

        RunRow run;
        run.run = name;
        run.label = cfg.is_object() ? cfg.value("label", std::string{}) : rec.label;
        if (run.label.empty())
            run.label = rec.label.empty() ? "unlabelled" : rec.label;
        const nlohmann::json mixer = cfg.is_object() && cfg.contains("mixer") ? cfg["mixer"] : nlohmann::json{};
        run.mixer = mixer.is_object() ? mixer.value("name", std::string{}) : std::string{};
        run.seed = parsed.has_footer ? std::to_string(rec.seed) : std::string{};
        run.score = rec.all_keys_known() ? std::optional<int>(rec.score()) : std::nullopt;
        run.config_hash = parsed.config_hash.empty() ? config_hash(cfg) : parsed.config_hash;
        hashes.push_back(run.config_hash);
        if (!common_seed)
            common_seed = run.seed;
        else if (*common_seed != run.seed)
            mixed_seeds = true;

        const auto key = std::make_pair(run.label, run.mixer);
        auto it = group_index.find(key);
        if (it == group_index.end()) {
            it = group_index.emplace(key, b.groups.size()).first;
            GroupRow g;
            g.label = run.label;
            g.mixer = run.mixer;
            g.counts = counts_of(mixer, g.n_total);
            b.groups.push_back(std::move(g));
            answered_correct.emplace_back(0, 0);
            pooled.emplace_back();
        }
        auto& g = b.groups[it->second];
        auto& [answered_total, correct_total] = answered_correct[it->second];
        if (run.score) {
            g.scores.push_back(*run.score);
            ++b.histogram[*run.score];
        }

        for (const auto& p : rec.problems) {
            ++b.problems;
            if (!p.answer_key) {
                ++b.excluded;
                continue;
            }
            int n = 0, vc = 0;
            for (const auto& a : p.attempts) {
                if (!a.answer)
                    continue;
                ++n;
                vc += *a.answer == *p.answer_key;
            }
            answered_total += n;
            correct_total += vc;
            if (n >= 2 && n == g.n_total)
                pooled[it->second].push_back({n, vc});
            if (n < 2 || vc == 0 || vc == n) {
                ++b.excluded;
                continue;
            }
            const auto est = stats::mom_rho(n, vc);
            b.correlation.push_back(
                {name, p.problem_id, run.label, n, vc, est.p_hat, est.rho_hat, p.final_answer == *p.answer_key});
        }
        b.runs.push_back(std::move(run));
    }

    for (std::size_t i = 0; i < b.groups.size(); ++i) {
        auto& g = b.groups[i];
        if (answered_correct[i].first > 0)
            g.p_hat = static_cast<double>(answered_correct[i].second) / static_cast<double>(answered_correct[i].first);
        if (g.scores.empty())
            continue;
        g.min = *std::min_element(g.scores.begin(), g.scores.end());
        g.max = *std::max_element(g.scores.begin(), g.scores.end());
        if (g.scores.size() == 1) {
            g.mean = g.scores.front();
            continue;
        }
        const auto d = stats::summarize_runs(g.scores);
        g.mean = d.mu;
        g.sigma = d.sigma;
        g.se = d.sigma / std::sqrt(static_cast<double>(g.scores.size()));
    }

    for (std::size_t i = 0; i < b.groups.size(); ++i) {
        try {
            if (!pooled[i].empty())
                b.groups[i].pooled_rho = stats::pooled_rho(pooled[i]);
        } catch (const stats::UndefinedEstimate&) {
        }
    }
    b.provenance =
        provenance_line(config_hash(hashes), mixed_seeds ? std::string("mixed") : common_seed.value_or(std::string{}));
    return b;
}

std::vector<LotteryRow> lottery_table(double mu, double sigma, double target, int k)
{
    if (k < 1)
        throw std::invalid_argument("lottery: k must be at least 1");
    const double p = stats::lottery_single(mu, sigma, target);
    std::vector<LotteryRow> rows;
    for (int i = 1; i <= k; ++i)
        rows.push_back({i, stats::lottery_max_over_k(p, i)});
    return rows;
}

CsvTable p_vs_score_table(const std::vector<int>& sizes, int n_problems)
{
    std::vector<std::string> header{"p"};
    for (int n : sizes)
        header.push_back(fmt::format("score_n{}", n));
    CsvTable t(header);
    for (int i = 0; i <= 100; ++i) {
        const double p = i / 100.0;
        std::vector<std::string> row{csv_number(p)};
        for (int n : sizes)
            row.push_back(csv_number(stats::ScoreModel{p, n, stats::majority_threshold(n), n_problems}.expected_score()));
        t.row(std::move(row));
    }
    return t;
}

namespace {

constexpr int kLotteryK = 20;
constexpr double kLotteryTarget = 44.0;
const std::vector<int> kCurveSizes{8, 16, 32};

std::string group_name(const GroupRow& g)
{
    return g.mixer.empty() || g.mixer == g.label ? g.label : g.label + "/" + g.mixer;
}

} // namespace

std::map<std::string, std::string> ReportBundle::files() const
{
    std::map<std::string, std::string> out;
    const auto opt_number = [](const std::optional<double>& v) { return v ? csv_number(*v) : std::string{}; };

    CsvTable summary({"key", "value"});
    summary.row({"logs", std::to_string(runs.size())})
        .row({"problems", std::to_string(problems)})
        .row({"correlation_points", std::to_string(correlation.size())})
        .row({"excluded_points", std::to_string(excluded)})
        .row({"corrupt_lines", std::to_string(corrupt_lines)});
    out["summary.csv"] = summary.str(provenance);

    CsvTable runs_t({"run", "label", "mixer", "seed", "score", "config_hash"});
    for (const auto& r : runs)
        runs_t.row({r.run, r.label, r.mixer, r.seed, r.score ? std::to_string(*r.score) : "", r.config_hash});
    out["runs.csv"] = runs_t.str(provenance);

    CsvTable mixers(
        {"label", "mixer", "counts", "n_total", "runs", "mean", "sigma", "se", "min", "max", "p_hat", "pooled_rho"});
    for (const auto& g : groups)
        mixers.row({g.label, g.mixer, g.counts, std::to_string(g.n_total), std::to_string(g.scores.size()),
                    csv_number(g.mean), csv_number(g.sigma), csv_number(g.se), std::to_string(g.min),
                    std::to_string(g.max), opt_number(g.p_hat), opt_number(g.pooled_rho)});
    out["mixers.csv"] = mixers.str(provenance);

    const GroupRow* base = nullptr;
    for (const auto& g : groups)
        if (!base && g.mixer == "baseline" && !g.scores.empty())
            base = &g;
    for (const auto& g : groups)
        if (!base && !g.scores.empty())
            base = &g;
    CsvTable ablation({"label", "mixer", "counts", "runs", "mean_score", "delta"});
    for (const auto& g : groups) {
        if (g.scores.empty())
            continue;
        ablation.row({g.label, g.mixer, g.counts, std::to_string(g.scores.size()), csv_number(g.mean),
                      &g == base ? std::string{} : csv_number(g.mean - base->mean)});
    }
    out["ablation.csv"] = ablation.str(provenance);

    CsvTable corr({"run", "problem_id", "model", "n", "correct_votes", "p_hat", "rho_hat", "final_correct"});
    Chart corr_chart{"Per-problem rho vs p", "p_hat", "rho_hat", 0.0, 1.0, -1.0, 0.5, {}, {0.0}, {}, {}};
    std::map<std::string, std::size_t> model_series;
    for (const auto& c : correlation) {
        corr.row({c.run, c.problem_id, c.model, std::to_string(c.n), std::to_string(c.correct_votes),
                  csv_number(c.p_hat), csv_number(c.rho_hat), c.final_correct ? "1" : "0"});
        auto [it, fresh] = model_series.emplace(c.model, corr_chart.series.size());
        if (fresh)
            corr_chart.series.push_back({c.model, {}, false});
        corr_chart.series[it->second].points.push_back({c.p_hat, c.rho_hat});
    }
    out["correlation.csv"] = corr.str(provenance);
    out["correlation.svg"] = corr_chart.svg();

    CsvTable hist({"score", "runs"});
    Chart hist_chart{"Score distribution", "score", "runs", 0.0, 50.0, 0.0, 1.0, {{"runs", {}, false}}, {}, {}, 1.0};
    for (const auto& [score, n] : histogram) {
        hist.row({std::to_string(score), std::to_string(n)});
        hist_chart.series[0].points.push_back({static_cast<double>(score), static_cast<double>(n)});
        hist_chart.y_max = std::max(hist_chart.y_max, static_cast<double>(n));
        hist_chart.x_max = std::max(hist_chart.x_max, static_cast<double>(score) + 1);
    }
    out["histogram.csv"] = hist.str(provenance);
    out["histogram.svg"] = hist_chart.svg();

    out["p_vs_score.csv"] = p_vs_score_table(kCurveSizes).str(provenance);
    Chart curve{"Expected majority-vote score", "per-attempt accuracy p", "expected score", 0.0, 1.0, 0.0, 50.0,
                {}, {}, {}, {}};
    for (int n : kCurveSizes) {
        Series s{fmt::format("N={}", n), {}, true};
        for (int i = 0; i <= 100; ++i) {
            const double p = i / 100.0;
            s.points.push_back({p, stats::ScoreModel{p, n, stats::majority_threshold(n), 50}.expected_score()});
        }
        curve.series.push_back(std::move(s));
    }
    Series observed{"observed", {}, false};
    for (const auto& g : groups)
        if (g.p_hat && !g.scores.empty())
            observed.points.push_back({*g.p_hat, g.mean});
    if (!observed.points.empty())
        curve.series.push_back(std::move(observed));
    out["p_vs_score.svg"] = curve.svg();

    CsvTable lot({"label", "mixer", "mu", "sigma", "target", "k", "p_max"});
    Chart lot_chart{"P(max >= 44) over K submissions", "K", "probability", 1.0, kLotteryK, 0.0, 1.0, {}, {}, {13.0},
                    {}};
    for (const auto& g : groups) {
        if (g.scores.size() < 2 || !(g.sigma > 0.0))
            continue;
        Series s{group_name(g), {}, true};
        for (const auto& r : lottery_table(g.mean, g.sigma, kLotteryTarget, kLotteryK)) {
            lot.row({g.label, g.mixer, csv_number(g.mean), csv_number(g.sigma), csv_number(kLotteryTarget),
                     std::to_string(r.k), csv_number(r.probability)});
            s.points.push_back({static_cast<double>(r.k), r.probability});
        }
        lot_chart.series.push_back(std::move(s));
    }
    out["lottery.csv"] = lot.str(provenance);
    out["lottery.svg"] = lot_chart.svg();
    return out;
}

} // namespace mixvote::report
