// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "mixvote/run_log.hpp"

namespace mixvote::report {

inline constexpr const char* kToolVersion = "0.1.0";

/// RFC 4180 field: quoted when it contains a comma, quote, CR or LF.
std::string csv_field(std::string_view s);
/// Fixed four decimals, never "-0.0000".
std::string csv_number(double v);

class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header);
    CsvTable& row(std::vector<std::string> fields);
    [[nodiscard]] std::size_t size() const noexcept { return rows_.size(); }
    /// `provenance` becomes a leading "# ..." line when non-empty. Lines end
    /// with CRLF.
    [[nodiscard]] std::string str(std::string_view provenance = {}) const;

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

std::string provenance_line(std::string_view config_hash, std::string_view seed);

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Series {
    std::string label;
    std::vector<Point> points;
    bool line = true;
};

/// Fixed-layout SVG chart built from string templates.
struct Chart {
    std::string title;
    std::string x_label;
    std::string y_label;
    double x_min = 0.0, x_max = 1.0, y_min = 0.0, y_max = 1.0;
    std::vector<Series> series;
    std::vector<double> h_rules;
    std::vector<double> v_rules;
    /// Draws the first series as bars of this width instead.
    std::optional<double> bar_width;

    [[nodiscard]] std::string svg() const;
};

/// One input log, named after its file stem.
struct NamedLog {
    std::string name;
    ParsedLog log;
};

struct CorrelationPoint {
    std::string run;
    std::string problem_id;
    std::string model;
    int n = 0;
    int correct_votes = 0;
    double p_hat = 0.0;
    double rho_hat = 0.0;
    bool final_correct = false;
};

struct RunRow {
    std::string run;
    std::string label;
    std::string mixer;
    std::string seed;
    std::optional<int> score;
    std::string config_hash;
};

struct GroupRow {
    std::string label;
    std::string mixer;
    std::string counts;
    int n_total = 0;
    std::vector<int> scores;
    double mean = 0.0;
    double sigma = 0.0;
    double se = 0.0;
    int min = 0;
    int max = 0;
    /// Fraction of answered attempts that were correct.
    std::optional<double> p_hat;
    /// Pooled estimate over the problems where all n_total attempts answered.
    std::optional<double> pooled_rho;
};

struct ReportBundle {
    std::vector<RunRow> runs;
    std::vector<GroupRow> groups;
    std::vector<CorrelationPoint> correlation;
    int problems = 0;
    int excluded = 0;
    int corrupt_lines = 0;
    std::map<int, int> histogram;
    std::string provenance;

    /// File name to contents; identical inputs give identical bytes.
    [[nodiscard]] std::map<std::string, std::string> files() const;
};

/// Builds the report from logs in the given order. A problem yields a
/// correlation point when its key is known and 0 < correct < answered.
ReportBundle analyze_logs(const std::vector<NamedLog>& logs);

struct LotteryRow {
    int k = 0;
    double probability = 0.0;
};

std::vector<LotteryRow> lottery_table(double mu, double sigma, double target, int k);

/// Expected score against per-attempt accuracy for several vote sizes.
CsvTable p_vs_score_table(const std::vector<int>& sizes, int n_problems = 50);

} // namespace mixvote::report
