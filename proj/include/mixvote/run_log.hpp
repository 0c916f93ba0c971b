// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <iosfwd>
#include <string>

#include <nlohmann/json.hpp>

#include "mixvote/contest.hpp"

namespace mixvote {

// Line-delimited JSON run log: one object per problem followed by a footer
// object carrying "footer": true. Doubles are written at full precision.

nlohmann::json to_json(const AttemptResult& a);
nlohmann::json to_json(const VoteTally& t);
nlohmann::json to_json(const ProblemRecord& p);
nlohmann::json footer_json(const RunRecord& r);

AttemptResult attempt_from_json(const nlohmann::json& j);
ProblemRecord problem_from_json(const nlohmann::json& j);

/// Writes problem lines as they arrive, flushing after each one.
class RunLogWriter {
public:
    explicit RunLogWriter(std::ostream& out) : out_(out) {}

    void problem(const ProblemRecord& p);
    void footer(const RunRecord& r);

private:
    std::ostream& out_;
};

void write_run_log(std::ostream& out, const RunRecord& record);
std::string run_log_string(const RunRecord& record);

struct ParsedLog {
    RunRecord record;
    bool has_footer = false;
    int corrupt_lines = 0;
    /// Footer's config hash, when present.
    std::string config_hash;
};

/// Reads a run log. Lines that are not valid problem or footer objects are
/// counted in corrupt_lines and skipped.
ParsedLog read_run_log(std::istream& in);

} // namespace mixvote
