// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>

namespace YAML { class Node; }

namespace mixvote::budget {

/// Wall-clock constants for one contest. All values in seconds.
struct BudgetConfig {
    double total_limit = 18000.0;
    double infra_reserve = 540.0;
    double startup_reserve = 360.0;
    double base_timeout = 300.0;
    double max_timeout = 900.0;
    double session_timeout = 960.0;
    double hard_deadline_floor = 30.0;

    [[nodiscard]] double solving_budget() const noexcept { return total_limit - infra_reserve - startup_reserve; }
    void validate() const;
    bool operator==(const BudgetConfig&) const = default;
};

/// Reads the `*_s` keys of a YAML mapping; missing keys keep their defaults.
BudgetConfig budget_from_yaml(const YAML::Node& node);

struct BudgetState {
    double time_left = 0.0;
    int problems_remaining = 0;
    bool operator==(const BudgetState&) const = default;
};

BudgetState initial_state(const BudgetConfig& config, int n_problems = 50);

/// Either a per-problem budget in seconds or the immediate-fallback signal.
struct Allocation {
    bool fallback = false;
    double seconds = 0.0;

    static Allocation immediate_fallback() noexcept { return {true, 0.0}; }
    static Allocation budget(double s) noexcept { return {false, s}; }
    bool operator==(const Allocation&) const = default;
};

/// Equal division of the remaining time, capped at max_timeout; fallback
/// when less than hard_deadline_floor remains.
Allocation allocate(const BudgetState& state, const BudgetConfig& config);

/// Charges `elapsed` (floored at zero remaining) and consumes one problem.
BudgetState advance(const BudgetState& state, double elapsed);

} // namespace mixvote::budget
