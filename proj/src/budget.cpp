// SPDX-License-Identifier: Apache-2.0
#include "mixvote/budget.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <yaml-cpp/yaml.h>

namespace mixvote::budget {

void BudgetConfig::validate() const
{
    for (double v : {total_limit, infra_reserve, startup_reserve, base_timeout, max_timeout, session_timeout,
                     hard_deadline_floor}) {
        if (!std::isfinite(v) || v < 0.0)
            throw std::invalid_argument("BudgetConfig: every duration must be finite and non-negative");
    }
    if (solving_budget() < 0.0)
        throw std::invalid_argument("BudgetConfig: reserves exceed the total limit");
    if (!(base_timeout <= max_timeout && max_timeout <= session_timeout))
        throw std::invalid_argument("BudgetConfig: need base_timeout <= max_timeout <= session_timeout");
}

BudgetConfig budget_from_yaml(const YAML::Node& node)
{
    BudgetConfig c;
    if (!node || node.IsNull())
        return c;
    if (!node.IsMap())
        throw std::invalid_argument("budget: expected a mapping");
    auto read = [&](const char* key, double& field) {
        if (const auto v = node[key])
            field = v.as<double>();
    };
    read("total_limit_s", c.total_limit);
    read("infra_reserve_s", c.infra_reserve);
    read("startup_reserve_s", c.startup_reserve);
    read("base_timeout_s", c.base_timeout);
    read("max_timeout_s", c.max_timeout);
    read("session_timeout_s", c.session_timeout);
    read("hard_deadline_floor_s", c.hard_deadline_floor);
    for (const auto& kv : node) {
        static const char* known[] = {"total_limit_s",   "infra_reserve_s",   "startup_reserve_s",
                                      "base_timeout_s",  "max_timeout_s",     "session_timeout_s",
                                      "hard_deadline_floor_s"};
        const auto key = kv.first.as<std::string>();
        if (std::find(std::begin(known), std::end(known), key) == std::end(known))
            throw std::invalid_argument("budget: unknown key '" + key + "'");
    }
    c.validate();
    return c;
}

BudgetState initial_state(const BudgetConfig& config, int n_problems)
{
    if (n_problems < 0)
        throw std::invalid_argument("initial_state: negative problem count");
    return {config.solving_budget(), n_problems};
}

Allocation allocate(const BudgetState& state, const BudgetConfig& config)
{
    if (state.problems_remaining < 1)
        throw std::invalid_argument("allocate: no problems remaining");
    if (state.time_left < config.hard_deadline_floor)
        return Allocation::immediate_fallback();
    const double share = state.time_left / state.problems_remaining;
    return Allocation::budget(std::min({share, config.max_timeout, state.time_left}));
}

BudgetState advance(const BudgetState& state, double elapsed)
{
    if (!(elapsed >= 0.0))
        throw std::invalid_argument("advance: elapsed must be non-negative");
    if (state.problems_remaining < 1)
        throw std::invalid_argument("advance: no problems remaining");
    return {std::max(0.0, state.time_left - elapsed), state.problems_remaining - 1};
}

} // namespace mixvote::budget
