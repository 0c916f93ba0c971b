// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>

namespace mixvote {

/// System prompt per strategy label plus the preference text appended to
/// every user message.
struct StrategyPromptSet {
    std::map<std::string, std::string, std::less<>> system_prompts;
    std::string preference;

    [[nodiscard]] bool has(std::string_view label) const { return system_prompts.find(label) != system_prompts.end(); }
    /// Throws std::out_of_range for unknown labels.
    [[nodiscard]] const std::string& system_prompt(std::string_view label) const;
    /// Problem text followed by the preference prompt.
    [[nodiscard]] std::string user_message(std::string_view problem) const;
};

/// Loads `<label>.txt` for every text file in `dir`; `preference.txt` becomes
/// the preference prompt. File contents are used byte for byte.
StrategyPromptSet load_prompt_dir(const std::filesystem::path& dir);

} // namespace mixvote
