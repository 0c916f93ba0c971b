// SPDX-License-Identifier: Apache-2.0
#include "mixvote/prompts.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace mixvote {

const std::string& StrategyPromptSet::system_prompt(std::string_view label) const
{
    const auto it = system_prompts.find(label);
    if (it == system_prompts.end())
        throw std::out_of_range("no system prompt for strategy '" + std::string(label) + "'");
    return it->second;
}

std::string StrategyPromptSet::user_message(std::string_view problem) const
{
    std::string msg(problem);
    if (!preference.empty()) {
        msg += "\n\n";
        msg += preference;
    }
    return msg;
}

StrategyPromptSet load_prompt_dir(const std::filesystem::path& dir)
{
    namespace fs = std::filesystem;
    if (!fs::is_directory(dir))
        throw std::invalid_argument("prompt directory not found: " + dir.string());
    StrategyPromptSet set;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file() || entry.path().extension() != ".txt")
            continue;
        std::ifstream in(entry.path(), std::ios::binary);
        std::ostringstream body;
        body << in.rdbuf();
        const auto label = entry.path().stem().string();
        if (label == "preference")
            set.preference = body.str();
        else
            set.system_prompts[label] = body.str();
    }
    return set;
}

} // namespace mixvote
