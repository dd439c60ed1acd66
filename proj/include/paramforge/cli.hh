#pragma once

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace paramforge
{
    // Everything a run depends on. A config file supplies these, and flags override it.
    struct RunConfig
    {
        std::string profile;
        std::uint64_t seed = 1;
        std::optional<std::size_t> depth;
        std::size_t retries = 64;
        std::uint64_t budget = 100'000'000;
        std::string out;
        unsigned threads = 1;
        bool timings = true;
        bool expect_fail = false;
    };

    auto config_from_json(const nlohmann::json & j, RunConfig base = { }) -> RunConfig;

    struct RunResult
    {
        // 0 pass, 1 verified failure, 2 capacity or usage error
        int exit_code = 0;
        std::string report;
        std::string diagnostic;
        std::string out;
    };

    // args excludes the program name.
    auto run(const std::vector<std::string> & args) -> RunResult;
}
