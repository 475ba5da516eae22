#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "ccnv/scene.hpp"

namespace ccnv {

struct CommandOptions {
    std::optional<std::uint64_t> seed;
    std::optional<int> samples;
    std::string grid_out;  // classify only; empty means no export
};

struct CommandResult {
    std::string report;   // JSON, stable key order, no timing
    std::string summary;  // human-readable, same numbers
    bool pass = true;
};

inline constexpr const char* kToolVersion = "1.0.0";

// command is one of verify, classify, invariants, bracket. Evaluation
// failures throw Error with the offending point in the message.
CommandResult run_command(const std::string& command, const Scene& scene, const CommandOptions& options = {});

}  // namespace ccnv
