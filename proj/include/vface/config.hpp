#pragma once

#include "vface/authenticate.hpp"
#include "vface/recognizer.hpp"

#include <cstdint>
#include <string>

namespace vface {

// Flat key=value configuration ('#' comments) covering every tunable
// default. Unknown keys are rejected; values are validated against the
// owning module's invariants. Precedence is flags > file > defaults.
struct ToolConfig {
    DetectorConfig detector;
    TrainOptions train;
    std::uint64_t seed = 1;

    // Applies one "key=value" assignment; throws std::invalid_argument on
    // unknown keys or invalid values.
    void set(const std::string& key, const std::string& value);
};

ToolConfig load_config(const std::string& path);

// Serialized form accepted back by load_config.
std::string config_to_string(const ToolConfig& config);

}  // namespace vface
