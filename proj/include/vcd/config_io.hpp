#pragma once

#include <stdexcept>
#include <string>

#include "json.hpp"
#include "vcd/trainer.hpp"

namespace vcd::cfgio {

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Full effective config, every field present. Feeding this back through
// parse_config_json reproduces the config exactly.
nlohmann::ordered_json config_json(const train::TrainConfig& cfg);

// Starts from defaults; present keys override. Unknown or mistyped keys throw
// ConfigError naming the key path. Does not validate ranges; callers run
// cfg.validate() once overrides (seed flags etc.) are applied.
train::TrainConfig parse_config_json(const nlohmann::json& j);

// Same, from raw text. Syntax errors carry line and column plus the source
// name ("config.json:3:8: ..." style diagnostics read by humans).
train::TrainConfig parse_config_text(const std::string& text, const std::string& source);

train::TrainConfig load_config_file(const std::string& path);

}  // namespace vcd::cfgio
