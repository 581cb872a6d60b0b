#pragma once

#include <stdexcept>
#include <string>

#include "jarvis/lp_partition.hpp"
#include "jarvis/simulator.hpp"

namespace jarvis {

// Config file syntax errors, message prefixed "path:line: ".
struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Parses the sectioned key = value experiment config format. `path` is used
// only to anchor error messages. Unknown sections or keys are errors; every
// key has a default, so an empty file is a valid config. Also validates the
// result via validate().
ExperimentConfig parse_config(const std::string& text, const std::string& path);
ExperimentConfig load_config(const std::string& path);

// Canonical serialization; parse(serialize(cfg)) == cfg.
std::string serialize_config(const ExperimentConfig& cfg);

// LP instance files for `solve`: lines `m`, `n_records`, `budget`, `c`, `r`.
PartitionProblem parse_instance(const std::string& text, const std::string& path);
PartitionProblem load_instance(const std::string& path);

}  // namespace jarvis
