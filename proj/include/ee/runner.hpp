#pragma once

#include <string>

namespace ee {

// Executes one toolkit subcommand with a JSON configuration and returns the
// result as JSON. This is the layer both the C API and the CLI sit on.
// Throws Error on invalid configuration or failing I/O.
std::string run_command(const std::string& subcommand, const std::string& config_json);

}  // namespace ee
