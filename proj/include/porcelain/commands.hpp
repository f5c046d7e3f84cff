#pragma once

#include <ostream>
#include <string_view>

#include "porcelain/config.hpp"

namespace porcelain {

// prepare | synth | train | evaluate | compare | report.
// Throws UnknownCommand and whatever the command propagates.
void run_command(std::string_view command, const ExperimentConfig& config, std::ostream& out);

// run_command with errors caught: returns 0 on success, otherwise prints one
// "error: <Code>: <detail>" line to `err` and returns 1.
int dispatch_command(std::string_view command, const ExperimentConfig& config, std::ostream& out, std::ostream& err);

}  // namespace porcelain
