#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "evokit/config.hpp"

namespace evokit {

struct RunContext {
  std::string out_dir = "out";
  int jobs = 1;
  bool oracle = false;
};

// Runs one config (any mode), writes <name>_*.csv into ctx.out_dir and returns the
// one-line summary.
std::string run_config(const ProblemConfig& cfg, const RunContext& ctx);

// 0 success, 2 validation error, 3 numerical failure.
int exit_code_for(const std::exception& e);

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, char** argv);

}  // namespace evokit
