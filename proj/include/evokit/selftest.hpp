#pragma once

#include <ostream>
#include <string>
#include <vector>

#include "evokit/cli.hpp"

namespace evokit {

struct SelftestResult {
  std::string name;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
};

// Quick closed-form and identity checks; with full, also every *.json problem config in
// config_dir (law description files under laws/ are skipped).
std::vector<SelftestResult> run_selftest(bool full, const RunContext& ctx, const std::string& config_dir,
                                         std::ostream& out);

// Directory of the shipped configs, fixed at build time.
std::string default_config_dir();

}  // namespace evokit
