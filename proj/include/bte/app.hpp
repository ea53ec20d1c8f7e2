#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace bte {

// The command-line tool: classify, transport, simulate-kinetic, simulate-fluid, converge, verify.
// Returns the process exit code; 0 only when every requested step succeeded.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Human-readable name of the limiting system for a regime identifier.
std::string regime_equation(const std::string& regime_id);

}  // namespace bte
