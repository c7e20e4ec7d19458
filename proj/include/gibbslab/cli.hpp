#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "gibbslab/lattice.hpp"
#include "gibbslab/models.hpp"

namespace gibbslab::cli {

inline constexpr const char* kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kCheckFailed = 1, kUsage = 2, kResourceLimit = 3 };

class UsageError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ExperimentSpec {
  std::string command;                           // e.g. "scan shield"
  std::map<std::string, std::string> parameters;  // resolved, defaults included
  std::uint64_t seed = 1;
  std::string out;  // empty: standard output
  std::string format = "json";
};

// key=value lines; blank lines and lines starting with '#' are skipped.
std::map<std::string, std::string> parse_config_text(const std::string& text);
std::map<std::string, std::string> read_config_file(const std::string& path);

// "edge", "path:K", "box:N", "block:CxR", "triangle", "star".
Domain parse_domain(const std::string& spec);
// "free", "wired", or "blocks:0-1|2-3" with indices into d.boundary().
BoundaryCondition parse_bc(const Domain& d, const std::string& spec);
// Hexagonal domain with 1, 2 or 3 mutually adjacent inner faces.
FaceDomain parse_hex_faces(const std::string& spec);
std::vector<int> parse_int_list(const std::string& text);

// %.17g in the C locale.
std::string format_double(double v);

// Parses argv, runs the command and writes its output. Returns the exit code;
// diagnostics go to err.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace gibbslab::cli
