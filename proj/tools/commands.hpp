#pragma once

#include <iosfwd>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "magicspin/config.hpp"
#include "magicspin/table.hpp"

namespace magicspin::cli {

enum ExitCode { ok = 0, runtime_failure = 1, usage_error = 2, infeasible = 3 };

/// Refusals that are the caller's fault (too many spins for exact dynamics, missing sections).
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Options {
  int threads = 1;
  std::optional<std::uint64_t> seed;
};

/// One named table per output; the first goes to --out, the rest to <out stem>_<name>.<ext>.
struct Output {
  std::vector<std::pair<std::string, Table>> tables;
};

Output cmd_design(const RunConfig& rc, const Options& opt, std::ostream& log);
Output cmd_simulate(const RunConfig& rc, const Options& opt, std::ostream& log);
Output cmd_map(const RunConfig& rc, const Options& opt, std::ostream& log);
Output cmd_scan(const RunConfig& rc, const Options& opt, std::ostream& log);
Output cmd_optimize(const RunConfig& rc, const Options& opt, std::ostream& log);

}  // namespace magicspin::cli
