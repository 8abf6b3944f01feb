#pragma once

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

namespace nodal::cli {

inline constexpr std::uint64_t kDefaultSeed = 1;

inline constexpr int kExitOk = 0;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitIo = 3;

// Parses args (without the program name) and runs one subcommand: portrait,
// cns, dns, torus, lattice, flips or stability.  Reports go to files when an
// output path is given and to `out` otherwise; diagnostics and timing go to
// `err`.  Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nodal::cli
