#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace m1path {

inline constexpr std::uint64_t kDefaultSeed = 20240607;

// Seed used when --seed is absent: M1PATH_SEED if set, else kDefaultSeed.
std::uint64_t default_seed();

std::string version_string();

// Dispatches the subcommands. args excludes the program name. Returns 0 on
// success, 1 on a domain or input error, 2 on a usage error.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run(int argc, const char* const* argv);

}  // namespace m1path
