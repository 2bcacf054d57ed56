#pragma once

// The reproduction suite: one check per acceptance criterion, shared by the
// `verify` subcommand and the acceptance test binary.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "fiberdyn/parallel.hpp"

namespace fiberdyn::acceptance {

struct Result {
    int id = 0;
    std::string title;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

struct Options {
    std::uint64_t seed = 20240601;
    std::size_t jobs = 0;  // 0: available parallelism
};

inline constexpr int kCriteria = 11;

/// Runs criterion `id` (1..11); PreconditionError for other ids.
Result run(int id, const Options& options = {});
std::vector<Result> run_all(const Options& options = {});

/// "PASS  3  <title>  (<seconds> s)  <detail>"
std::string format(const Result& r);
/// Prints every line; returns true when all passed.
bool report(std::ostream& out, const std::vector<Result>& results);

}  // namespace fiberdyn::acceptance
