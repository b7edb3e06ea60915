#pragma once

// Seeded property suite over the module invariants.  Each property draws
// its own generator stream from (seed, property index), so results do not
// depend on execution order and the suite can fan out across threads.

#include "nangle/goodness.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace nangle {

struct PropertyResult {
    std::string name;
    std::uint64_t cases = 0;
    std::uint64_t failures = 0;
    std::string first_failure; // short description, empty when clean
};

struct PropertyRun {
    std::uint64_t seed = 0;
    std::uint64_t cases = 0;
    std::vector<PropertyResult> results;
    bool all_passed() const
    {
        for (const auto& r : results)
            if (r.failures != 0)
                return false;
        return true;
    }
};

PropertyRun run_properties(std::uint64_t seed, std::uint64_t cases, int jobs = 1);

} // namespace nangle
