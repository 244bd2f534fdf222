#pragma once

// Randomized property suites shared by the property test binary and the
// acceptance runner. Each suite draws `cases` independent instances from a
// seeded generator and reports the failures it saw.

#include <cstdint>
#include <string>
#include <vector>

namespace confspec::testing {

struct PropertyResult {
    std::string name;
    int cases = 0;
    int failures = 0;
    int skipped = 0;         // instances rejected by a precondition (documented per suite)
    double worst = 0.0;      // largest observed violation measure
    std::vector<std::string> messages;  // first few failures

    bool ok() const { return failures == 0 && cases > 0; }
};

PropertyResult stiffness_row_sums(int cases, std::uint64_t seed);
PropertyResult scaling_invariance(int cases, std::uint64_t seed);
PropertyResult mass_monotonicity(int cases, std::uint64_t seed);
PropertyResult quasi_isometry(int cases, std::uint64_t seed);
PropertyResult gradient_finite_difference(int cases, std::uint64_t seed);
PropertyResult surgery_genus(int cases, std::uint64_t seed);

std::vector<PropertyResult> all_properties(int cases, std::uint64_t seed);

}  // namespace confspec::testing
