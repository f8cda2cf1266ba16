#pragma once

#include <string>
#include <vector>

namespace tubal {

struct SelftestResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

/// Quick pass over the library's core invariants: algebra oracles, t-SVD
/// contract, sensing identities, gradient checks, decomposition
/// orthogonality, file round trips. Seconds, not minutes.
std::vector<SelftestResult> run_selftest();

}  // namespace tubal
