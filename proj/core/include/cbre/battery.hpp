#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace cbre {

inline constexpr std::uint64_t kDefaultBatterySeed = 90210;

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    double seconds = 0.0;
};

// The twelve cross-validation criteria gating a release, in order. Each one
// is self-contained: it builds its own mechanisms, environments and streams
// from the master seed.
std::vector<CriterionResult> run_battery(std::uint64_t master_seed = kDefaultBatterySeed);

CriterionResult run_criterion(int id, std::uint64_t master_seed = kDefaultBatterySeed);

std::string format_result(const CriterionResult& result);

}  // namespace cbre
