#pragma once

#include "seqgen/stats.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace seqgen::cli {

struct ClaimCheck {
    std::string label;
    FitReport fit;
    double target = 0.0;
    double tolerance = 0.0;
    std::vector<double> x;
    std::vector<double> y;
    [[nodiscard]] bool passed() const { return fit.within(target, tolerance); }
};

struct ClaimResult {
    std::string name;
    std::vector<ClaimCheck> checks;
    std::vector<std::string> notes;
};

const std::vector<std::string> &claim_names();
ClaimResult run_claim(const std::string &name, std::uint64_t seed);

} // namespace seqgen::cli
