#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace seqgen {

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double residual_norm = 0.0; // Euclidean norm of y - (intercept + slope*x)
};

/// Ordinary least squares y ~ intercept + slope*x. Needs two distinct x.
LinearFit least_squares(std::span<const double> x, std::span<const double> y);

struct FitWindow {
    double lo;
    double hi;
};

/// Power-law fit y ~ exp(intercept) * x^exponent on log-log data, with a
/// bootstrap percentile interval for the exponent.
struct FitReport {
    double exponent = 0.0;
    double intercept = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double residual_norm = 0.0;
    FitWindow window{0.0, 0.0};
    std::size_t points = 0;

    [[nodiscard]] bool within(double target, double tolerance) const {
        return exponent >= target - tolerance && exponent <= target + tolerance;
    }
    [[nodiscard]] std::string describe() const;
};

struct FitOptions {
    std::size_t bootstrap_resamples = 200;
    std::uint64_t seed = 0x5eed;
    double confidence = 0.95;
};

/// Requires at least four points with x, y > 0 inside the window.
FitReport fit_exponent(std::span<const double> x, std::span<const double> y,
                       std::optional<FitWindow> window = std::nullopt, const FitOptions &options = {});

/// Percentile interval of a sample (sorted copy).
std::pair<double, double> percentile_interval(std::vector<double> samples, double confidence);

struct Interval {
    double lo;
    double hi;
};

/// Wilson score interval for a binomial proportion.
Interval wilson_interval(std::size_t successes, std::size_t trials, double z = 1.959963984540054);

/// Shannon entropy (natural log) of a nonnegative weight vector, normalized internally.
double shannon_entropy(std::span<const double> weights);

/// Log-spaced integer grid in [lo, hi], deduplicated and sorted.
std::vector<std::size_t> log_grid(std::size_t lo, std::size_t hi, std::size_t count);

} // namespace seqgen
