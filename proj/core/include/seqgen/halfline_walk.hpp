#pragma once

#include <cstddef>
#include <optional>
#include <vector>

namespace seqgen::walk {

/// Hop and stay probabilities of a walker on sites 0, 1, 2, ... with a
/// reflecting wall at 0. Probabilities are per step, outflow convention.
struct TransitionSpec {
    double gamma_left = 0.0;
    double gamma_right = 0.0;
    double gamma_boundary = 0.0; // right hop out of site 0

    /// gamma_0 defaults to gamma_right.
    static TransitionSpec make(double gamma_left, double gamma_right, std::optional<double> gamma_0 = std::nullopt);

    void validate() const;
    /// gamma_right / gamma_left - 1. Throws UndefinedRatio when gamma_left == 0.
    [[nodiscard]] double delta() const;
};

enum class PhaseLabel { Pinned, Critical, Escaping };

const char *to_string(PhaseLabel phase) noexcept;

inline constexpr double kCriticalTolerance = 1e-12;
inline constexpr double kLeakTolerance = 1e-9;

struct HalfLineDist {
    std::vector<double> probabilities; // sites 0..n_max

    static HalfLineDist point_mass(std::size_t n_max, std::size_t site = 0);

    [[nodiscard]] std::size_t n_max() const { return probabilities.size() - 1; }
    [[nodiscard]] double total() const;
    [[nodiscard]] double mean() const;
    [[nodiscard]] double second_moment() const;
    void validate() const;
};

/// Applies `steps` updates. Site n_max folds its right hop into stay; if the
/// mass sitting there exceeds `leak_tolerance` a TruncationLeak is thrown.
HalfLineDist evolve(const HalfLineDist &dist, const TransitionSpec &spec, std::size_t steps,
                    double leak_tolerance = kLeakTolerance);

PhaseLabel classify_phase(const TransitionSpec &spec);

/// Truncation large enough for `horizon` steps from the origin.
std::size_t auto_truncation(const TransitionSpec &spec, std::size_t horizon);

/// p_0(t) for t = 1..horizon starting from the origin.
std::vector<double> return_probability_series(const TransitionSpec &spec, std::size_t horizon);

struct WalkSeries {
    std::vector<double> p0;
    std::vector<double> mean;
    std::vector<double> msd; // <i^2>
};

/// p_0, <i> and <i^2> for t = 1..horizon starting from the origin.
WalkSeries walk_series(const TransitionSpec &spec, std::size_t horizon);

/// Stationary distribution of the chain truncated at n_max (pinned phase only).
/// Defaults n_max to max(16, 10 * xi).
HalfLineDist steady_state(const TransitionSpec &spec, std::optional<std::size_t> n_max = std::nullopt);

/// Decay length of the geometric tail, -1 / ln(gamma_R / gamma_L).
double confinement_length(const TransitionSpec &spec);

/// Decay length read off a distribution by a log-linear fit of p_i over
/// sites [first, last] with p_i above `floor`.
double fit_confinement_length(const HalfLineDist &dist, std::size_t first = 1, std::optional<std::size_t> last = std::nullopt,
                              double floor = 1e-250);

} // namespace seqgen::walk
