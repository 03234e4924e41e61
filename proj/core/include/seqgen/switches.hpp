#pragma once

#include "seqgen/stats.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace seqgen::switches {

/// Auxiliary walker whose returns to its origin flip the bias of the head.
///  Diffusive1d: +-1 steps.
///  Diffusive2d: nearest-neighbour steps on the square lattice.
///  Ballistic1d: jumps of length floor(1/U) with a random sign (Cauchy class,
///               return probability ~ 1/t).
/// Each step the walker moves with `move_probability`; 0 pins it at the origin.
struct AuxWalkerModel {
    enum class Kind { Diffusive1d, Diffusive2d, Ballistic1d };
    Kind kind = Kind::Diffusive1d;
    double move_probability = 1.0;

    static AuxWalkerModel parse(const std::string &name);
    void validate() const;
};

const char *to_string(AuxWalkerModel::Kind kind) noexcept;

struct SwitchedWalkTrace {
    std::size_t horizon = 0;
    std::vector<std::size_t> sample_times;
    std::vector<long> positions;           // head at each sample time
    std::vector<std::size_t> flip_times;   // when the head's bias flipped
    std::vector<std::size_t> return_times; // when the aux walker came back to its origin
    long min_position = 0;
    long final_aux_x = 0;
    long final_aux_y = 0;
};

/// Head walk on {0, 1, ...}: a step is +1 with probability (1 + b v)/2 and -1
/// otherwise, a -1 step at 0 stays put; b = +1 initially and flips at every
/// aux return (transition from off-origin to origin).
SwitchedWalkTrace levy_trace(const AuxWalkerModel &aux, std::size_t horizon, double drift, std::uint64_t seed,
                             const std::vector<std::size_t> &sample_times);

/// Per-site hopping probability field. Trap disorder draws r_i = U_i^{1/mu}
/// (waiting-time tail index mu); no disorder gives r_i = 1. A site hops left
/// or right with probability r_i / 2 each.
struct RandomRateField {
    enum class Kind { Uniform, Trap };
    Kind kind = Kind::Uniform;
    double mu = 1.0;
    std::uint64_t seed = 0;

    [[nodiscard]] double rate(long site) const;
    [[nodiscard]] double gamma_left(long site) const { return 0.5 * rate(site); }
    [[nodiscard]] double gamma_right(long site) const { return 0.5 * rate(site); }
    /// Disorder-averaged displacement exponent mu / (1 + mu) for traps, 1/2 otherwise.
    [[nodiscard]] double predicted_exponent() const;
};

/// Head in a quenched rate field, reflecting at 0, simulated event by event.
SwitchedWalkTrace subdiffusive_trace(const RandomRateField &field, std::size_t horizon, std::uint64_t seed,
                                     const std::vector<std::size_t> &sample_times);

/// Positions of many traces at shared sample times.
struct TraceEnsemble {
    std::vector<std::size_t> sample_times;
    std::vector<std::vector<long>> positions; // [trace][sample]
    std::vector<double> mean_flips;           // average flips up to each sample time

    [[nodiscard]] std::size_t traces() const { return positions.size(); }
    [[nodiscard]] std::vector<double> mean_position() const;
    [[nodiscard]] std::vector<double> mean_square() const;
};

TraceEnsemble levy_ensemble(const AuxWalkerModel &aux, std::size_t horizon, double drift, std::size_t traces,
                            std::uint64_t seed, const std::vector<std::size_t> &sample_times);
/// Each trace gets its own field realization (field stream) and its own
/// hopping noise (trace stream).
TraceEnsemble subdiffusive_ensemble(const RandomRateField &field, std::size_t horizon, std::size_t traces,
                                    std::uint64_t seed, const std::vector<std::size_t> &sample_times);

/// Power-law fit of the ensemble mean of x (or x^2) against t over sample
/// times in [t_min, t_max]; the interval comes from resampling traces.
FitReport fit_ensemble_exponent(const TraceEnsemble &ensemble, double t_min, double t_max, bool squared = false,
                                std::size_t resamples = 200, std::uint64_t seed = 0x5eed);

struct OverheadPoint {
    std::size_t n = 0;
    std::size_t trials = 0;
    std::size_t hits = 0;
    double rate = 0.0;
    Interval ci{0.0, 0.0};
};

/// Fraction of aux walkers at their origin at time N (trials >= 10^4).
OverheadPoint conditioned_overhead(const AuxWalkerModel &aux, std::size_t n, std::size_t trials, std::uint64_t seed);

struct OverheadReport {
    std::vector<OverheadPoint> points;
    bool has_fit = false;
    FitReport fit;
    /// Fit of rate * log N against N, the log-corrected 1/N form.
    bool has_log_corrected_fit = false;
    FitReport log_corrected;
    std::vector<std::string> warnings;
};

OverheadReport overhead_scaling(const AuxWalkerModel &aux, const std::vector<std::size_t> &lengths,
                                std::size_t trials, std::uint64_t seed);

struct ProxyReport {
    std::vector<double> cuts;
    std::vector<double> entropy; // <m> log s + H(m)
    bool has_fit = false;
    FitReport fit;
};

/// Height-based entanglement estimate at the ensemble's sample times. A
/// heuristic: only its exponent is meaningful. Needs s >= 2 and >= 10^3 traces.
ProxyReport entanglement_proxy(const TraceEnsemble &ensemble, int colors, double l_min = 16.0,
                               std::uint64_t seed = 0x5eed);

} // namespace seqgen::switches
