#pragma once

#include "seqgen/channel.hpp"
#include "seqgen/halfline_walk.hpp"
#include "seqgen/stats.hpp"

#include <boost/multiprecision/cpp_int.hpp>

#include <cstddef>
#include <string>
#include <vector>

namespace seqgen::motzkin {

/// One step of a colored Motzkin walk: 0 flat, +c up of color c, -c down of color c.
using Step = int;
using Path = std::vector<Step>;
using BigCount = boost::multiprecision::cpp_int;

inline constexpr std::size_t kMaxEnumerationLength = 14;

/// Move weights of the s-colored emitter. Weights are per color for pushes.
struct MotzkinEnsemble {
    std::size_t length = 0;
    int colors = 1;
    double w_plus = 0.0;          // per color, bulk
    double w_minus = 0.0;         // pop of the top color
    double w_zero = 0.0;          // bulk flat
    double w_plus_boundary = 0.0; // per color, empty stack
    double w_zero_boundary = 0.0; // flat on the empty stack
    bool stochastic = true;

    /// Checks s*w+ + w- + w0 = 1 and s*w+_b + w0_b = 1 within 1e-12.
    static MotzkinEnsemble make(std::size_t length, int colors, double w_plus, double w_minus, double w_zero,
                                double w_plus_boundary, double w_zero_boundary);
    /// Critical point: w- = s*up, w0 = 1 - 2 s up, boundary push per color
    /// (s*w+ + w-)/s, boundary flat equal to the bulk flat.
    static MotzkinEnsemble unbiased(std::size_t length, int colors, double up);
    /// Spin-1 emitter of a half-line walk: up gamma_R, down gamma_L, boundary gamma_0.
    static MotzkinEnsemble from_walk(std::size_t length, const walk::TransitionSpec &spec, int colors = 1);
    /// All raw weights equal to one: the uniform colored Motzkin superposition.
    /// Not realizable as a channel; flagged non-stochastic.
    static MotzkinEnsemble uniform(std::size_t length, int colors);

    void validate() const;
    [[nodiscard]] MotzkinEnsemble with_length(std::size_t n) const;
    /// gamma_R / gamma_L - 1 of the underlying height walk.
    [[nodiscard]] double delta() const { return colors * w_plus / w_minus - 1.0; }
};

/// Symbol labels: "f", then "u<c>", "d<c>" per color ("u", "d" when s = 1).
std::vector<std::string> alphabet(int colors);
/// Symbol index of a step in `alphabet(colors)`.
std::uint8_t symbol_index(Step step);
Step step_of_symbol(std::uint8_t symbol);
std::string render(const Path &path, int colors);

bool is_legal(const Path &path, int colors);

/// All legal strings of length N (N <= 14).
std::vector<Path> enumerate_walks(std::size_t n, int colors);

/// Number of legal strings, by the height DP.
BigCount walk_count(std::size_t n, int colors);

/// Normalized amplitude of a string; 0 for illegal strings.
double amplitude(const MotzkinEnsemble &ensemble, const Path &path);

/// The normalized superposition over all legal strings (N <= 14).
RadiatedState exact_state(const MotzkinEnsemble &ensemble);

struct SchmidtEntry {
    std::size_t height = 0;  // unmatched ups left of the cut
    double lambda = 0.0;     // squared Schmidt coefficient of each color sequence
    double multiplicity = 0; // s^m, may be inf for m >= 1024 when s = 2
    double weight = 0.0;     // multiplicity * lambda
};

struct SchmidtSpectrum {
    std::size_t cut = 0;
    int colors = 1;
    std::vector<SchmidtEntry> entries; // only heights with nonzero weight

    [[nodiscard]] double total_weight() const;
    [[nodiscard]] double entropy() const;
    [[nodiscard]] double renyi(double order) const;
    [[nodiscard]] double height_mean() const;
    /// Every squared coefficient listed with multiplicity, descending.
    [[nodiscard]] std::vector<double> expanded(std::size_t max_entries = 1'000'000) const;
};

/// Height-resolved transfer sums for one ensemble, reused across cuts.
class HeightDp {
  public:
    explicit HeightDp(const MotzkinEnsemble &ensemble);

    [[nodiscard]] SchmidtSpectrum spectrum(std::size_t cut) const;
    /// Probability that the height after `cut` steps equals m.
    [[nodiscard]] std::vector<double> height_distribution(std::size_t cut) const;
    /// log of the total weight Z of all legal strings.
    [[nodiscard]] double log_partition() const { return log_z_; }

  private:
    MotzkinEnsemble e_;
    // prefix_[l][m], suffix_[k][m] rescaled per row; the scale is irrelevant for ratios.
    std::vector<std::vector<long double>> prefix_;
    std::vector<std::vector<long double>> suffix_;
    double log_z_ = 0.0;
};

SchmidtSpectrum schmidt_spectrum(const MotzkinEnsemble &ensemble, std::size_t cut);

enum class EntropyForm { Logarithmic, PowerLaw, Saturating };
const char *to_string(EntropyForm form) noexcept;

struct ScalingReport {
    std::vector<double> cuts;
    std::vector<double> entropies;
    FitReport power;          // log S vs log l
    LinearFit logarithmic;    // S vs log l
    double power_residual = 0.0; // residual of the power law in S units
    double log_residual = 0.0;   // residual of the log law in S units
    EntropyForm preferred = EntropyForm::Logarithmic;
};

/// Fits S_1(l) over the given cuts (at least 4, all <= N/4). Saturating wins
/// when the slope dS/dlog l over the last pair of cuts has dropped below 5% of
/// its peak (and below 1% of S), or is negligible outright.
ScalingReport entropy_scaling(const MotzkinEnsemble &ensemble, const std::vector<std::size_t> &cuts,
                              std::uint64_t seed = 0x5eed);

/// Emitter channel on colored stacks of height <= n_max. At the top height
/// the push weight is folded into the flat move so source states stay normalized.
KrausFamily motzkin_channel(const MotzkinEnsemble &ensemble, std::size_t n_max);
/// Basis index of the empty stack in `motzkin_channel`.
inline constexpr std::size_t kEmptyStack = 0;

} // namespace seqgen::motzkin
