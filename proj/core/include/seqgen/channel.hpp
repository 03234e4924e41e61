#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

namespace seqgen {

using cplx = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using SparseOp = Eigen::SparseMatrix<cplx>;

/// Emitted strings are stored as symbol indices into the alphabet.
using Word = std::vector<std::uint8_t>;

inline constexpr double kCompletenessTolerance = 1e-10;
inline constexpr double kAmplitudeThreshold = 1e-14;

/// A family of emitter operators, one per emitted symbol. No completeness
/// requirement: truncated or folded constructions live here.
class KrausFamily {
  public:
    KrausFamily() = default;
    KrausFamily(std::vector<std::string> alphabet, std::vector<SparseOp> ops);
    KrausFamily(std::vector<std::string> alphabet, const std::vector<Matrix> &ops);

    [[nodiscard]] std::size_t emitter_dim() const { return dim_; }
    [[nodiscard]] std::size_t alphabet_size() const { return alphabet_.size(); }
    [[nodiscard]] const std::vector<std::string> &alphabet() const { return alphabet_; }
    [[nodiscard]] const std::vector<SparseOp> &ops() const { return ops_; }
    [[nodiscard]] const SparseOp &op(std::size_t symbol) const { return ops_.at(symbol); }
    [[nodiscard]] Matrix dense(std::size_t symbol) const { return Matrix(ops_.at(symbol)); }

    /// max-abs entry of sum_s K_s^dagger K_s - 1.
    [[nodiscard]] double completeness_residual() const;

  private:
    std::size_t dim_ = 0;
    std::vector<std::string> alphabet_;
    std::vector<SparseOp> ops_;
};

/// Trace-preserving channel: completeness is checked on construction.
class KrausChannel : public KrausFamily {
  public:
    KrausChannel() = default;
    KrausChannel(std::vector<std::string> alphabet, std::vector<SparseOp> ops);
    KrausChannel(std::vector<std::string> alphabet, const std::vector<Matrix> &ops);
    explicit KrausChannel(KrausFamily family);
};

/// Kraus operators K_b K_a for each pair (a then b), labels "a.b".
KrausChannel compose(const KrausChannel &first, const KrausChannel &second);

struct DensityOperator {
    Matrix matrix;

    static DensityOperator basis(std::size_t dim, std::size_t index);
    static DensityOperator identity(std::size_t dim);

    [[nodiscard]] std::size_t dim() const { return static_cast<std::size_t>(matrix.rows()); }
    [[nodiscard]] cplx trace() const { return matrix.trace(); }
    /// Hermitian, PSD within tolerances; `normalized` also demands unit trace.
    void validate(bool normalized = true) const;
};

DensityOperator apply_channel(const DensityOperator &rho, const KrausFamily &ch);
DensityOperator apply_dual(const DensityOperator &op, const KrausFamily &ch);
DensityOperator apply_channel_n(DensityOperator rho, const KrausFamily &ch, std::size_t steps);
DensityOperator apply_dual_n(DensityOperator op, const KrausFamily &ch, std::size_t steps);

class RadiatedState {
  public:
    RadiatedState(std::size_t length, std::vector<std::string> alphabet, std::map<Word, cplx> amplitudes,
                  double success_probability);

    [[nodiscard]] std::size_t length() const { return length_; }
    [[nodiscard]] const std::vector<std::string> &alphabet() const { return alphabet_; }
    [[nodiscard]] const std::map<Word, cplx> &amplitudes() const { return amplitudes_; }
    [[nodiscard]] double success_probability() const { return success_probability_; }
    [[nodiscard]] std::size_t support_size() const { return amplitudes_.size(); }

    [[nodiscard]] cplx amplitude(const Word &w) const;
    /// Looks up a word written as symbol labels.
    [[nodiscard]] cplx amplitude(const std::vector<std::string> &labels) const;
    [[nodiscard]] double norm_squared() const;
    [[nodiscard]] std::string render(const Word &w, const std::string &sep = "") const;

    /// Squared Schmidt coefficients across the cut after `cut` symbols,
    /// sorted descending. Computed blockwise from the sparse amplitude map.
    [[nodiscard]] std::vector<double> schmidt_spectrum(std::size_t cut) const;
    [[nodiscard]] double renyi_entropy(std::size_t cut, double order) const;
    [[nodiscard]] double entanglement_entropy(std::size_t cut) const;

    /// Largest weight discarded over all cuts when each is truncated to
    /// `rank` Schmidt values.
    [[nodiscard]] double mps_discarded_weight(std::size_t rank) const;

  private:
    std::size_t length_;
    std::vector<std::string> alphabet_;
    std::map<Word, cplx> amplitudes_;
    double success_probability_;
};

/// |<a|b>|^2 with words matched by symbol label.
double fidelity(const RadiatedState &a, const RadiatedState &b);

/// Renyi / von Neumann entropy (natural log) of a probability vector.
double renyi_of_spectrum(const std::vector<double> &p, double order);

/// Post-selected output of iterating the family from |start> for N steps and
/// projecting on |final>. Amplitudes with normalized magnitude below 1e-14 are
/// dropped. Throws EmptySupport when nothing survives.
RadiatedState sequential_generate(const KrausFamily &ch, std::size_t start, std::size_t n, std::size_t final_state,
                                  std::size_t max_strings = 20'000'000);

/// (1-n)^{-1} log Tr[(rho_l O)^n] / Tr(rho_l O)^n with rho_l the forward
/// evolved start projector and O the dual evolved final projector.
double renyi_entropy_channel(const KrausFamily &ch, std::size_t start, std::size_t final_state, std::size_t n,
                             std::size_t cut, int order);

/// Unique fixed point of the channel, via the null vector of T - 1 with
/// T = sum_s conj(K_s) (x) K_s. Requires emitter_dim <= 64.
DensityOperator steady_state_of_channel(const KrausChannel &ch);

namespace channels {

KrausChannel identity(std::size_t dim);
/// Decay |1> -> |0> with probability gamma.
KrausChannel amplitude_damping(double gamma);
/// rho -> (1-p) rho + p 1/2 on a qubit, four Kraus operators.
KrausChannel depolarizing(double p);
/// Two projectors onto (|0> +- |1>)/sqrt 2: from |0> to |0> it emits a GHZ pair.
KrausChannel ghz();
/// Single Kraus operator |0><i| on a one-dimensional emitter is the product channel.
KrausChannel product(std::size_t dim = 1);
/// Haar-like random isometry split into `symbols` blocks.
KrausChannel random(std::size_t dim, std::size_t symbols, std::uint64_t seed);

} // namespace channels

/// Channel serialization.
KrausFamily channel_from_json(const std::string &text);
std::string channel_to_json(const KrausFamily &ch, long start = -1, long final_state = -1);

struct ChannelDocument {
    KrausFamily family;
    std::size_t start = 0;
    std::size_t final_state = 0;
};
ChannelDocument load_channel_document(const std::string &path);

} // namespace seqgen
