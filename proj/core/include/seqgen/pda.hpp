#pragma once

#include "seqgen/channel.hpp"
#include "seqgen/grammar.hpp"
#include "seqgen/motzkin.hpp"
#include "seqgen/stats.hpp"

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace seqgen::qpda {

/// Moves available for a given top of stack.
///  Expand: pop A, push C then B (B on top), no emission.
///  Emit:   pop the top, emit a symbol.
///  Stay:   emit a symbol, stack unchanged.
///  Push:   emit a symbol, push one stack symbol.
struct PdaAction {
    enum class Kind { Expand, Emit, Stay, Push };
    Kind kind = Kind::Emit;
    double weight = 0.0;
    int emitted = -1;           // output symbol, -1 for Expand
    std::vector<int> push;      // Expand: {B, C}; Push: {X}

    [[nodiscard]] int height_change() const;
    [[nodiscard]] bool emits() const { return kind != Kind::Expand; }
};

struct WeightedPda {
    std::vector<std::string> stack_symbols;
    std::vector<std::string> output_alphabet;
    std::vector<std::vector<PdaAction>> table; // indexed by top-of-stack symbol
    std::vector<PdaAction> empty_row;          // empty stack; no actions means halt
    std::vector<int> initial_stack;            // bottom first

    /// Nonempty rows sum to 1 within 1e-12; Emit pops exactly one symbol.
    void validate() const;
    [[nodiscard]] const std::vector<PdaAction> &row(const std::vector<int> &stack) const;
};

/// A -> B C becomes Expand, A -> a becomes Emit; the run starts from [S].
WeightedPda compile_to_pda(const CnfGrammar &grammar);

/// Walk PDA of a colored Motzkin ensemble: stack symbols are colors, the
/// empty stack keeps emitting flats and boundary pushes.
WeightedPda motzkin_pda(const motzkin::MotzkinEnsemble &ensemble);

enum class BiasSchedule { None, PushPop };
const char *to_string(BiasSchedule schedule) noexcept;

/// Row after schedule modulation: before half of the target emissions only
/// the actions with the largest height change survive, afterwards only the
/// smallest; survivors are renormalized.
std::vector<PdaAction> modulated_row(const std::vector<PdaAction> &row, BiasSchedule schedule, std::size_t emitted,
                                     std::size_t target);

struct EmissionRun {
    std::vector<int> emitted;
    std::vector<int> final_stack;
    double weight = 1.0;
    std::size_t steps = 0;
    bool accepted = false;
    bool truncated = false;
    std::vector<std::size_t> heights; // stack height after each emission
};

/// One stochastic trajectory aiming at `target` emissions. It stops on
/// acceptance (empty stack right after the target emission), on a halt,
/// once the stack cannot drain in the remaining emissions, or after
/// `max_steps` moves (default 64 * target).
EmissionRun sample_emission(const WeightedPda &pda, std::size_t target, std::uint64_t seed,
                            BiasSchedule schedule = BiasSchedule::None, std::size_t max_steps = 0);

/// Total weight of runs emitting exactly `word` and accepting.
double acceptance_weight(const WeightedPda &pda, const std::vector<int> &word);

/// Coherent superposition over accepted runs of length N (N <= 12): the
/// amplitude of a string sums sqrt(run weight) over its runs.
RadiatedState exact_superposition(const WeightedPda &pda, std::size_t n);

/// Channel on the stacks reachable within `n` emissions, silent moves folded
/// into the emitting operator. Not trace preserving in general.
struct PdaTransfer {
    KrausFamily family;
    std::size_t initial = 0;
    std::size_t empty = 0;
    std::vector<std::vector<int>> stacks;
};
PdaTransfer transfer_family(const WeightedPda &pda, std::size_t n);

struct RatePoint {
    std::size_t n = 0;
    std::size_t trials = 0;
    std::size_t accepted = 0;
    double rate = 0.0;
    Interval ci{0.0, 0.0};
};

enum class DecayRegime { Constant, Polynomial, Exponential };
const char *to_string(DecayRegime regime) noexcept;

struct PostselectionReport {
    std::vector<RatePoint> points;
    bool has_power_fit = false;
    FitReport power;                 // log rate vs log N
    bool has_exponential_fit = false;
    LinearFit exponential;           // log rate vs N
    DecayRegime regime = DecayRegime::Polynomial;
    std::vector<std::string> warnings;
};

PostselectionReport postselection_rate(const WeightedPda &pda, const std::vector<std::size_t> &lengths,
                                       std::size_t trials, std::uint64_t seed,
                                       BiasSchedule schedule = BiasSchedule::None);

} // namespace seqgen::qpda
