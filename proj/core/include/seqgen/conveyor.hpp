#pragma once

#include "seqgen/channel.hpp"
#include "seqgen/grammar.hpp"
#include "seqgen/motzkin.hpp"

#include <cstddef>
#include <climits>
#include <cstdint>
#include <map>
#include <optional>
#include <vector>

namespace seqgen::conveyor {

/// Two-leg lattice. Upper leg: column 0 is the wall, stack colors 1..s in
/// columns 1..head-1, E at `head`, zeros to its right. Lower leg: particles
/// carrying a recorded move (0 flat, -k push of color k, +k pop of color k),
/// inert cells elsewhere. Particles enter at column 0 and leave at width-1.
struct TwoLegConfig {
    static constexpr std::int8_t kE = -1;
    static constexpr std::int8_t kInert = INT8_MIN;

    std::vector<std::int8_t> upper;
    std::vector<std::int8_t> lower;
    std::vector<std::int8_t> harvested;
    int head = 1;

    static TwoLegConfig initial(std::size_t width);
    [[nodiscard]] std::size_t width() const { return upper.size(); }
    [[nodiscard]] std::size_t stack_height() const { return static_cast<std::size_t>(head - 1); }
    /// Exactly one E, nothing nontrivial right of it, wall at column 0.
    void check_invariants() const;

    auto operator<=>(const TwoLegConfig &) const = default;
};

using BranchState = std::map<TwoLegConfig, cplx>;

/// Timesteps between two injected particles. With a spacing of two, a
/// particle that just popped sits right of E when the next particle pushes,
/// and a later layer of the same timestep would hand it |E00,x>.
inline constexpr std::size_t kInjectionPeriod = 3;

double norm_squared(const BranchState &state);

/// Applies the downward triangle centered on column `position` (upper
/// position-1..position+1, lower position) to every branch.
BranchState triangle_gate(const BranchState &state, const motzkin::MotzkinEnsemble &weights, int position);
/// Shifts every lower-leg particle one column right; the particle at the
/// extraction column is appended to the harvested register.
BranchState advect(const BranchState &state);
/// Places a fresh particle at column 0.
BranchState inject(const BranchState &state);

/// Per-timestep gate accounting. A triangle counts when some branch (or
/// sampled trajectory) has E inside it.
struct GateStats {
    std::vector<std::size_t> nontrivial_gates;
    std::vector<std::size_t> active_width;
    std::size_t timesteps = 0;
    [[nodiscard]] double mean_gates() const;
    [[nodiscard]] double total_gates() const;
};

struct TwoLegResult {
    RadiatedState state;
    GateStats stats;
    double success_probability = 0.0;
};

/// Default lattice width for N emissions: max(ceil(3 sqrt N) + 6, N + 4),
/// enough for every branch of a full superposition.
std::size_t default_width(std::size_t n);
/// Width for sampled trajectories: ceil(6 sqrt N) + 10.
std::size_t trajectory_width(std::size_t n);

/// Full superposition: alternates the three triangle layers (centers by
/// column mod 3, in order 0, 1, 2) and advection, injecting a particle
/// every kInjectionPeriod timesteps, until N particles are harvested; then post-selects
/// on E at the origin. Harvested moves map to motzkin symbols.
TwoLegResult run_two_leg(std::size_t n, const motzkin::MotzkinEnsemble &weights, std::size_t width = 0);

/// What the fresh particle under E did.
enum class Move { Pop, Stay, Push };
const char *to_string(Move move) noexcept;

/// One triangle, seen from the particle on its bottom site.
struct TriangleView {
    std::int8_t left = 0, middle = 0, right = 0, bottom = 0;
    bool nontrivial = false;
    auto operator<=>(const TriangleView &) const = default;
};

struct ParticleRecord {
    std::size_t id = 0;
    std::optional<Move> move;
    std::int8_t color = 0;          // pushed color for Push, popped for Pop
    int offset_after = 0;           // particle column - head after the timestep of the move
    std::vector<TriangleView> views; // every triangle containing E it sat under, in order
};

struct Trajectory {
    std::vector<std::int8_t> harvested;
    std::vector<int> heads; // E column at the end of each timestep
    std::vector<ParticleRecord> particles;
    bool accepted = false;
};

struct ScriptStep {
    Move move = Move::Stay;
    std::int8_t color = 1; // push color
};

/// Samples one classical unraveling of the same gates.
Trajectory sample_two_leg(std::size_t n, const motzkin::MotzkinEnsemble &weights, std::uint64_t seed,
                          std::size_t width = 0);
/// Forces the listed moves at successive nontrivial gates; N = script length.
Trajectory scripted_two_leg(const std::vector<ScriptStep> &script, std::size_t width = 0);

struct AuditReport {
    std::size_t particles = 0;
    std::size_t pops = 0;
    std::size_t stays = 0;
    std::size_t pushes = 0;
    std::size_t max_nontrivial_per_particle = 0;
};

/// Every particle takes part in at most one nontrivial triangle, and the
/// triangles it sees right after its move are the ones the three cases
/// predict. Throws AuditFailure naming the particle otherwise.
AuditReport markovianity_audit(const Trajectory &trajectory);

/// Gate accounting over `samples` sampled trajectories.
GateStats sampled_gate_stats(std::size_t n, const motzkin::MotzkinEnsemble &weights, std::size_t samples,
                             std::uint64_t seed, std::size_t width = 0);

/// Three-leg lattice: E column `head` on the top leg, stack on the middle
/// leg (column 0 empty-stack slot, variables from column 1), conveyor below.
struct ThreeLegConfig {
    static constexpr int kEmpty = 0;
    static constexpr int kX = -1000;
    static constexpr int kInert = INT_MIN;
    static constexpr int kFresh = 0;

    std::vector<int> stack; // 0 empty, v+1 variable v, -(a+1) terminal a, kX
    std::vector<int> lower; // kInert, kFresh, or -(a+1) for a particle marked with terminal a
    std::vector<int> harvested;
    int head = 1;
    std::size_t unmarked_lost = 0;

    static ThreeLegConfig initial(std::size_t width, int start_variable);
    [[nodiscard]] std::size_t width() const { return stack.size(); }
    auto operator<=>(const ThreeLegConfig &) const = default;
};

using ThreeLegState = std::map<ThreeLegConfig, cplx>;

/// One four-step cycle at the head followed by the conveyor shift.
/// Throws CycleInvariant if an X survives step 3.
ThreeLegState three_leg_cycle(const ThreeLegState &state, const qpda::CnfGrammar &grammar, bool inject_particle);

struct ThreeLegResult {
    RadiatedState state;
    GateStats stats;
    double success_probability = 0.0;
    double pruned_weight = 0.0; // branches whose stack outgrew the particles left
};

/// Injects N particles, one every second cycle, runs until all have left
/// the lattice and post-selects on an empty stack with every particle marked.
ThreeLegResult run_three_leg(const qpda::CnfGrammar &grammar, std::size_t n, std::size_t width = 0);

} // namespace seqgen::conveyor
