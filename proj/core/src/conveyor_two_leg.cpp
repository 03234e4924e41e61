#include "seqgen/conveyor.hpp"

#include "seqgen/errors.hpp"
#include "seqgen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace seqgen::conveyor {

namespace {

using motzkin::MotzkinEnsemble;
constexpr std::int8_t kE = TwoLegConfig::kE;
constexpr std::int8_t kInert = TwoLegConfig::kInert;

struct LocalOut {
    std::int8_t l, m, r, b;
    double weight; // probability; amplitude is its square root
    Move move;
    std::int8_t color;
};

bool is_fresh_under_e(std::int8_t m, std::int8_t r, std::int8_t b) {
    return m == kE && r == 0 && b == 0;
}

bool is_image_state(std::int8_t l, std::int8_t m, std::int8_t r, std::int8_t b) {
    return (l == kE && m == 0 && r == 0 && b > 0 && b != kInert) || (r == kE && m > 0 && b == -m);
}

// Outgoing branches of the triangle gate on |xE0,0>; x = 0 is the wall.
std::vector<LocalOut> gate_column(std::int8_t x, const MotzkinEnsemble &w) {
    std::vector<LocalOut> out;
    const bool origin = x == 0;
    const double flat = origin ? w.w_zero_boundary : w.w_zero;
    const double up = origin ? w.w_plus_boundary : w.w_plus;
    if (flat > 0.0) {
        out.push_back({x, kE, 0, 0, flat, Move::Stay, 0});
    }
    if (!origin && w.w_minus > 0.0) {
        out.push_back({kE, 0, 0, x, w.w_minus, Move::Pop, x});
    }
    if (up > 0.0) {
        for (int k = 1; k <= w.colors; ++k) {
            const auto c = static_cast<std::int8_t>(k);
            out.push_back({x, c, kE, static_cast<std::int8_t>(-k), up, Move::Push, c});
        }
    }
    return out;
}

void check_center(const TwoLegConfig &cfg, int c) {
    require(c >= 1 && c + 1 < static_cast<int>(cfg.width()), ErrorCode::Geometry,
            "triangle centered at column " + std::to_string(c) + " overlaps a cursor column");
}

void apply_local(TwoLegConfig &cfg, int c, const LocalOut &o) {
    cfg.upper[static_cast<std::size_t>(c - 1)] = o.l;
    cfg.upper[static_cast<std::size_t>(c)] = o.m;
    cfg.upper[static_cast<std::size_t>(c + 1)] = o.r;
    cfg.lower[static_cast<std::size_t>(c)] = o.b;
    cfg.head = o.move == Move::Pop ? c - 1 : (o.move == Move::Push ? c + 1 : c);
    require(cfg.head + 3 <= static_cast<int>(cfg.width()), ErrorCode::WidthExhausted,
            "E reached the right edge of the lattice");
}

// Center of the layer-L triangle that contains E, if any.
int center_for_layer(int head, int layer) {
    for (int c = head - 1; c <= head + 1; ++c) {
        if (((c % 3) + 3) % 3 == layer) {
            return c;
        }
    }
    return head;
}

std::int8_t to_symbol(std::int8_t recorded) {
    return static_cast<std::int8_t>(motzkin::symbol_index(-recorded));
}

} // namespace

TwoLegConfig TwoLegConfig::initial(std::size_t width) {
    require(width >= 5, ErrorCode::Geometry, "two-leg lattice needs width >= 5");
    TwoLegConfig c;
    c.upper.assign(width, 0);
    c.lower.assign(width, kInert);
    c.upper[1] = kE;
    c.head = 1;
    return c;
}

void TwoLegConfig::check_invariants() const {
    require(upper.size() == lower.size() && upper.size() >= 5, ErrorCode::Geometry, "inconsistent leg lengths");
    require(upper[0] == 0, ErrorCode::CycleInvariant, "wall column must hold 0");
    std::size_t es = 0;
    for (std::size_t i = 0; i < upper.size(); ++i) {
        if (upper[i] == kE) {
            ++es;
            require(static_cast<int>(i) == head, ErrorCode::CycleInvariant, "head index does not match E");
        } else if (static_cast<int>(i) > head) {
            require(upper[i] == 0, ErrorCode::CycleInvariant, "nontrivial symbol right of E");
        } else if (i >= 1) {
            require(upper[i] > 0, ErrorCode::CycleInvariant, "hole inside the stack");
        }
    }
    require(es == 1, ErrorCode::CycleInvariant, "configuration must hold exactly one E");
}

double norm_squared(const BranchState &state) {
    double s = 0.0;
    for (const auto &[c, a] : state) {
        s += std::norm(a);
    }
    return s;
}

BranchState triangle_gate(const BranchState &state, const MotzkinEnsemble &weights, int position) {
    BranchState out;
    for (const auto &[cfg, amp] : state) {
        check_center(cfg, position);
        const auto p = static_cast<std::size_t>(position);
        const std::int8_t l = cfg.upper[p - 1];
        const std::int8_t m = cfg.upper[p];
        const std::int8_t r = cfg.upper[p + 1];
        const std::int8_t b = cfg.lower[p];
        require(!is_image_state(l, m, r, b), ErrorCode::AuditFailure,
                "triangle at column " + std::to_string(position) + " received an image state");
        if (!is_fresh_under_e(m, r, b)) {
            out[cfg] += amp;
            continue;
        }
        for (const auto &o : gate_column(l, weights)) {
            TwoLegConfig next = cfg;
            apply_local(next, position, o);
            out[next] += amp * std::sqrt(o.weight);
        }
    }
    return out;
}

BranchState advect(const BranchState &state) {
    BranchState out;
    for (const auto &[cfg, amp] : state) {
        TwoLegConfig next = cfg;
        if (next.lower.back() != kInert) {
            next.harvested.push_back(next.lower.back());
        }
        std::rotate(next.lower.rbegin(), next.lower.rbegin() + 1, next.lower.rend());
        next.lower.front() = kInert;
        out[next] += amp;
    }
    return out;
}

BranchState inject(const BranchState &state) {
    BranchState out;
    for (const auto &[cfg, amp] : state) {
        TwoLegConfig next = cfg;
        next.lower.front() = 0;
        out[next] += amp;
    }
    return out;
}

double GateStats::mean_gates() const {
    if (nontrivial_gates.empty()) {
        return 0.0;
    }
    double s = 0.0;
    for (const auto g : nontrivial_gates) {
        s += static_cast<double>(g);
    }
    return s / static_cast<double>(nontrivial_gates.size());
}

double GateStats::total_gates() const {
    double s = 0.0;
    for (const auto g : nontrivial_gates) {
        s += static_cast<double>(g);
    }
    return s;
}

std::size_t default_width(std::size_t n) {
    const auto root = static_cast<std::size_t>(std::ceil(3.0 * std::sqrt(static_cast<double>(n))));
    return std::max(root + 6, n + 4);
}

std::size_t trajectory_width(std::size_t n) {
    return static_cast<std::size_t>(std::ceil(6.0 * std::sqrt(static_cast<double>(n)))) + 10;
}

TwoLegResult run_two_leg(std::size_t n, const MotzkinEnsemble &weights, std::size_t width) {
    weights.validate();
    require(n >= 1, ErrorCode::InvalidArgument, "run_two_leg: N must be positive");
    require(weights.colors <= 9, ErrorCode::InvalidArgument, "run_two_leg supports at most 9 colors");
    if (width == 0) {
        width = default_width(n);
    }
    const auto bound = static_cast<std::size_t>(std::ceil(3.0 * std::sqrt(static_cast<double>(n)))) + 5;
    require(width >= bound, ErrorCode::WidthExhausted, "width below 3 sqrt(N) + 5");
    BranchState state{{TwoLegConfig::initial(width), cplx(1.0)}};
    GateStats stats;
    std::size_t injected = 0;
    const std::size_t max_steps = kInjectionPeriod * n + 2 * width + 8;
    for (std::size_t t = 0;; ++t) {
        require(t < max_steps, ErrorCode::WidthExhausted, "run_two_leg did not finish harvesting");
        if (state.begin()->first.harvested.size() == n) {
            break;
        }
        if (t % kInjectionPeriod == 0 && injected < n) {
            state = inject(state);
            ++injected;
        }
        std::set<int> touched;
        for (int layer = 0; layer < 3; ++layer) {
            BranchState next;
            for (const auto &[cfg, amp] : state) {
                const int c = center_for_layer(cfg.head, layer);
                if (c < 1) {
                    // the triangle around the wall never has E in its middle
                    next[cfg] += amp;
                    continue;
                }
                touched.insert(c);
                BranchState single{{cfg, amp}};
                for (const auto &[k, v] : triangle_gate(single, weights, c)) {
                    next[k] += v;
                }
            }
            state.swap(next);
        }
        state = advect(state);
        int lo = INT32_MAX;
        int hi = INT32_MIN;
        for (const auto &[cfg, amp] : state) {
            lo = std::min(lo, cfg.head);
            hi = std::max(hi, cfg.head);
        }
        stats.nontrivial_gates.push_back(touched.size());
        stats.active_width.push_back(static_cast<std::size_t>(hi - lo + 1));
    }
    stats.timesteps = stats.nontrivial_gates.size();

    std::map<Word, cplx> amps;
    double p = 0.0;
    for (const auto &[cfg, amp] : state) {
        if (cfg.head != 1) {
            continue;
        }
        Word w;
        for (const auto r : cfg.harvested) {
            w.push_back(static_cast<std::uint8_t>(to_symbol(r)));
        }
        amps[w] += amp;
    }
    for (const auto &[w, a] : amps) {
        p += std::norm(a);
    }
    require(p > 0.0, ErrorCode::EmptySupport, "no branch returns E to the origin");
    std::map<Word, cplx> kept;
    for (const auto &[w, a] : amps) {
        const cplx v = a / std::sqrt(p);
        if (std::abs(v) >= kAmplitudeThreshold) {
            kept.emplace(w, v);
        }
    }
    return {RadiatedState(n, motzkin::alphabet(weights.colors), std::move(kept), p), std::move(stats), p};
}

const char *to_string(Move move) noexcept {
    switch (move) {
    case Move::Pop:
        return "pop";
    case Move::Stay:
        return "stay";
    case Move::Push:
        return "push";
    }
    return "unknown";
}

namespace {

// Shared driver for sampled and scripted unravelings.
template <class Choose>
Trajectory unravel(std::size_t n, const MotzkinEnsemble &weights, std::size_t width, Choose &&choose) {
    TwoLegConfig cfg = TwoLegConfig::initial(width);
    std::vector<long> ids(width, -1);
    Trajectory tr;
    tr.particles.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        tr.particles[i].id = i;
    }
    std::size_t injected = 0;
    const std::size_t max_steps = kInjectionPeriod * n + 2 * width + 8;
    for (std::size_t t = 0; cfg.harvested.size() < n; ++t) {
        require(t < max_steps, ErrorCode::WidthExhausted, "trajectory did not finish harvesting");
        if (t % kInjectionPeriod == 0 && injected < n) {
            cfg.lower.front() = 0;
            ids.front() = static_cast<long>(injected++);
        }
        long moved = -1;
        for (int layer = 0; layer < 3; ++layer) {
            const int c = center_for_layer(cfg.head, layer);
            if (c < 1) {
                continue;
            }
            check_center(cfg, c);
            const auto p = static_cast<std::size_t>(c);
            const std::int8_t l = cfg.upper[p - 1];
            const std::int8_t m = cfg.upper[p];
            const std::int8_t r = cfg.upper[p + 1];
            const std::int8_t b = cfg.lower[p];
            const bool fresh = is_fresh_under_e(m, r, b);
            if (ids[p] >= 0) {
                tr.particles[static_cast<std::size_t>(ids[p])].views.push_back({l, m, r, b, fresh});
            }
            if (is_image_state(l, m, r, b)) {
                fail(ErrorCode::AuditFailure, "particle " + std::to_string(ids[p]) + " met an image state");
            }
            if (!fresh) {
                continue;
            }
            const auto options = gate_column(l, weights);
            const LocalOut &o = options[choose(options)];
            apply_local(cfg, c, o);
            auto &rec = tr.particles.at(static_cast<std::size_t>(ids[p]));
            rec.move = o.move;
            rec.color = o.color;
            moved = ids[p];
        }
        if (cfg.lower.back() != kInert) {
            cfg.harvested.push_back(cfg.lower.back());
        }
        std::rotate(cfg.lower.rbegin(), cfg.lower.rbegin() + 1, cfg.lower.rend());
        std::rotate(ids.rbegin(), ids.rbegin() + 1, ids.rend());
        cfg.lower.front() = kInert;
        ids.front() = -1;
        if (moved >= 0) {
            for (std::size_t i = 0; i < width; ++i) {
                if (ids[i] == moved) {
                    tr.particles[static_cast<std::size_t>(moved)].offset_after = static_cast<int>(i) - cfg.head;
                }
            }
        }
        tr.heads.push_back(cfg.head);
    }
    tr.harvested = cfg.harvested;
    tr.accepted = cfg.head == 1;
    return tr;
}

} // namespace

Trajectory sample_two_leg(std::size_t n, const MotzkinEnsemble &weights, std::uint64_t seed, std::size_t width) {
    weights.validate();
    require(weights.stochastic, ErrorCode::WeightNormalization, "sampling needs stochastic weights");
    if (width == 0) {
        width = trajectory_width(n);
    }
    Rng rng(derive_seed(seed, "two-leg"));
    return unravel(n, weights, width, [&](const std::vector<LocalOut> &opts) {
        const double u = uniform_open(rng);
        double acc = 0.0;
        for (std::size_t i = 0; i < opts.size(); ++i) {
            acc += opts[i].weight;
            if (u < acc) {
                return i;
            }
        }
        return opts.size() - 1;
    });
}

Trajectory scripted_two_leg(const std::vector<ScriptStep> &script, std::size_t width) {
    require(!script.empty(), ErrorCode::InvalidArgument, "empty script");
    if (width == 0) {
        width = default_width(script.size());
    }
    int colors = 1;
    for (const auto &s : script) {
        colors = std::max<int>(colors, s.color);
    }
    const auto weights = MotzkinEnsemble::unbiased(script.size(), colors, 1.0 / (4.0 * colors));
    std::size_t next = 0;
    return unravel(script.size(), weights, width, [&](const std::vector<LocalOut> &opts) {
        const ScriptStep step = script.at(next++);
        for (std::size_t i = 0; i < opts.size(); ++i) {
            if (opts[i].move == step.move && (step.move != Move::Push || opts[i].color == step.color)) {
                return i;
            }
        }
        fail(ErrorCode::InvalidArgument,
             std::string("scripted move ") + to_string(step.move) + " is not available at this configuration");
    });
}

AuditReport markovianity_audit(const Trajectory &trajectory) {
    AuditReport rep;
    for (const auto &p : trajectory.particles) {
        ++rep.particles;
        std::size_t nontrivial = 0;
        for (const auto &v : p.views) {
            nontrivial += v.nontrivial ? 1 : 0;
        }
        rep.max_nontrivial_per_particle = std::max(rep.max_nontrivial_per_particle, nontrivial);
        if (nontrivial > 1) {
            fail(ErrorCode::AuditFailure,
                 "particle " + std::to_string(p.id) + " took part in " + std::to_string(nontrivial) + " nontrivial gates");
        }
        if (!p.move) {
            continue;
        }
        // Views after the nontrivial one.
        std::vector<TriangleView> after;
        bool seen = false;
        for (const auto &v : p.views) {
            if (seen) {
                after.push_back(v);
            }
            seen = seen || v.nontrivial;
        }
        auto expect = [&](bool ok, const char *what) {
            if (!ok) {
                fail(ErrorCode::AuditFailure, "particle " + std::to_string(p.id) + ": " + what);
            }
        };
        switch (*p.move) {
        case Move::Pop:
            ++rep.pops;
            expect(after.empty(), "saw E again after a pop");
            expect(p.offset_after == 2, "not two steps ahead of E after a pop");
            break;
        case Move::Stay:
            ++rep.stays;
            expect(!after.empty() && after[0] == TriangleView{kE, 0, 0, 0, false}, "stay not followed by |E00,0>");
            break;
        case Move::Push: {
            ++rep.pushes;
            const auto y = p.color;
            const auto neg = static_cast<std::int8_t>(-y);
            expect(after.size() >= 2, "push followed by fewer than two triangles");
            expect(after[0].middle == kE && after[0].left == y && after[0].right == 0 && after[0].bottom == neg,
                   "push not followed by |yE0,-y>");
            expect(after[1] == TriangleView{kE, 0, 0, neg, false}, "push not followed by |E00,-y>");
            break;
        }
        }
    }
    return rep;
}

GateStats sampled_gate_stats(std::size_t n, const MotzkinEnsemble &weights, std::size_t samples, std::uint64_t seed,
                             std::size_t width) {
    require(samples >= 1, ErrorCode::InvalidArgument, "need at least one sample");
    if (width == 0) {
        width = trajectory_width(n);
    }
    std::vector<std::set<int>> touched;
    std::vector<int> lo;
    std::vector<int> hi;
    for (std::size_t s = 0; s < samples; ++s) {
        const auto tr = sample_two_leg(n, weights, derive_seed(seed, "gate-stats", s), width);
        if (touched.size() < tr.heads.size()) {
            touched.resize(tr.heads.size());
            lo.resize(tr.heads.size(), INT32_MAX);
            hi.resize(tr.heads.size(), INT32_MIN);
        }
        int prev = 1;
        for (std::size_t t = 0; t < tr.heads.size(); ++t) {
            // E sits in the triangles around where it started and ended the step.
            for (const int h : {prev, tr.heads[t]}) {
                for (int c = std::max(h - 1, 1); c <= h + 1; ++c) {
                    touched[t].insert(c);
                }
            }
            lo[t] = std::min(lo[t], tr.heads[t]);
            hi[t] = std::max(hi[t], tr.heads[t]);
            prev = tr.heads[t];
        }
    }
    GateStats stats;
    for (std::size_t t = 0; t < touched.size(); ++t) {
        stats.nontrivial_gates.push_back(touched[t].size());
        stats.active_width.push_back(static_cast<std::size_t>(hi[t] - lo[t] + 1));
    }
    stats.timesteps = touched.size();
    return stats;
}

} // namespace seqgen::conveyor
