#include "seqgen/conveyor.hpp"

#include "seqgen/errors.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <set>

namespace seqgen::conveyor {

namespace {

constexpr int kX = ThreeLegConfig::kX;
constexpr int kFresh = ThreeLegConfig::kFresh;
constexpr int kInert = ThreeLegConfig::kInert;

bool is_variable(int cell) {
    return cell > 0;
}

bool is_marked(int cell) {
    return cell < 0 && cell != kInert;
}

void shift_conveyor(ThreeLegConfig &cfg) {
    const int out = cfg.lower.back();
    if (is_marked(out)) {
        cfg.harvested.push_back(-out - 1);
    } else if (out == kFresh) {
        ++cfg.unmarked_lost;
    }
    std::rotate(cfg.lower.rbegin(), cfg.lower.rbegin() + 1, cfg.lower.rend());
    cfg.lower.front() = kInert;
}

} // namespace

ThreeLegConfig ThreeLegConfig::initial(std::size_t width, int start_variable) {
    require(width >= 5, ErrorCode::Geometry, "three-leg lattice needs width >= 5");
    ThreeLegConfig c;
    c.stack.assign(width, kEmpty);
    c.lower.assign(width, kInert);
    c.stack[1] = start_variable + 1;
    c.head = 1;
    return c;
}

ThreeLegState three_leg_cycle(const ThreeLegState &state, const qpda::CnfGrammar &grammar, bool inject_particle) {
    ThreeLegState out;
    for (const auto &[start_cfg, amp] : state) {
        ThreeLegConfig cfg = start_cfg;
        if (inject_particle) {
            cfg.lower.front() = kFresh;
        }
        const int h = cfg.head;
        const auto hu = static_cast<std::size_t>(h);
        const bool active = h >= 1 && cfg.lower[hu] == kFresh && is_variable(cfg.stack[hu]);
        if (!active) {
            shift_conveyor(cfg);
            out[cfg] += amp;
            continue;
        }
        require(hu + 2 < cfg.width(), ErrorCode::WidthExhausted, "stack head reached the right edge");
        const int var = cfg.stack[hu] - 1;
        for (const auto *rule : grammar.rules_for(var)) {
            ThreeLegConfig next = cfg;
            // (1) substitution at the head
            if (rule->binary()) {
                next.stack[hu] = rule->right + 1;
                next.stack[hu + 1] = rule->left + 1;
            } else {
                next.stack[hu] = -(rule->terminal + 1);
                next.stack[hu + 1] = kX;
            }
            // (2) X-conditioned swap of the terminal onto the particle
            if (next.stack[hu + 1] == kX) {
                std::swap(next.stack[hu], next.lower[hu]);
            }
            // (3) X back to 0
            if (next.stack[hu + 1] == kX) {
                next.stack[hu + 1] = ThreeLegConfig::kEmpty;
            }
            for (const int cell : next.stack) {
                require(cell != kX, ErrorCode::CycleInvariant, "X survived the reset step");
            }
            // (4) head restoration, then the conveyor moves
            if (is_marked(next.lower[hu])) {
                next.head = h - 1;
            } else if (is_variable(next.stack[hu + 1])) {
                next.head = h + 1;
            }
            shift_conveyor(next);
            out[next] += amp * std::sqrt(rule->weight);
        }
    }
    return out;
}

ThreeLegResult run_three_leg(const qpda::CnfGrammar &grammar, std::size_t n, std::size_t width) {
    grammar.validate();
    require(n >= 1, ErrorCode::InvalidArgument, "run_three_leg: N must be positive");
    if (width == 0) {
        width = default_width(n) + 2;
    }
    ThreeLegState state{{ThreeLegConfig::initial(width, grammar.start()), cplx(1.0)}};
    GateStats stats;
    double pruned = 0.0;
    const std::size_t period = 2;
    const std::size_t cycles = period * (n - 1) + width + 1;
    for (std::size_t t = 0; t < cycles && !state.empty(); ++t) {
        const bool inject = t % period == 0 && t / period < n;
        state = three_leg_cycle(state, grammar, inject);
        const std::size_t injected = std::min(n, t / period + 1);
        ThreeLegState kept;
        std::set<int> touched;
        int lo = INT_MAX;
        int hi = INT_MIN;
        for (const auto &[cfg, amp] : state) {
            // Fresh particles still left of or under E, plus those not yet injected.
            std::size_t usable = n - injected;
            for (std::size_t i = 0; i <= static_cast<std::size_t>(std::max(cfg.head, 0)); ++i) {
                usable += cfg.lower[i] == kFresh ? 1 : 0;
            }
            if (cfg.unmarked_lost > 0 || static_cast<std::size_t>(std::max(cfg.head, 0)) > usable) {
                pruned += std::norm(amp);
                continue;
            }
            kept.emplace(cfg, amp);
            touched.insert({cfg.head - 1, cfg.head, cfg.head + 1});
            lo = std::min(lo, cfg.head);
            hi = std::max(hi, cfg.head);
        }
        state.swap(kept);
        if (!state.empty()) {
            stats.nontrivial_gates.push_back(touched.size());
            stats.active_width.push_back(static_cast<std::size_t>(hi - lo + 1));
        }
    }
    stats.timesteps = stats.nontrivial_gates.size();

    std::map<Word, cplx> amps;
    for (const auto &[cfg, amp] : state) {
        if (cfg.head == 0 && cfg.unmarked_lost == 0 && cfg.harvested.size() == n) {
            Word w;
            for (const int a : cfg.harvested) {
                w.push_back(static_cast<std::uint8_t>(a));
            }
            amps[w] += amp;
        }
    }
    double p = 0.0;
    for (const auto &[w, a] : amps) {
        p += std::norm(a);
    }
    require(p > 0.0, ErrorCode::EmptySupport, "no branch ends with an empty stack");
    std::map<Word, cplx> kept;
    for (const auto &[w, a] : amps) {
        const cplx v = a / std::sqrt(p);
        if (std::abs(v) >= kAmplitudeThreshold) {
            kept.emplace(w, v);
        }
    }
    return {RadiatedState(n, grammar.terminals(), std::move(kept), p), std::move(stats), p, pruned};
}

} // namespace seqgen::conveyor
