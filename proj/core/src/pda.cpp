#include "seqgen/pda.hpp"

#include "seqgen/errors.hpp"
#include "seqgen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace seqgen::qpda {

int PdaAction::height_change() const {
    switch (kind) {
    case Kind::Expand:
    case Kind::Push:
        return 1;
    case Kind::Stay:
        return 0;
    case Kind::Emit:
        return -1;
    }
    return 0;
}

void WeightedPda::validate() const {
    require(table.size() == stack_symbols.size(), ErrorCode::DimensionMismatch, "PDA table size differs from stack alphabet");
    const auto nsym = static_cast<int>(stack_symbols.size());
    const auto nout = static_cast<int>(output_alphabet.size());
    auto check_row = [&](const std::vector<PdaAction> &row, bool empty_stack) {
        if (row.empty()) {
            return;
        }
        double sum = 0.0;
        for (const auto &a : row) {
            require(a.weight >= 0.0, ErrorCode::WeightNormalization, "PDA action with negative weight");
            sum += a.weight;
            switch (a.kind) {
            case PdaAction::Kind::Expand:
                require(!empty_stack, ErrorCode::InvalidArgument, "Expand needs a top symbol");
                require(a.push.size() == 2 && a.emitted < 0, ErrorCode::InvalidArgument, "Expand pushes two symbols silently");
                break;
            case PdaAction::Kind::Emit:
                require(!empty_stack, ErrorCode::InvalidArgument, "Emit pops the top symbol");
                require(a.push.empty(), ErrorCode::InvalidArgument, "Emit pops exactly one symbol");
                break;
            case PdaAction::Kind::Stay:
                require(a.push.empty(), ErrorCode::InvalidArgument, "Stay leaves the stack unchanged");
                break;
            case PdaAction::Kind::Push:
                require(a.push.size() == 1, ErrorCode::InvalidArgument, "Push adds one symbol");
                break;
            }
            if (a.kind != PdaAction::Kind::Expand) {
                require(a.emitted >= 0 && a.emitted < nout, ErrorCode::InvalidArgument, "emitted symbol out of range");
            }
            for (const int s : a.push) {
                require(s >= 0 && s < nsym, ErrorCode::InvalidArgument, "pushed symbol out of range");
            }
        }
        require(std::abs(sum - 1.0) <= 1e-12, ErrorCode::WeightNormalization, "PDA row weights do not sum to 1");
    };
    for (const auto &row : table) {
        check_row(row, false);
    }
    check_row(empty_row, true);
    for (const int s : initial_stack) {
        require(s >= 0 && s < nsym, ErrorCode::InvalidArgument, "initial stack symbol out of range");
    }
}

const std::vector<PdaAction> &WeightedPda::row(const std::vector<int> &stack) const {
    return stack.empty() ? empty_row : table[static_cast<std::size_t>(stack.back())];
}

WeightedPda compile_to_pda(const CnfGrammar &grammar) {
    grammar.validate();
    WeightedPda pda;
    pda.stack_symbols = grammar.variables();
    pda.output_alphabet = grammar.terminals();
    pda.table.resize(pda.stack_symbols.size());
    for (const auto &r : grammar.rules()) {
        PdaAction a;
        a.weight = r.weight;
        if (r.binary()) {
            a.kind = PdaAction::Kind::Expand;
            a.push = {r.left, r.right};
        } else {
            a.kind = PdaAction::Kind::Emit;
            a.emitted = r.terminal;
        }
        pda.table[static_cast<std::size_t>(r.lhs)].push_back(a);
    }
    pda.initial_stack = {grammar.start()};
    pda.validate();
    return pda;
}

WeightedPda motzkin_pda(const motzkin::MotzkinEnsemble &e) {
    e.validate();
    require(e.stochastic, ErrorCode::WeightNormalization, "motzkin_pda needs a stochastic ensemble");
    WeightedPda pda;
    pda.output_alphabet = motzkin::alphabet(e.colors);
    for (int c = 1; c <= e.colors; ++c) {
        pda.stack_symbols.push_back(std::to_string(c));
    }
    auto pushes = [&](double w, std::vector<PdaAction> &row) {
        for (int c = 1; c <= e.colors; ++c) {
            if (w > 0.0) {
                row.push_back({PdaAction::Kind::Push, w, motzkin::symbol_index(c), {c - 1}});
            }
        }
    };
    if (e.w_zero_boundary > 0.0) {
        pda.empty_row.push_back({PdaAction::Kind::Stay, e.w_zero_boundary, 0, {}});
    }
    pushes(e.w_plus_boundary, pda.empty_row);
    for (int c = 1; c <= e.colors; ++c) {
        std::vector<PdaAction> row;
        if (e.w_zero > 0.0) {
            row.push_back({PdaAction::Kind::Stay, e.w_zero, 0, {}});
        }
        pushes(e.w_plus, row);
        if (e.w_minus > 0.0) {
            row.push_back({PdaAction::Kind::Emit, e.w_minus, motzkin::symbol_index(-c), {}});
        }
        pda.table.push_back(std::move(row));
    }
    pda.validate();
    return pda;
}

const char *to_string(BiasSchedule schedule) noexcept {
    return schedule == BiasSchedule::PushPop ? "push-pop" : "none";
}

const char *to_string(DecayRegime regime) noexcept {
    switch (regime) {
    case DecayRegime::Constant:
        return "constant";
    case DecayRegime::Polynomial:
        return "polynomial";
    case DecayRegime::Exponential:
        return "exponential";
    }
    return "unknown";
}

std::vector<PdaAction> modulated_row(const std::vector<PdaAction> &row, BiasSchedule schedule, std::size_t emitted,
                                     std::size_t target) {
    if (schedule == BiasSchedule::None || row.empty()) {
        return row;
    }
    const bool pushing = 2 * emitted < target;
    int best = pushing ? -2 : 2;
    for (const auto &a : row) {
        if (a.weight > 0.0) {
            best = pushing ? std::max(best, a.height_change()) : std::min(best, a.height_change());
        }
    }
    std::vector<PdaAction> out;
    double total = 0.0;
    for (const auto &a : row) {
        if (a.weight > 0.0 && a.height_change() == best) {
            out.push_back(a);
            total += a.weight;
        }
    }
    for (auto &a : out) {
        a.weight /= total;
    }
    return out;
}

namespace {

void apply(const PdaAction &a, std::vector<int> &stack) {
    switch (a.kind) {
    case PdaAction::Kind::Expand:
        stack.pop_back();
        stack.push_back(a.push[1]);
        stack.push_back(a.push[0]);
        break;
    case PdaAction::Kind::Emit:
        stack.pop_back();
        break;
    case PdaAction::Kind::Stay:
        break;
    case PdaAction::Kind::Push:
        stack.push_back(a.push[0]);
        break;
    }
}

} // namespace

EmissionRun sample_emission(const WeightedPda &pda, std::size_t target, std::uint64_t seed, BiasSchedule schedule,
                            std::size_t max_steps) {
    if (max_steps == 0) {
        max_steps = 64 * std::max<std::size_t>(target, 64);
    }
    Rng rng(derive_seed(seed, "emission"));
    EmissionRun run;
    std::vector<int> stack = pda.initial_stack;
    while (true) {
        const std::size_t k = run.emitted.size();
        if (target > 0 && k == target) {
            run.accepted = stack.empty();
            break;
        }
        const auto &base = pda.row(stack);
        if (base.empty()) {
            run.accepted = stack.empty() && (target == 0 || k == target);
            break;
        }
        if (target > 0 && stack.size() > target - k) {
            break;
        }
        if (run.steps >= max_steps) {
            run.truncated = true;
            break;
        }
        const auto row = modulated_row(base, schedule, k, target);
        const double u = uniform_open(rng);
        double acc = 0.0;
        std::size_t pick = row.size() - 1;
        for (std::size_t i = 0; i < row.size(); ++i) {
            acc += row[i].weight;
            if (u < acc) {
                pick = i;
                break;
            }
        }
        const PdaAction &a = row[pick];
        run.weight *= a.weight;
        apply(a, stack);
        ++run.steps;
        if (a.emits()) {
            run.emitted.push_back(a.emitted);
            run.heights.push_back(stack.size());
        }
    }
    run.final_stack = stack;
    return run;
}

namespace {

// Follows silent moves from `stack` and reports every emitting move that
// keeps the height within `cap` afterwards. `scale` maps rule weights.
void emitting_closure(const WeightedPda &pda, const std::vector<int> &stack, double value, std::size_t cap,
                      const std::function<double(double)> &scale,
                      const std::function<void(int, const std::vector<int> &, double)> &emit, int depth = 0) {
    require(depth <= 4096, ErrorCode::SizeLimit, "silent expansion too deep");
    for (const auto &a : pda.row(stack)) {
        if (a.weight <= 0.0) {
            continue;
        }
        std::vector<int> next = stack;
        apply(a, next);
        const double v = value * scale(a.weight);
        if (a.kind == PdaAction::Kind::Expand) {
            if (next.size() <= cap + 1) {
                emitting_closure(pda, next, v, cap, scale, emit, depth + 1);
            }
        } else if (next.size() <= cap) {
            emit(a.emitted, next, v);
        }
    }
}

} // namespace

double acceptance_weight(const WeightedPda &pda, const std::vector<int> &word) {
    pda.validate();
    const std::size_t n = word.size();
    std::map<std::vector<int>, double> layer{{pda.initial_stack, 1.0}};
    const auto identity = [](double w) { return w; };
    for (std::size_t k = 0; k < n; ++k) {
        std::map<std::vector<int>, double> next;
        const std::size_t cap = n - k - 1;
        for (const auto &[stack, w] : layer) {
            emitting_closure(pda, stack, w, cap, identity, [&](int sym, const std::vector<int> &s, double v) {
                if (sym == word[k]) {
                    next[s] += v;
                }
            });
        }
        layer.swap(next);
    }
    const auto it = layer.find({});
    return it == layer.end() ? 0.0 : it->second;
}

RadiatedState exact_superposition(const WeightedPda &pda, std::size_t n) {
    pda.validate();
    require(n >= 1 && n <= 12, ErrorCode::SizeLimit, "exact_superposition supports 1 <= N <= 12");
    using Key = std::pair<Word, std::vector<int>>;
    std::map<Key, double> layer{{{Word{}, pda.initial_stack}, 1.0}};
    const auto root = [](double w) { return std::sqrt(w); };
    for (std::size_t k = 0; k < n; ++k) {
        std::map<Key, double> next;
        const std::size_t cap = n - k - 1;
        for (const auto &[key, amp] : layer) {
            emitting_closure(pda, key.second, amp, cap, root, [&](int sym, const std::vector<int> &s, double v) {
                Word w = key.first;
                w.push_back(static_cast<std::uint8_t>(sym));
                next[{std::move(w), s}] += v;
            });
        }
        layer.swap(next);
    }
    std::map<Word, cplx> amps;
    double p = 0.0;
    for (const auto &[key, amp] : layer) {
        if (key.second.empty()) {
            amps[key.first] += amp;
        }
    }
    for (const auto &[w, a] : amps) {
        p += std::norm(a);
    }
    require(p > 0.0, ErrorCode::EmptySupport, "no accepted run of the requested length");
    std::map<Word, cplx> kept;
    for (const auto &[w, a] : amps) {
        const cplx v = a / std::sqrt(p);
        if (std::abs(v) >= kAmplitudeThreshold) {
            kept.emplace(w, v);
        }
    }
    return RadiatedState(n, pda.output_alphabet, std::move(kept), p);
}

PdaTransfer transfer_family(const WeightedPda &pda, std::size_t n) {
    pda.validate();
    std::map<std::vector<int>, std::size_t> index;
    std::vector<std::vector<int>> stacks;
    std::vector<std::size_t> first_layer; // emissions needed to reach each stack
    auto id = [&](const std::vector<int> &s, std::size_t layer) {
        const auto [it, fresh] = index.emplace(s, stacks.size());
        if (fresh) {
            stacks.push_back(s);
            first_layer.push_back(layer);
            require(stacks.size() <= 200000, ErrorCode::SizeLimit, "transfer_family: too many reachable stacks");
        }
        return it->second;
    };
    const std::size_t nsym = pda.output_alphabet.size();
    std::vector<std::map<std::pair<std::size_t, std::size_t>, double>> entries(nsym);
    const auto root = [](double w) { return std::sqrt(w); };
    id(pda.initial_stack, 0);
    // Stacks are discovered breadth first, so first_layer is the earliest
    // emission count; a stack met at layer k is only useful if it can drain
    // in the n - k emissions left.
    for (std::size_t i = 0; i < stacks.size(); ++i) {
        const std::size_t layer = first_layer[i];
        if (layer >= n) {
            continue;
        }
        const std::vector<int> src = stacks[i];
        emitting_closure(pda, src, 1.0, n - layer - 1, root, [&](int sym, const std::vector<int> &s, double v) {
            const std::size_t dst = id(s, layer + 1);
            entries[static_cast<std::size_t>(sym)][{dst, i}] += v;
        });
    }
    const std::size_t empty = id({}, n);
    const auto dim = static_cast<Eigen::Index>(stacks.size());
    std::vector<SparseOp> ops;
    for (const auto &e : entries) {
        std::vector<Eigen::Triplet<cplx>> trip;
        for (const auto &[rc, v] : e) {
            trip.emplace_back(static_cast<Eigen::Index>(rc.first), static_cast<Eigen::Index>(rc.second), v);
        }
        SparseOp op(dim, dim);
        op.setFromTriplets(trip.begin(), trip.end());
        ops.push_back(std::move(op));
    }
    return {KrausFamily(pda.output_alphabet, std::move(ops)), index.at(pda.initial_stack), empty, std::move(stacks)};
}

PostselectionReport postselection_rate(const WeightedPda &pda, const std::vector<std::size_t> &lengths,
                                       std::size_t trials, std::uint64_t seed, BiasSchedule schedule) {
    pda.validate();
    require(trials >= 10000, ErrorCode::InsufficientEnsemble, "postselection_rate needs at least 10^4 trials per N");
    require(!lengths.empty(), ErrorCode::InvalidArgument, "postselection_rate: no lengths given");
    PostselectionReport report;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const std::size_t n : lengths) {
        require(n >= 1, ErrorCode::InvalidArgument, "postselection_rate: N must be positive");
        RatePoint pt;
        pt.n = n;
        pt.trials = trials;
        for (std::size_t t = 0; t < trials; ++t) {
            const auto run = sample_emission(pda, n, derive_seed(seed, "postselection", (n << 32) ^ t), schedule);
            pt.accepted += run.accepted ? 1 : 0;
        }
        pt.rate = static_cast<double>(pt.accepted) / static_cast<double>(trials);
        pt.ci = wilson_interval(pt.accepted, trials);
        if (pt.accepted == 0) {
            report.warnings.push_back("zero acceptance at N=" + std::to_string(n) + ", exponential regime suspected");
        } else {
            xs.push_back(static_cast<double>(n));
            ys.push_back(pt.rate);
        }
        report.points.push_back(pt);
    }
    std::vector<double> log_y;
    for (const double y : ys) {
        log_y.push_back(std::log(y));
    }
    double power_residual = HUGE_VAL;
    if (xs.size() >= 4) {
        FitOptions opt;
        opt.seed = derive_seed(seed, "postselection-fit");
        report.power = fit_exponent(xs, ys, std::nullopt, opt);
        report.has_power_fit = true;
        power_residual = report.power.residual_norm;
    }
    if (xs.size() >= 2) {
        report.exponential = least_squares(xs, log_y);
        report.has_exponential_fit = true;
    }
    if (!report.warnings.empty()) {
        report.regime = DecayRegime::Exponential;
    } else if (report.has_power_fit && std::abs(report.power.exponent) < 0.1) {
        report.regime = DecayRegime::Constant;
    } else if (report.has_exponential_fit && report.exponential.residual_norm < power_residual) {
        report.regime = DecayRegime::Exponential;
    } else {
        report.regime = DecayRegime::Polynomial;
    }
    return report;
}

} // namespace seqgen::qpda
