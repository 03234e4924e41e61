// One PASS/FAIL line per acceptance criterion. Exit status is nonzero when any criterion fails.
#include "seqgen/channel.hpp"
#include "seqgen/conveyor.hpp"
#include "seqgen/errors.hpp"
#include "seqgen/grammar.hpp"
#include "seqgen/halfline_walk.hpp"
#include "seqgen/motzkin.hpp"
#include "seqgen/pda.hpp"
#include "seqgen/rng.hpp"
#include "seqgen/stats.hpp"
#include "seqgen/switches.hpp"

#include <Eigen/Eigenvalues>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

using namespace seqgen;
using motzkin::MotzkinEnsemble;

namespace {

constexpr std::uint64_t kSeed = 20240601;

struct Outcome {
    bool pass = true;
    std::ostringstream detail;

    void check(bool ok, const std::string &what) {
        pass = pass && ok;
        detail << (detail.tellp() > 0 ? "; " : "") << what << (ok ? "" : " [miss]");
    }
    void note(const std::string &what) { detail << (detail.tellp() > 0 ? "; " : "") << what; }
};

std::string fmt(double v, int prec = 4) {
    std::ostringstream os;
    os.precision(prec);
    os << v;
    return os.str();
}

std::string fit_str(const FitReport &f) {
    return fmt(f.exponent) + " [" + fmt(f.ci_low) + ", " + fmt(f.ci_high) + "]";
}

int failures = 0;

void criterion(int id, const std::string &name, double limit_s, const std::function<void(Outcome &)> &body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        body(o);
    } catch (const std::exception &e) {
        o.check(false, std::string("threw: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    o.check(secs < limit_s, "runtime " + fmt(secs, 3) + " s < " + fmt(limit_s) + " s");
    failures += o.pass ? 0 : 1;
    std::printf("criterion %d %s %s: %s\n", id, o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.str().c_str());
    std::fflush(stdout);
}

FitReport loglog(const std::vector<double> &x, const std::vector<double> &y) {
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const auto lf = least_squares(lx, ly);
    FitReport f;
    f.exponent = f.ci_low = f.ci_high = lf.slope;
    f.intercept = lf.intercept;
    f.residual_norm = lf.residual_norm;
    f.window = {x.front(), x.back()};
    f.points = x.size();
    return f;
}

qpda::CnfGrammar grammar(const std::string &name) {
    return qpda::load_grammar(std::string(SEQGEN_DATA_DIR) + "/grammars/" + name);
}

void c1(Outcome &o) {
    bool all = true;
    for (const int s : {1, 2}) {
        for (std::size_t n = 0; n <= 10; ++n) {
            const auto walks = motzkin::enumerate_walks(n, s);
            all = all && motzkin::BigCount(walks.size()) == motzkin::walk_count(n, s);
        }
    }
    o.check(all, "enumeration == DP count for N <= 10, s in {1,2}");
    const auto m3 = motzkin::enumerate_walks(3, 1).size();
    const auto m4 = motzkin::enumerate_walks(4, 1).size();
    o.check(m3 == 4 && m4 == 9, "M_3 = " + std::to_string(m3) + ", M_4 = " + std::to_string(m4));
}

void c2(Outcome &o) {
    double worst = 0.0;
    for (std::size_t n = 2; n <= 10; ++n) {
        const auto e = MotzkinEnsemble::unbiased(n, 1, 0.25);
        const auto ch = motzkin::motzkin_channel(e, n);
        const auto direct = sequential_generate(ch, motzkin::kEmptyStack, n, motzkin::kEmptyStack);
        for (std::size_t l = 1; l < n; ++l) {
            const double a = renyi_entropy_channel(ch, motzkin::kEmptyStack, motzkin::kEmptyStack, n, l, 2);
            worst = std::max(worst, std::abs(a - direct.renyi_entropy(l, 2.0)));
        }
    }
    o.check(worst <= 1e-8, "channel vs Schmidt Renyi-2 max error " + fmt(worst, 3) + " <= 1e-8");

    const auto ch = channels::random(4, 3, 42);
    const auto sigma = steady_state_of_channel(ch);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma.matrix);
    std::vector<double> p;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        p.push_back(std::max(0.0, es.eigenvalues()(i)));
    }
    const double deep = renyi_entropy_channel(ch, 0, 1, 120, 60, 2);
    const double err = std::abs(deep - renyi_of_spectrum(p, 2));
    o.check(err <= 1e-6, "deep cut vs steady state error " + fmt(err, 3) + " <= 1e-6");
}

void c3(Outcome &o) {
    const std::size_t horizon = 4096;
    const auto p0 = walk::return_probability_series(walk::TransitionSpec::make(0.25, 0.25), horizon);
    std::vector<double> t(p0.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = static_cast<double>(i + 1);
    }
    FitOptions opt;
    opt.seed = kSeed;
    const auto f = fit_exponent(t, p0, FitWindow{horizon / 2.0, static_cast<double>(horizon)}, opt);
    o.check(f.within(-0.5, 0.05), "p0(t) exponent " + fit_str(f) + " in -0.5 +/- 0.05");

    const auto pda = qpda::motzkin_pda(MotzkinEnsemble::unbiased(16, 1, 0.25));
    const auto rep = qpda::postselection_rate(pda, {16, 32, 64, 128, 256}, 10000, kSeed);
    o.check(rep.has_power_fit && rep.power.within(-0.5, 0.1),
            "PDA acceptance exponent " + fit_str(rep.power) + " in -0.5 +/- 0.1");
}

void c4(Outcome &o) {
    const auto cuts = log_grid(16, 256, 9);
    const auto s2 = motzkin::entropy_scaling(MotzkinEnsemble::unbiased(2048, 2, 0.125), cuts, kSeed);
    o.check(s2.power.within(0.5, 0.1), "s=2 slope " + fit_str(s2.power) + " in 0.5 +/- 0.1");
    const auto uni = motzkin::entropy_scaling(MotzkinEnsemble::uniform(2048, 2), cuts, kSeed);
    o.note("diagnostic: uniform-weight s=2 slope " + fmt(uni.power.exponent));
    const auto s1 = motzkin::entropy_scaling(MotzkinEnsemble::unbiased(2048, 1, 0.25), cuts, kSeed);
    o.check(s1.preferred == motzkin::EntropyForm::Logarithmic,
            std::string("s=1 preferred form ") + motzkin::to_string(s1.preferred));
    const auto pinned = motzkin::entropy_scaling(
        MotzkinEnsemble::from_walk(2048, walk::TransitionSpec::make(0.4, 0.2), 2), cuts, kSeed);
    o.check(pinned.preferred == motzkin::EntropyForm::Saturating,
            std::string("pinned form ") + motzkin::to_string(pinned.preferred) + ", S(256) = " +
                fmt(pinned.entropies.back()));
}

void c5(Outcome &o) {
    const double gl = 0.3;
    const auto pinned = walk::TransitionSpec::make(gl, 0.15);
    const auto critical = walk::TransitionSpec::make(gl, gl);
    const auto escaping = walk::TransitionSpec::make(gl, 0.45);
    const bool labels = walk::classify_phase(pinned) == walk::PhaseLabel::Pinned &&
                        walk::classify_phase(critical) == walk::PhaseLabel::Critical &&
                        walk::classify_phase(escaping) == walk::PhaseLabel::Escaping;
    o.check(labels, "delta<0 pinned, delta=0 critical, delta>0 escaping");

    const auto d = walk::steady_state(pinned);
    const double ratio = d.probabilities[1] / d.probabilities[0];
    o.check(std::abs(ratio - 0.5) < 1e-10, "pinned steady state ratio " + fmt(ratio, 12));
    int refused = 0;
    for (const auto &spec : {critical, escaping}) {
        try {
            walk::steady_state(spec);
        } catch (const Error &e) {
            refused += e.code() == ErrorCode::NoSteadyState ? 1 : 0;
        }
    }
    o.check(refused == 2, "critical and escaping have no steady state");

    std::vector<double> x, y;
    for (const double delta : {-0.04, -0.16, -0.36}) {
        const auto dist = walk::steady_state(walk::TransitionSpec::make(gl, gl * (1 + delta)));
        x.push_back(-delta);
        y.push_back(walk::fit_confinement_length(dist, 1));
    }
    const auto f = loglog(x, y);
    o.check(f.within(-0.5, 0.1), "xi vs |delta| exponent " + fmt(f.exponent) + " in -0.5 +/- 0.1");
}

void c6(Outcome &o) {
    double worst2 = 1.0;
    for (std::size_t n = 1; n <= 8; ++n) {
        for (const auto &w : {MotzkinEnsemble::unbiased(n, 2, 0.125), MotzkinEnsemble::unbiased(n, 1, 0.25),
                              MotzkinEnsemble::make(n, 2, 0.15, 0.2, 0.5, 0.3, 0.4)}) {
            const auto got = conveyor::run_two_leg(n, w);
            worst2 = std::min(worst2, fidelity(got.state, motzkin::exact_state(w)));
        }
    }
    o.check(worst2 >= 1 - 1e-10, "two-leg min fidelity 1 - " + fmt(1 - worst2, 3));

    double worst3 = 1.0;
    std::size_t compared = 0;
    for (const auto *name : {"motzkin1.cnf", "balanced01.cnf", "cat3.cnf"}) {
        const auto g = grammar(name);
        const auto pda = qpda::compile_to_pda(g);
        for (std::size_t n = 1; n <= 6; ++n) {
            std::optional<RadiatedState> want;
            try {
                want = qpda::exact_superposition(pda, n);
            } catch (const Error &e) {
                if (e.code() != ErrorCode::EmptySupport) {
                    throw;
                }
                continue; // no string of this length
            }
            worst3 = std::min(worst3, fidelity(conveyor::run_three_leg(g, n).state, *want));
            ++compared;
        }
    }
    o.check(worst3 >= 1 - 1e-8, "three-leg min fidelity 1 - " + fmt(1 - worst3, 3) + " over " +
                                     std::to_string(compared) + " (grammar, N) pairs");

    std::size_t audited = 0;
    std::size_t particles = 0;
    const auto w = MotzkinEnsemble::unbiased(64, 2, 0.125);
    for (std::size_t i = 0; i < 1000; ++i) {
        const auto tr = conveyor::sample_two_leg(64, w, derive_seed(kSeed, "audit", i));
        particles += conveyor::markovianity_audit(tr).particles;
        ++audited;
    }
    o.check(audited == 1000, "markovianity audit on " + std::to_string(audited) + " trajectories (" +
                                 std::to_string(particles) + " particles)");
}

void c7(Outcome &o) {
    std::vector<double> x, y;
    for (const std::size_t n : {64u, 256u, 1024u}) {
        const auto st = conveyor::sampled_gate_stats(n, MotzkinEnsemble::unbiased(n, 2, 0.125), 200, kSeed);
        x.push_back(static_cast<double>(n));
        y.push_back(st.mean_gates());
    }
    const auto f = loglog(x, y);
    o.check(f.within(0.5, 0.15), "gates per step exponent " + fmt(f.exponent) + " in 0.5 +/- 0.15 (means " +
                                     fmt(y[0]) + ", " + fmt(y[1]) + ", " + fmt(y[2]) + ")");
}

void c8(Outcome &o) {
    const std::size_t horizon = 100000;
    const auto times = log_grid(1, horizon, 48);
    const auto ens = switches::levy_ensemble(switches::AuxWalkerModel{}, horizon, 0.5, 10000, kSeed, times);
    const auto levy = switches::fit_ensemble_exponent(ens, 1000, horizon, false, 200, kSeed);
    o.check(levy.within(0.75, 0.05), "Levy exponent " + fit_str(levy) + " in 0.75 +/- 0.05");

    const auto over = switches::overhead_scaling(switches::AuxWalkerModel{}, {100, 1000, 10000}, 10000, kSeed);
    o.check(over.has_fit && over.fit.within(-0.5, 0.1), "return overhead exponent " + fit_str(over.fit) +
                                                            " in -0.5 +/- 0.1");

    const std::size_t t_trap = 1000000;
    const auto trap_times = log_grid(1, t_trap, 48);
    for (const double mu : {1.0 / 3.0, 2.0 / 3.0}) {
        const switches::RandomRateField field{switches::RandomRateField::Kind::Trap, mu,
                                              derive_seed(kSeed, "trap-field", mu < 0.5 ? 1 : 2)};
        const auto te = switches::subdiffusive_ensemble(field, t_trap, 10000, kSeed, trap_times);
        const auto f = switches::fit_ensemble_exponent(te, 10000, t_trap, false, 200, kSeed);
        o.check(f.within(field.predicted_exponent(), 0.07), "trap mu=" + fmt(mu, 3) + " exponent " + fit_str(f) +
                                                                " vs " + fmt(field.predicted_exponent()) +
                                                                " +/- 0.07");
    }
}

} // namespace

int main() {
    criterion(1, "Motzkin combinatorics oracle", 10, c1);
    criterion(2, "channel/state duality", 30, c2);
    criterion(3, "critical return and post-selection scaling", 300, c3);
    criterion(4, "entanglement scaling", 120, c4);
    criterion(5, "phase diagram", 60, c5);
    criterion(6, "circuit equivalence", 300, c6);
    criterion(7, "gate accounting", 120, c7);
    criterion(8, "switched-walk exponents", 600, c8);
    std::printf("criterion 9 NOT-REPRODUCIBLE asymptotic prefactors, adiabatic gap comparison, exact equality "
                "with the uniform Motzkin ground state: out of reach at desk scale, covered by criteria 1-8\n");
    std::printf("summary: %d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
