#include "seqgen/cli/claims.hpp"

#include "seqgen/conveyor.hpp"
#include "seqgen/errors.hpp"
#include "seqgen/halfline_walk.hpp"
#include "seqgen/motzkin.hpp"
#include "seqgen/pda.hpp"
#include "seqgen/rng.hpp"
#include "seqgen/switches.hpp"

#include <cmath>
#include <functional>
#include <map>

namespace seqgen::cli {

namespace {

std::vector<double> as_double(const std::vector<std::size_t> &v) {
    return {v.begin(), v.end()};
}

ClaimResult motzkin_sqrt(std::uint64_t seed) {
    const auto e = motzkin::MotzkinEnsemble::unbiased(2048, 2, 0.125);
    const auto cuts = log_grid(16, 256, 9);
    const auto rep = motzkin::entropy_scaling(e, cuts, seed);
    ClaimResult r{"motzkin-sqrt", {}, {}};
    r.checks.push_back({"S(l) exponent, s=2, N=2048", rep.power, 0.5, 0.1, rep.cuts, rep.entropies});
    r.notes.push_back(std::string("preferred form: ") + motzkin::to_string(rep.preferred));
    return r;
}

ClaimResult return_sqrt(std::uint64_t seed) {
    const std::size_t horizon = 4096;
    const auto p0 = walk::return_probability_series(walk::TransitionSpec::make(0.25, 0.25), horizon);
    std::vector<double> t(p0.size());
    for (std::size_t i = 0; i < t.size(); ++i) {
        t[i] = static_cast<double>(i + 1);
    }
    FitOptions opt;
    opt.seed = seed;
    const auto fit = fit_exponent(t, p0, FitWindow{horizon / 2.0, static_cast<double>(horizon)}, opt);
    return {"return-sqrt", {{"p0(t) exponent, critical walk", fit, -0.5, 0.05, t, p0}}, {}};
}

ClaimResult postselection(std::uint64_t seed) {
    const std::vector<std::size_t> ns{16, 32, 64, 128, 256};
    const auto pda = qpda::motzkin_pda(motzkin::MotzkinEnsemble::unbiased(16, 1, 0.25));
    const auto rep = qpda::postselection_rate(pda, ns, 10000, seed);
    require(rep.has_power_fit, ErrorCode::InsufficientData, "postselection: no power fit");
    std::vector<double> y;
    for (const auto &p : rep.points) {
        y.push_back(p.rate);
    }
    ClaimResult r{"postselection", {{"acceptance rate exponent", rep.power, -0.5, 0.1, as_double(ns), y}}, {}};
    r.notes.push_back(std::string("regime: ") + qpda::to_string(rep.regime));
    r.notes.insert(r.notes.end(), rep.warnings.begin(), rep.warnings.end());
    return r;
}

ClaimResult levy(std::uint64_t seed) {
    const std::size_t horizon = 100000;
    const auto times = log_grid(1, horizon, 48);
    const auto ens = switches::levy_ensemble(switches::AuxWalkerModel{}, horizon, 0.5, 10000, seed, times);
    const auto fit = switches::fit_ensemble_exponent(ens, 1000, horizon, false, 200, seed);
    return {"levy", {{"<x>(t) exponent, v=0.5", fit, 0.75, 0.05, as_double(times), ens.mean_position()}}, {}};
}

ClaimResult trap(std::uint64_t seed) {
    const std::size_t horizon = 1000000;
    const auto times = log_grid(1, horizon, 48);
    ClaimResult r{"trap", {}, {}};
    for (const double mu : {1.0 / 3.0, 2.0 / 3.0}) {
        const switches::RandomRateField field{switches::RandomRateField::Kind::Trap, mu,
                                              derive_seed(seed, "trap-field", mu < 0.5 ? 1 : 2)};
        const auto ens = switches::subdiffusive_ensemble(field, horizon, 10000, seed, times);
        const auto fit = switches::fit_ensemble_exponent(ens, 10000, horizon, false, 200, seed);
        r.checks.push_back({"<x>(t) exponent, mu=" + std::to_string(mu), fit, field.predicted_exponent(), 0.07,
                            as_double(times), ens.mean_position()});
    }
    return r;
}

ClaimResult gates(std::uint64_t seed) {
    const std::vector<std::size_t> ns{64, 256, 1024};
    std::vector<double> y;
    for (const auto n : ns) {
        const auto stats =
            conveyor::sampled_gate_stats(n, motzkin::MotzkinEnsemble::unbiased(n, 2, 0.125), 200, seed);
        y.push_back(stats.mean_gates());
    }
    const auto x = as_double(ns);
    // three points: plain least squares, no bootstrap
    std::vector<double> lx, ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    const auto lf = least_squares(lx, ly);
    FitReport fit;
    fit.exponent = fit.ci_low = fit.ci_high = lf.slope;
    fit.intercept = lf.intercept;
    fit.residual_norm = lf.residual_norm;
    fit.window = {x.front(), x.back()};
    fit.points = x.size();
    return {"gates", {{"nontrivial gates per step exponent", fit, 0.5, 0.15, x, y}}, {}};
}

ClaimResult phase(std::uint64_t) {
    ClaimResult r{"phase", {}, {}};
    const double gl = 0.3;
    for (const double d : {-0.5, 0.0, 0.5}) {
        const auto spec = walk::TransitionSpec::make(gl, gl * (1 + d));
        r.notes.push_back("delta " + std::to_string(d) + ": " + walk::to_string(walk::classify_phase(spec)));
    }
    std::vector<double> x, y, lx, ly;
    for (const double d : {-0.04, -0.16, -0.36}) {
        const auto dist = walk::steady_state(walk::TransitionSpec::make(gl, gl * (1 + d)));
        const double xi = walk::fit_confinement_length(dist, 1);
        x.push_back(-d);
        y.push_back(xi);
        lx.push_back(std::log(-d));
        ly.push_back(std::log(xi));
    }
    const auto lf = least_squares(lx, ly);
    FitReport fit;
    fit.exponent = fit.ci_low = fit.ci_high = lf.slope;
    fit.intercept = lf.intercept;
    fit.residual_norm = lf.residual_norm;
    fit.window = {x.front(), x.back()};
    fit.points = x.size();
    r.checks.push_back({"xi vs |delta| exponent", fit, -0.5, 0.1, x, y});
    return r;
}

const std::map<std::string, std::function<ClaimResult(std::uint64_t)>> &registry() {
    static const std::map<std::string, std::function<ClaimResult(std::uint64_t)>> m{
        {"motzkin-sqrt", motzkin_sqrt}, {"return-sqrt", return_sqrt}, {"postselection", postselection},
        {"levy", levy},                 {"trap", trap},               {"gates", gates},
        {"phase", phase},
    };
    return m;
}

} // namespace

const std::vector<std::string> &claim_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> v;
        for (const auto &[k, f] : registry()) {
            v.push_back(k);
        }
        return v;
    }();
    return names;
}

ClaimResult run_claim(const std::string &name, std::uint64_t seed) {
    const auto it = registry().find(name);
    require(it != registry().end(), ErrorCode::InvalidArgument, "unknown claim '" + name + "'");
    return it->second(seed);
}

} // namespace seqgen::cli
