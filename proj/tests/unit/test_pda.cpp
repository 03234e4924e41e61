#include <doctest.h>

#include "seqgen/channel.hpp"
#include "seqgen/errors.hpp"
#include "seqgen/grammar.hpp"
#include "seqgen/motzkin.hpp"
#include "seqgen/pda.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <optional>
#include <set>

using namespace seqgen;
using namespace seqgen::qpda;

namespace {

CnfGrammar grammar(const std::string &name) {
    return load_grammar(std::string(SEQGEN_DATA_DIR) + "/grammars/" + name);
}

// Every word of length n over k symbols.
void for_each_word(std::size_t n, std::size_t k, const std::function<void(const std::vector<int> &)> &f) {
    std::vector<int> w(n, 0);
    while (true) {
        f(w);
        std::size_t i = 0;
        while (i < n && ++w[i] == static_cast<int>(k)) {
            w[i] = 0;
            ++i;
        }
        if (i == n) {
            return;
        }
    }
}

std::size_t count_of(const std::vector<int> &w, int sym) {
    return static_cast<std::size_t>(std::count(w.begin(), w.end(), sym));
}

} // namespace

TEST_CASE("compile_to_pda: single rule") {
    const auto pda = compile_to_pda(grammar("single.cnf"));
    CHECK(acceptance_weight(pda, {0}) == doctest::Approx(1.0));
    CHECK(acceptance_weight(pda, {0, 0}) == 0.0);
    const auto run = sample_emission(pda, 1, 3);
    CHECK(run.emitted == std::vector<int>{0});
    CHECK(run.accepted);
    CHECK(run.final_stack.empty());
    const auto st = exact_superposition(pda, 1);
    CHECK(std::abs(st.amplitude(Word{0}) - 1.0) < 1e-14);
}

TEST_CASE("PDA acceptance weight equals CYK weight on bundled grammars") {
    for (const auto *name : {"motzkin1.cnf", "balanced01.cnf", "cat3.cnf", "single.cnf"}) {
        CAPTURE(name);
        const auto g = grammar(name);
        const auto pda = compile_to_pda(g);
        const std::size_t max_n = g.terminals().size() == 3 ? 7 : 8;
        for (std::size_t n = 1; n <= max_n; ++n) {
            for_each_word(n, g.terminals().size(), [&](const std::vector<int> &w) {
                CHECK(std::abs(acceptance_weight(pda, w) - recognize(g, w)) < 1e-10);
            });
        }
    }
}

TEST_CASE("balanced-01 PDA accepts exactly the balanced strings") {
    const auto g = grammar("balanced01.cnf");
    const auto pda = compile_to_pda(g);
    const int zero = g.terminal_index("0");
    const int one = g.terminal_index("1");
    for (std::size_t n = 1; n <= 8; ++n) {
        for_each_word(n, 2, [&](const std::vector<int> &w) {
            const bool balanced = count_of(w, zero) == count_of(w, one);
            CHECK((acceptance_weight(pda, w) > 0.0) == balanced);
        });
    }
}

TEST_CASE("cat-like qutrit PDA accepts equal 0/1 or equal 0/2 counts") {
    const auto g = grammar("cat3.cnf");
    const auto pda = compile_to_pda(g);
    const int zero = g.terminal_index("0");
    const int one = g.terminal_index("1");
    const int two = g.terminal_index("2");
    for (std::size_t n = 1; n <= 6; ++n) {
        for_each_word(n, 3, [&](const std::vector<int> &w) {
            const bool member = count_of(w, zero) == count_of(w, one) || count_of(w, zero) == count_of(w, two);
            CHECK((acceptance_weight(pda, w) > 0.0) == member);
        });
    }
}

TEST_CASE("sample_emission is deterministic per seed") {
    const auto pda = compile_to_pda(grammar("balanced01.cnf"));
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto a = sample_emission(pda, 8, seed);
        const auto b = sample_emission(pda, 8, seed);
        CHECK(a.emitted == b.emitted);
        CHECK(a.final_stack == b.final_stack);
        CHECK(a.weight == b.weight);
        CHECK(a.steps == b.steps);
        CHECK(a.accepted == b.accepted);
    }
}

TEST_CASE("Motzkin PDA runs never dip below the wall") {
    const auto pda = motzkin_pda(motzkin::MotzkinEnsemble::unbiased(32, 2, 0.125));
    for (std::uint64_t seed = 0; seed < 500; ++seed) {
        const auto run = sample_emission(pda, 32, seed);
        long h = 0;
        for (std::size_t i = 0; i < run.emitted.size(); ++i) {
            const int step = motzkin::step_of_symbol(static_cast<std::uint8_t>(run.emitted[i]));
            h += step > 0 ? 1 : (step < 0 ? -1 : 0);
            CHECK(h >= 0);
            CHECK(static_cast<std::size_t>(h) == run.heights[i]);
        }
        CHECK(run.weight > 0.0);
        CHECK(run.accepted == (run.emitted.size() == 32 && h == 0));
    }
}

TEST_CASE("push-pop schedule builds a tent profile") {
    const std::size_t n = 16;
    const auto pda = motzkin_pda(motzkin::MotzkinEnsemble::unbiased(n, 1, 0.25));
    std::size_t accepted = 0;
    std::vector<double> profile(n, 0.0);
    const std::size_t runs = 100000;
    for (std::size_t t = 0; t < runs; ++t) {
        const auto run = sample_emission(pda, n, t, BiasSchedule::PushPop);
        accepted += run.accepted ? 1 : 0;
        for (std::size_t i = 0; i < run.heights.size(); ++i) {
            profile[i] += static_cast<double>(run.heights[i]);
        }
    }
    CHECK(static_cast<double>(accepted) / runs > 0.999);
    const auto peak = std::max_element(profile.begin(), profile.end()) - profile.begin();
    CHECK(peak == static_cast<long>(n / 2 - 1));
    CHECK(profile[n / 2 - 1] / runs == doctest::Approx(8.0));
}

TEST_CASE("modulated rows stay stochastic") {
    const auto pda = motzkin_pda(motzkin::MotzkinEnsemble::unbiased(16, 2, 0.1));
    for (const auto &row : pda.table) {
        for (std::size_t e = 0; e < 16; ++e) {
            double sum = 0.0;
            for (const auto &a : modulated_row(row, BiasSchedule::PushPop, e, 16)) {
                sum += a.weight;
            }
            CHECK(std::abs(sum - 1.0) < 1e-12);
        }
    }
}

TEST_CASE("exact_superposition supports") {
    const auto mpda = motzkin_pda(motzkin::MotzkinEnsemble::unbiased(3, 1, 0.25));
    const auto m = exact_superposition(mpda, 3);
    std::set<std::string> got;
    for (const auto &[w, a] : m.amplitudes()) {
        got.insert(m.render(w));
    }
    CHECK(got == std::set<std::string>{"fff", "udf", "ufd", "fud"});

    const auto g = grammar("balanced01.cnf");
    const auto b = exact_superposition(compile_to_pda(g), 4);
    std::set<std::string> bal;
    for (const auto &[w, a] : b.amplitudes()) {
        bal.insert(b.render(w));
    }
    CHECK(bal == std::set<std::string>{"0011", "0101", "0110", "1001", "1010", "1100"});
    CHECK(std::abs(b.norm_squared() - 1.0) < 1e-12);
}

TEST_CASE("grammar superposition amplitudes follow the square-root CYK") {
    for (const auto *name : {"motzkin1.cnf", "balanced01.cnf", "cat3.cnf"}) {
        const auto g = grammar(name);
        const auto st = exact_superposition(compile_to_pda(g), 6);
        double norm = 0.0;
        for_each_word(6, g.terminals().size(), [&](const std::vector<int> &w) {
            const double a = coherent_amplitude(g, w);
            norm += a * a;
        });
        for (const auto &[w, a] : st.amplitudes()) {
            std::vector<int> word(w.begin(), w.end());
            CHECK(std::abs(a.real() - coherent_amplitude(g, word) / std::sqrt(norm)) < 1e-10);
        }
    }
}

TEST_CASE("exact_superposition equals the folded channel output") {
    std::vector<WeightedPda> pdas;
    for (const auto *name : {"motzkin1.cnf", "balanced01.cnf", "cat3.cnf", "single.cnf"}) {
        pdas.push_back(compile_to_pda(grammar(name)));
    }
    pdas.push_back(motzkin_pda(motzkin::MotzkinEnsemble::unbiased(8, 2, 0.1)));
    for (const auto &pda : pdas) {
        for (std::size_t n = 1; n <= 8; ++n) {
            const auto tr = transfer_family(pda, n);
            std::optional<RadiatedState> a;
            try {
                a = exact_superposition(pda, n);
            } catch (const Error &e) {
                CHECK(e.code() == ErrorCode::EmptySupport);
            }
            if (!a) {
                // Odd lengths of the balanced language, for instance.
                CHECK_THROWS_AS(sequential_generate(tr.family, tr.initial, n, tr.empty), Error);
                continue;
            }
            const auto b = sequential_generate(tr.family, tr.initial, n, tr.empty);
            CHECK(fidelity(*a, b) > 1 - 1e-10);
            CHECK(a->support_size() == b.support_size());
        }
    }
}

TEST_CASE("postselection rate regimes") {
    using motzkin::MotzkinEnsemble;
    const std::vector<std::size_t> ns{16, 32, 64, 128};
    const auto crit = postselection_rate(motzkin_pda(MotzkinEnsemble::unbiased(16, 1, 0.25)), ns, 10000, 1);
    REQUIRE(crit.has_power_fit);
    CHECK(crit.power.exponent == doctest::Approx(-0.5).epsilon(0.3));
    CHECK(crit.regime == DecayRegime::Polynomial);
    for (const auto &p : crit.points) {
        CHECK(p.ci.lo <= p.rate);
        CHECK(p.ci.hi >= p.rate);
    }

    const auto pinned = postselection_rate(
        motzkin_pda(MotzkinEnsemble::from_walk(16, walk::TransitionSpec::make(0.4, 0.2))), ns, 10000, 2);
    CHECK(pinned.regime == DecayRegime::Constant);
    const double p0 = walk::steady_state(walk::TransitionSpec::make(0.4, 0.2)).probabilities[0];
    CHECK(pinned.points.back().ci.lo < p0 + 0.01);
    CHECK(pinned.points.back().ci.hi > p0 - 0.01);

    const auto esc = postselection_rate(
        motzkin_pda(MotzkinEnsemble::from_walk(16, walk::TransitionSpec::make(0.2, 0.4))), ns, 10000, 3);
    CHECK(esc.regime == DecayRegime::Exponential);

    try {
        postselection_rate(motzkin_pda(MotzkinEnsemble::unbiased(16, 1, 0.25)), ns, 100, 1);
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::InsufficientEnsemble);
    }
}
