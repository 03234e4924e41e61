#include <doctest.h>

#include "seqgen/channel.hpp"
#include "seqgen/errors.hpp"
#include "seqgen/motzkin.hpp"
#include "seqgen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>

using namespace seqgen;
using namespace seqgen::motzkin;

namespace {

// Brute force over every string in {0, +-1..+-s}^N with an explicit color stack.
std::size_t brute_count(std::size_t n, int s) {
    std::size_t count = 0;
    std::vector<int> steps;
    for (int c = -s; c <= s; ++c) {
        steps.push_back(c);
    }
    std::vector<int> stack;
    std::function<void(std::size_t)> go = [&](std::size_t depth) {
        if (stack.size() > n - depth) {
            return;
        }
        if (depth == n) {
            count += stack.empty() ? 1 : 0;
            return;
        }
        for (const int st : steps) {
            if (st > 0) {
                stack.push_back(st);
                go(depth + 1);
                stack.pop_back();
            } else if (st < 0) {
                if (!stack.empty() && stack.back() == -st) {
                    stack.pop_back();
                    go(depth + 1);
                    stack.push_back(-st);
                }
            } else {
                go(depth + 1);
            }
        }
    };
    go(0);
    return count;
}

// Spectra compared entry by entry; the shorter one is padded with zeros so
// numerically null singular values do not matter.
double spectrum_gap(std::vector<double> a, std::vector<double> b) {
    std::sort(a.begin(), a.end(), std::greater<>());
    std::sort(b.begin(), b.end(), std::greater<>());
    a.resize(std::max(a.size(), b.size()), 0.0);
    b.resize(a.size(), 0.0);
    double gap = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        gap = std::max(gap, std::abs(a[i] - b[i]));
    }
    return gap;
}

std::vector<MotzkinEnsemble> random_ensembles(std::size_t n, int s, std::uint64_t seed, int count) {
    Rng rng(seed);
    std::vector<MotzkinEnsemble> out;
    for (int i = 0; i < count; ++i) {
        const double a = uniform_open(rng);
        const double b = uniform_open(rng);
        const double c = uniform_open(rng);
        const double sum = s * a + b + c;
        const double pb = uniform_open(rng);
        out.push_back(MotzkinEnsemble::make(n, s, a / sum, b / sum, c / sum, pb / s, 1 - pb));
    }
    return out;
}

} // namespace

TEST_CASE("enumerate_walks: small cases") {
    auto two = enumerate_walks(2, 1);
    std::set<std::string> s2;
    for (const auto &p : two) {
        s2.insert(render(p, 1));
    }
    CHECK(s2 == std::set<std::string>{"ff", "ud"});
    CHECK(enumerate_walks(4, 1).size() == 9);
    std::set<std::string> c2;
    for (const auto &p : enumerate_walks(2, 2)) {
        c2.insert(render(p, 2));
    }
    CHECK(c2 == std::set<std::string>{"ff", "u1d1", "u2d2"});
    try {
        enumerate_walks(15, 1);
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::SizeLimit);
    }
}

TEST_CASE("walk_count agrees with brute force and enumeration") {
    CHECK(walk_count(0, 1) == 1);
    CHECK(walk_count(3, 1) == 4);
    CHECK(walk_count(4, 2) == brute_count(4, 2));
    for (std::size_t n = 0; n <= 10; ++n) {
        for (const int s : {1, 2}) {
            CHECK(walk_count(n, s) == brute_count(n, s));
        }
    }
    for (std::size_t n = 0; n <= 12; ++n) {
        CHECK(walk_count(n, 1) == enumerate_walks(n, 1).size());
    }
}

TEST_CASE("walk_count obeys the Motzkin recurrence") {
    std::vector<BigCount> m;
    for (std::size_t n = 0; n <= 14; ++n) {
        m.push_back(walk_count(n, 1));
    }
    for (std::size_t n = 1; n <= 14; ++n) {
        BigCount r = m[n - 1];
        for (std::size_t k = 0; k + 2 <= n; ++k) {
            r += m[k] * m[n - 2 - k];
        }
        CHECK(m[n] == r);
    }
    CHECK(walk_count(14, 1) == enumerate_walks(14, 1).size());
    CHECK(walk_count(60, 2) > BigCount(1) << 64);
}

TEST_CASE("ensemble normalization") {
    CHECK_NOTHROW(MotzkinEnsemble::make(4, 2, 0.1, 0.2, 0.6, 0.15, 0.7));
    try {
        MotzkinEnsemble::make(4, 2, 0.2, 0.2, 0.6, 0.15, 0.7);
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::WeightNormalization);
    }
    const auto u = MotzkinEnsemble::unbiased(10, 2, 0.1);
    CHECK(2 * u.w_plus == doctest::Approx(u.w_minus));
    CHECK(u.delta() == doctest::Approx(0.0));
}

TEST_CASE("amplitude: illegal strings and the two-string state") {
    const auto u = MotzkinEnsemble::uniform(2, 1);
    CHECK(amplitude(u, Path{-1, 1}) == 0.0);
    CHECK(amplitude(u, Path{1, -1}) == doctest::Approx(M_SQRT1_2));
    CHECK(amplitude(u, Path{0, 0}) == doctest::Approx(M_SQRT1_2));
    CHECK(amplitude(MotzkinEnsemble::unbiased(3, 2, 0.1), Path{1, 0, -2}) == 0.0);
}

TEST_CASE("amplitudes are normalized") {
    for (const int s : {1, 2}) {
        for (const auto &e : random_ensembles(s == 1 ? 12 : 10, s, 5 + s, 3)) {
            double total = 0.0;
            for (const auto &p : enumerate_walks(e.length, s)) {
                total += amplitude(e, p) * amplitude(e, p);
            }
            CHECK(std::abs(total - 1.0) < 1e-10);
        }
    }
}

TEST_CASE("amplitudes equal the truncated-channel output") {
    for (const int s : {1, 2}) {
        for (const auto &e0 : random_ensembles(8, s, 77 + s, 3)) {
            for (std::size_t n = 2; n <= 8; n += 3) {
                const auto e = e0.with_length(n);
                const auto st = sequential_generate(motzkin_channel(e, n / 2 + 1), kEmptyStack, n, kEmptyStack);
                const auto walks = enumerate_walks(n, s);
                CHECK(st.support_size() == walks.size());
                for (const auto &p : walks) {
                    Word w;
                    for (const Step x : p) {
                        w.push_back(symbol_index(x));
                    }
                    CHECK(std::abs(st.amplitude(w).real() - amplitude(e, p)) < 1e-10);
                }
            }
        }
    }
}

TEST_CASE("schmidt_spectrum: two-string state and product cut") {
    const auto sp = schmidt_spectrum(MotzkinEnsemble::uniform(2, 1), 1);
    REQUIRE(sp.entries.size() == 2);
    CHECK(sp.entries[0].height == 0);
    CHECK(sp.entries[0].lambda == doctest::Approx(0.5));
    CHECK(sp.entries[1].height == 1);
    CHECK(sp.entries[1].lambda == doctest::Approx(0.5));
    CHECK(sp.entropy() == doctest::Approx(std::log(2.0)));

    // No boundary push: only the flat string survives.
    const auto flat = MotzkinEnsemble::make(6, 1, 0.25, 0.25, 0.5, 0.0, 1.0);
    const auto one = schmidt_spectrum(flat, 3);
    REQUIRE(one.entries.size() == 1);
    CHECK(one.entries[0].lambda == doctest::Approx(1.0));
    CHECK(one.entropy() == doctest::Approx(0.0));
}

TEST_CASE("schmidt_spectrum DP equals the explicit decomposition") {
    for (const int s : {1, 2}) {
        auto ensembles = random_ensembles(s == 1 ? 12 : 10, s, 300 + s, 5);
        ensembles.push_back(MotzkinEnsemble::unbiased(ensembles[0].length, s, 0.1));
        for (const auto &e : ensembles) {
            const auto st = exact_state(e);
            const HeightDp dp(e);
            for (std::size_t cut = 1; cut < e.length; ++cut) {
                const auto sp = dp.spectrum(cut);
                CHECK(std::abs(sp.total_weight() - 1.0) < 1e-10);
                CHECK(spectrum_gap(sp.expanded(), st.schmidt_spectrum(cut)) < 1e-10);
            }
        }
    }
}

TEST_CASE("spin-2 spectrum at N = 12, cut 6") {
    const auto e = MotzkinEnsemble::unbiased(12, 2, 0.1);
    const auto a = schmidt_spectrum(e, 6).expanded();
    CHECK(a.size() == 127); // color sequences of height <= 6
    CHECK(spectrum_gap(a, exact_state(e).schmidt_spectrum(6)) < 1e-10);
}

TEST_CASE("left and right blocks share the spectrum") {
    const auto e = random_ensembles(10, 2, 9, 1)[0];
    const auto st = exact_state(e);
    std::map<Word, cplx> rev;
    for (const auto &[w, a] : st.amplitudes()) {
        rev[Word(w.rbegin(), w.rend())] = a;
    }
    const RadiatedState mirrored(st.length(), st.alphabet(), rev, 1.0);
    const HeightDp dp(e);
    for (std::size_t cut = 1; cut < 10; ++cut) {
        CHECK(std::abs(dp.spectrum(cut).entropy() - mirrored.entanglement_entropy(10 - cut)) < 1e-10);
    }
}

TEST_CASE("relabeling emitted symbols leaves the spectrum unchanged") {
    const auto e = random_ensembles(9, 2, 21, 1)[0];
    const auto st = exact_state(e);
    // Swap the two colors and exchange up with down labels.
    const std::vector<std::uint8_t> perm{0, 4, 3, 2, 1};
    std::map<Word, cplx> relabeled;
    for (const auto &[w, a] : st.amplitudes()) {
        Word v;
        for (const auto x : w) {
            v.push_back(perm[x]);
        }
        relabeled[v] = a;
    }
    const RadiatedState other(st.length(), st.alphabet(), relabeled, 1.0);
    for (std::size_t cut = 1; cut < 9; ++cut) {
        CHECK(spectrum_gap(st.schmidt_spectrum(cut), other.schmidt_spectrum(cut)) < 1e-12);
    }
}

TEST_CASE("cut range checks") {
    const HeightDp dp(MotzkinEnsemble::unbiased(8, 1, 0.25));
    for (const std::size_t cut : {0u, 8u}) {
        try {
            (void)dp.spectrum(cut);
            FAIL("expected an error");
        } catch (const Error &e) {
            CHECK(e.code() == ErrorCode::CutOutOfRange);
        }
    }
}

TEST_CASE("large-N DP stays normalized") {
    const HeightDp dp(MotzkinEnsemble::unbiased(2048, 2, 0.125));
    for (const std::size_t cut : {16u, 256u, 1024u}) {
        const auto sp = dp.spectrum(cut);
        CHECK(std::abs(sp.total_weight() - 1.0) < 1e-10);
        double mass = 0.0;
        for (const double p : dp.height_distribution(cut)) {
            mass += p;
        }
        CHECK(std::abs(mass - 1.0) < 1e-10);
    }
}

TEST_CASE("entropy_scaling: spin-1 prefers the log law") {
    const auto r = entropy_scaling(MotzkinEnsemble::unbiased(2048, 1, 0.25), {16, 32, 64, 128, 256});
    CHECK(r.preferred == EntropyForm::Logarithmic);
    CHECK(r.log_residual < r.power_residual);
    CHECK(r.logarithmic.slope > 0.0);
}

TEST_CASE("entropy_scaling: spin-2 grows as a power law") {
    const auto r = entropy_scaling(MotzkinEnsemble::unbiased(2048, 2, 0.125), {16, 32, 64, 128, 256});
    CHECK(r.preferred == EntropyForm::PowerLaw);
    CHECK(r.power.exponent > 0.2);
    CHECK(r.power.exponent < 0.6);
}

TEST_CASE("entropy_scaling: pinned ensembles saturate") {
    const auto spec = walk::TransitionSpec::make(0.4, 0.2);
    const auto r = entropy_scaling(MotzkinEnsemble::from_walk(2048, spec, 2), {16, 32, 64, 128, 256});
    CHECK(r.preferred == EntropyForm::Saturating);
    // Plateau at <m> log 2 + H(m) of the geometric height law, ratio 1/2.
    CHECK(r.entropies.back() == doctest::Approx(3 * std::log(2.0)).epsilon(1e-5));
}

TEST_CASE("entropy_scaling input checks") {
    const auto e = MotzkinEnsemble::unbiased(512, 2, 0.125);
    CHECK_THROWS_AS(entropy_scaling(e, {16, 32, 64}), Error);
    CHECK_THROWS_AS(entropy_scaling(e, {16, 32, 64, 256}), Error);
}

TEST_CASE("motzkin channel is trace preserving") {
    for (const int s : {1, 2}) {
        const auto fam = motzkin_channel(MotzkinEnsemble::unbiased(8, s, 0.1), 5);
        CHECK(fam.completeness_residual() < 1e-12);
        CHECK(fam.alphabet() == alphabet(s));
    }
}

TEST_CASE("the uniform ensemble has no channel") {
    try {
        motzkin_channel(MotzkinEnsemble::uniform(4, 1), 3);
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::WeightNormalization);
    }
}
