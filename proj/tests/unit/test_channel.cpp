#include <doctest.h>

#include "seqgen/channel.hpp"
#include "seqgen/errors.hpp"
#include "seqgen/motzkin.hpp"
#include "seqgen/rng.hpp"
#include "seqgen/stats.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

using namespace seqgen;

namespace {

// Dense Schmidt oracle: full amplitude matrix and its singular values.
std::vector<double> dense_schmidt(const RadiatedState &st, std::size_t cut) {
    const auto d = static_cast<Eigen::Index>(st.alphabet().size());
    Eigen::Index rows = 1;
    Eigen::Index cols = 1;
    for (std::size_t i = 0; i < cut; ++i) {
        rows *= d;
    }
    for (std::size_t i = cut; i < st.length(); ++i) {
        cols *= d;
    }
    Matrix m = Matrix::Zero(rows, cols);
    for (const auto &[w, a] : st.amplitudes()) {
        Eigen::Index r = 0;
        Eigen::Index c = 0;
        for (std::size_t i = 0; i < cut; ++i) {
            r = r * d + w[i];
        }
        for (std::size_t i = cut; i < w.size(); ++i) {
            c = c * d + w[i];
        }
        m(r, c) = a;
    }
    Eigen::JacobiSVD<Matrix> svd(m);
    std::vector<double> p;
    for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
        const double s = svd.singularValues()(i);
        if (s * s > 1e-300) {
            p.push_back(s * s);
        }
    }
    return p;
}

double renyi2(const std::vector<double> &p) {
    double s = 0.0;
    double t = 0.0;
    for (const double v : p) {
        s += v * v;
        t += v;
    }
    return -std::log(s / (t * t));
}

Matrix random_density(std::size_t dim, Rng &rng) {
    std::normal_distribution<double> g;
    Matrix a(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        for (Eigen::Index j = 0; j < a.cols(); ++j) {
            a(i, j) = cplx(g(rng), g(rng));
        }
    }
    Matrix r = a * a.adjoint();
    return r / r.trace();
}

KrausChannel spin1_walk_channel(std::size_t n_max, double gl, double gr, double g0) {
    const auto e = motzkin::MotzkinEnsemble::from_walk(4, walk::TransitionSpec::make(gl, gr, g0));
    return KrausChannel(motzkin::motzkin_channel(e, n_max));
}

} // namespace

TEST_CASE("apply_channel: identity, full damping, walk channel") {
    Rng rng(1);
    const DensityOperator rho{random_density(3, rng)};
    const auto out = apply_channel(rho, channels::identity(3));
    CHECK((out.matrix - rho.matrix).norm() < 1e-14);

    const DensityOperator q{random_density(2, rng)};
    const auto damped = apply_channel(q, channels::amplitude_damping(1.0));
    CHECK(std::abs(damped.matrix(0, 0) - 1.0) < 1e-14);
    CHECK(damped.matrix.norm() == doctest::Approx(1.0));

    const auto ch = spin1_walk_channel(6, 0.25, 0.25, 0.3);
    const auto one = apply_channel(DensityOperator::basis(7, 0), ch);
    CHECK(std::abs(one.matrix(0, 0) - 0.7) < 1e-14);
    CHECK(std::abs(one.matrix(1, 1) - 0.3) < 1e-14);
    CHECK(std::abs(one.trace() - 1.0) < 1e-12);
    // Two steps agree with the half-line walk.
    const auto two = apply_channel_n(DensityOperator::basis(7, 0), ch, 2);
    const auto d = walk::evolve(walk::HalfLineDist::point_mass(6), walk::TransitionSpec::make(0.25, 0.25, 0.3), 2, 1.0);
    for (int i = 0; i < 7; ++i) {
        CHECK(std::abs(two.matrix(i, i).real() - d.probabilities[static_cast<std::size_t>(i)]) < 1e-14);
    }
}

TEST_CASE("apply_channel rejects mismatched dimensions") {
    try {
        apply_channel(DensityOperator::basis(3, 0), channels::ghz());
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::DimensionMismatch);
    }
}

TEST_CASE("apply_dual: unital and adjoint") {
    Rng rng(2);
    const auto ch = channels::random(4, 3, 99);
    const auto id = apply_dual(DensityOperator::identity(4), ch);
    CHECK((id.matrix - Matrix::Identity(4, 4)).norm() < 1e-12);
    for (int i = 0; i < 5; ++i) {
        const DensityOperator rho{random_density(4, rng)};
        const DensityOperator o{random_density(4, rng) * 3.0};
        const cplx lhs = (apply_dual(o, ch).matrix * rho.matrix).trace();
        const cplx rhs = (o.matrix * apply_channel(rho, ch).matrix).trace();
        CHECK(std::abs(lhs - rhs) < 1e-10);
    }
}

TEST_CASE("apply_dual on the walk channel matches a dense transpose chain") {
    const auto ch = spin1_walk_channel(6, 0.3, 0.2, 0.2);
    Matrix o = Matrix::Zero(7, 7);
    o(0, 0) = 1.0;
    Matrix expect = o;
    for (int step = 0; step < 2; ++step) {
        Matrix next = Matrix::Zero(7, 7);
        for (std::size_t s = 0; s < ch.alphabet_size(); ++s) {
            const Matrix k = ch.dense(s);
            next += k.adjoint() * expect * k;
        }
        expect = next;
    }
    const auto got = apply_dual_n(DensityOperator{o}, ch, 2);
    CHECK((got.matrix - expect).norm() < 1e-14);
    // Classical chain: <0| (M^T)^2 |0> diagonal = P(at 0 after 2 steps | start i).
    CHECK(std::abs(got.matrix(0, 0).real() - (0.8 * 0.8 + 0.2 * 0.3)) < 1e-14);
    CHECK(std::abs(got.matrix(2, 2).real() - 0.3 * 0.3) < 1e-14);
}

TEST_CASE("sequential_generate: product channel") {
    const auto st = sequential_generate(channels::product(), 0, 5, 0);
    CHECK(st.support_size() == 1);
    CHECK(std::abs(st.amplitude(Word(5, 0)) - 1.0) < 1e-14);
    CHECK(st.success_probability() == doctest::Approx(1.0));
}

TEST_CASE("sequential_generate: spin-1 Motzkin support at N = 3") {
    const auto e = motzkin::MotzkinEnsemble::unbiased(3, 1, 0.25);
    const auto st = sequential_generate(motzkin::motzkin_channel(e, 6), motzkin::kEmptyStack, 3, motzkin::kEmptyStack);
    std::set<std::string> got;
    for (const auto &[w, a] : st.amplitudes()) {
        got.insert(st.render(w));
    }
    CHECK(got == std::set<std::string>{"fff", "udf", "ufd", "fud"});
    CHECK(got.size() == motzkin::enumerate_walks(3, 1).size());
    CHECK(std::abs(st.norm_squared() - 1.0) < 1e-12);
}

TEST_CASE("sequential_generate success probability equals the evolved projector weight") {
    for (const std::uint64_t seed : {1u, 2u, 3u}) {
        const auto ch = channels::random(3, 2, seed);
        for (std::size_t n = 1; n <= 7; ++n) {
            const auto st = sequential_generate(ch, 0, n, 2);
            const auto rho = apply_channel_n(DensityOperator::basis(3, 0), ch, n);
            CHECK(std::abs(st.success_probability() - rho.matrix(2, 2).real()) < 1e-10);
        }
    }
}

TEST_CASE("sequential_generate: empty support") {
    // Full damping from |0> never reaches |1>.
    try {
        sequential_generate(channels::amplitude_damping(1.0), 0, 3, 1);
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::EmptySupport);
    }
}

TEST_CASE("critical spin-1 success probability decays as N^-1/2") {
    const auto ch = spin1_walk_channel(40, 0.25, 0.25, 0.25);
    std::vector<double> ns;
    std::vector<double> ps;
    auto rho = DensityOperator::basis(41, 0);
    for (std::size_t n = 1; n <= 64; ++n) {
        rho = apply_channel(rho, ch);
        if (n >= 8 && (n & (n - 1)) == 0) {
            ns.push_back(static_cast<double>(n));
            ps.push_back(rho.matrix(0, 0).real());
        }
    }
    // 8, 16, 32, 64 plus the cross-check against enumeration at N = 8.
    const auto f = fit_exponent(ns, ps);
    CHECK(f.exponent == doctest::Approx(-0.5).epsilon(0.2));
    const auto st = sequential_generate(ch, 0, 8, 0);
    CHECK(st.success_probability() == doctest::Approx(ps[0]).epsilon(1e-10));
}

TEST_CASE("renyi_entropy_channel: product and GHZ") {
    CHECK(std::abs(renyi_entropy_channel(channels::identity(1), 0, 0, 6, 3, 2)) < 1e-12);
    const auto ghz = channels::ghz();
    const auto st = sequential_generate(ghz, 0, 6, 0);
    CHECK(st.support_size() == 2);
    const double direct = renyi2(dense_schmidt(st, 3));
    CHECK(direct == doctest::Approx(std::log(2.0)).epsilon(1e-12));
    CHECK(std::abs(renyi_entropy_channel(ghz, 0, 0, 6, 3, 2) - std::log(2.0)) < 1e-8);
}

TEST_CASE("renyi_entropy_channel equals the exact Schmidt value on random channels") {
    for (const std::size_t chi : {2u, 3u, 8u}) {
        const auto ch = channels::random(chi, 2, 1000 + chi);
        for (std::size_t n = 2; n <= 10; n += 4) {
            const auto st = sequential_generate(ch, 0, n, chi - 1);
            for (std::size_t cut = 1; cut < n; ++cut) {
                const double direct = renyi2(dense_schmidt(st, cut));
                CHECK(std::abs(renyi_entropy_channel(ch, 0, chi - 1, n, cut, 2) - direct) < 1e-8);
                CHECK(std::abs(st.renyi_entropy(cut, 2) - direct) < 1e-8);
            }
        }
    }
}

TEST_CASE("renyi_entropy_channel order 3 matches the state") {
    const auto ch = channels::random(3, 3, 5);
    const auto st = sequential_generate(ch, 1, 6, 0);
    for (std::size_t cut = 1; cut < 6; ++cut) {
        CHECK(std::abs(renyi_entropy_channel(ch, 1, 0, 6, cut, 3) - st.renyi_entropy(cut, 3)) < 1e-8);
    }
}

TEST_CASE("deep-cut entropy approaches the steady-state entropy") {
    const auto ch = channels::random(4, 3, 42);
    const auto sigma = steady_state_of_channel(ch);
    Eigen::SelfAdjointEigenSolver<Matrix> es(sigma.matrix);
    std::vector<double> spec;
    for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) {
        spec.push_back(std::max(0.0, es.eigenvalues()(i)));
    }
    const double expect = renyi_of_spectrum(spec, 2);
    CHECK(std::abs(renyi_entropy_channel(ch, 0, 1, 120, 60, 2) - expect) < 1e-6);
}

TEST_CASE("steady_state_of_channel") {
    const auto mixed = steady_state_of_channel(channels::depolarizing(1.0));
    CHECK((mixed.matrix - Matrix::Identity(2, 2) * 0.5).norm() < 1e-10);
    const auto ground = steady_state_of_channel(channels::amplitude_damping(0.3));
    CHECK(std::abs(ground.matrix(0, 0) - 1.0) < 1e-10);

    const auto ch = channels::random(4, 3, 17);
    const auto rho = steady_state_of_channel(ch);
    CHECK((apply_channel(rho, ch).matrix - rho.matrix).norm() < 1e-10);
    DensityOperator p = DensityOperator::basis(4, 0);
    for (int i = 0; i < 4000; ++i) {
        p = apply_channel(p, ch);
    }
    CHECK((p.matrix - rho.matrix).norm() < 1e-9);

    try {
        steady_state_of_channel(channels::identity(2));
        FAIL("expected an error");
    } catch (const Error &e) {
        CHECK(e.code() == ErrorCode::DegenerateSteadyState);
    }
}

TEST_CASE("completeness is enforced") {
    Matrix k = Matrix::Identity(2, 2) * 0.9;
    CHECK_THROWS_AS(KrausChannel({"a"}, std::vector<Matrix>{k}), Error);
    const auto c = compose(channels::random(3, 2, 1), channels::random(3, 3, 2));
    CHECK(c.alphabet_size() == 6);
    CHECK(c.completeness_residual() <= 1e-10);
    CHECK(c.alphabet()[1] == "0.1");
}

TEST_CASE("radiated states have an exact MPS of bond dimension chi") {
    for (const std::size_t chi : {2u, 3u}) {
        const auto ch = channels::random(chi, 2, 7 * chi);
        const auto st = sequential_generate(ch, 0, 9, 1);
        CHECK(st.mps_discarded_weight(chi) <= 1e-12);
        CHECK(st.mps_discarded_weight(1) > 1e-6);
    }
}

TEST_CASE("blockwise Schmidt spectrum equals the dense oracle") {
    const auto e = motzkin::MotzkinEnsemble::unbiased(8, 2, 0.1);
    const auto st = sequential_generate(motzkin::motzkin_channel(e, 8), 0, 8, 0);
    for (std::size_t cut = 1; cut < 8; ++cut) {
        auto a = st.schmidt_spectrum(cut);
        auto b = dense_schmidt(st, cut);
        std::sort(b.begin(), b.end(), std::greater<>());
        a.resize(std::max(a.size(), b.size()), 0.0);
        b.resize(a.size(), 0.0);
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(std::abs(a[i] - b[i]) < 1e-12);
        }
    }
}

TEST_CASE("density operator validation") {
    Matrix m(2, 2);
    m << 0.5, 0.3, 0.1, 0.5;
    CHECK_THROWS_AS(DensityOperator{m}.validate(), Error);
    m << 1.5, 0, 0, -0.5;
    CHECK_THROWS_AS(DensityOperator{m}.validate(), Error);
    DensityOperator::basis(3, 1).validate();
}

TEST_CASE("channel JSON round trip and bundled fixture") {
    const auto ch = channels::random(3, 2, 4);
    const auto back = channel_from_json(channel_to_json(ch, 0, 2));
    for (std::size_t s = 0; s < 2; ++s) {
        CHECK((back.dense(s) - ch.dense(s)).norm() < 1e-15);
    }
    const auto doc = load_channel_document(std::string(SEQGEN_DATA_DIR) + "/channels/ghz.json");
    CHECK(doc.family.emitter_dim() == 2);
    CHECK(doc.start == 0);
    CHECK(doc.final_state == 0);
    CHECK(doc.family.completeness_residual() < 1e-12);
    CHECK_THROWS_AS(channel_from_json("{\"format\":\"other\"}"), Error);
    CHECK_THROWS_AS(channel_from_json("{not json"), Error);
}
