#include <doctest.h>

#include "seqgen/errors.hpp"
#include "seqgen/rng.hpp"
#include "seqgen/stats.hpp"

#include <cmath>
#include <vector>

using namespace seqgen;

TEST_CASE("fit_exponent recovers exact power laws") {
    std::vector<double> x{1, 2, 4, 8, 16};
    std::vector<double> y = x;
    auto f = fit_exponent(x, y);
    CHECK(f.exponent == doctest::Approx(1.0).epsilon(1e-14));

    std::vector<double> xs;
    std::vector<double> ys;
    for (double v = 16; v <= 256; v *= 2) {
        xs.push_back(v);
        ys.push_back(std::sqrt(v));
    }
    f = fit_exponent(xs, ys);
    CHECK(std::abs(f.exponent - 0.5) < 1e-12);
    CHECK(f.ci_low <= f.exponent);
    CHECK(f.ci_high >= f.exponent);
    CHECK(f.window.lo == 16);
    CHECK(f.window.hi == 256);
}

TEST_CASE("fit_exponent window and failure modes") {
    std::vector<double> x{1, 2, 3, 4, 5, 6};
    std::vector<double> y{1, 4, 9, 16, 25, 36};
    auto f = fit_exponent(x, y, FitWindow{2, 5});
    CHECK(f.points == 4);
    CHECK(f.exponent == doctest::Approx(2.0));
    CHECK_THROWS_AS(fit_exponent(x, y, FitWindow{2, 4}), Error);
    std::vector<double> bad{1, 4, -9, 16, 25, 36};
    CHECK_THROWS_AS(fit_exponent(x, bad), Error);
}

TEST_CASE("bootstrap interval brackets a noisy slope") {
    Rng rng(7);
    std::normal_distribution<double> noise(0.0, 0.05);
    std::vector<double> x;
    std::vector<double> y;
    for (double v = 10; v < 1e4; v *= 1.5) {
        x.push_back(v);
        y.push_back(std::pow(v, 0.75) * std::exp(noise(rng)));
    }
    const auto f = fit_exponent(x, y);
    CHECK(f.ci_low < f.ci_high);
    CHECK(f.ci_low < 0.75);
    CHECK(f.ci_high > 0.75);
}

TEST_CASE("wilson interval") {
    // Hand-evaluated score interval for 50 / 100 at z = 1.96.
    const auto w = wilson_interval(50, 100);
    CHECK(w.lo == doctest::Approx(0.40383).epsilon(1e-4));
    CHECK(w.hi == doctest::Approx(0.59617).epsilon(1e-4));
    const auto z = wilson_interval(0, 1000);
    CHECK(z.lo == 0.0);
    CHECK(z.hi > 0.0);
}

TEST_CASE("entropy and grids") {
    std::vector<double> p{1, 1, 1, 1};
    CHECK(shannon_entropy(p) == doctest::Approx(std::log(4.0)));
    auto g = log_grid(16, 256, 5);
    CHECK(g == std::vector<std::size_t>{16, 32, 64, 128, 256});
}

TEST_CASE("seed derivation") {
    CHECK(derive_seed(1, "a", 0) == derive_seed(1, "a", 0));
    CHECK(derive_seed(1, "a", 0) != derive_seed(1, "a", 1));
    CHECK(derive_seed(1, "a", 0) != derive_seed(1, "b", 0));
    CHECK(derive_seed(1, "a", 0) != derive_seed(2, "a", 0));
}
