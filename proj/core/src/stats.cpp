#include "seqgen/stats.hpp"

#include "seqgen/errors.hpp"
#include "seqgen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace seqgen {

LinearFit least_squares(std::span<const double> x, std::span<const double> y) {
    require(x.size() == y.size(), ErrorCode::DimensionMismatch, "least_squares: x and y sizes differ");
    require(x.size() >= 2, ErrorCode::InsufficientData, "least_squares: need at least two points");
    const auto n = static_cast<double>(x.size());
    double mx = 0.0;
    double my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0.0;
    double sxy = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    require(sxx > 0.0, ErrorCode::InsufficientData, "least_squares: x values are all equal");
    LinearFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double r = y[i] - (fit.intercept + fit.slope * x[i]);
        rss += r * r;
    }
    fit.residual_norm = std::sqrt(rss);
    return fit;
}

std::string FitReport::describe() const {
    std::ostringstream os;
    os.precision(4);
    os << "exponent " << exponent << " [" << ci_low << ", " << ci_high << "], intercept " << intercept
       << ", residual " << residual_norm << ", window [" << window.lo << ", " << window.hi << "], " << points
       << " points";
    return os.str();
}

std::pair<double, double> percentile_interval(std::vector<double> samples, double confidence) {
    require(!samples.empty(), ErrorCode::InsufficientData, "percentile_interval: no samples");
    std::sort(samples.begin(), samples.end());
    const double tail = 0.5 * (1.0 - confidence);
    const auto at = [&](double q) {
        const double pos = q * static_cast<double>(samples.size() - 1);
        const auto i = static_cast<std::size_t>(std::floor(pos));
        const std::size_t j = std::min(i + 1, samples.size() - 1);
        const double frac = pos - static_cast<double>(i);
        return samples[i] * (1.0 - frac) + samples[j] * frac;
    };
    return {at(tail), at(1.0 - tail)};
}

FitReport fit_exponent(std::span<const double> x, std::span<const double> y, std::optional<FitWindow> window,
                       const FitOptions &options) {
    require(x.size() == y.size(), ErrorCode::DimensionMismatch, "fit_exponent: x and y sizes differ");
    std::vector<double> lx;
    std::vector<double> ly;
    double lo = window ? window->lo : -HUGE_VAL;
    double hi = window ? window->hi : HUGE_VAL;
    double used_lo = HUGE_VAL;
    double used_hi = -HUGE_VAL;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (x[i] < lo || x[i] > hi) {
            continue;
        }
        require(x[i] > 0.0 && y[i] > 0.0, ErrorCode::InsufficientData,
                "fit_exponent: values must be positive for a log-log fit");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
        used_lo = std::min(used_lo, x[i]);
        used_hi = std::max(used_hi, x[i]);
    }
    require(lx.size() >= 4, ErrorCode::InsufficientData, "fit_exponent: need at least 4 points in the window");

    const LinearFit base = least_squares(lx, ly);
    FitReport report;
    report.exponent = base.slope;
    report.intercept = base.intercept;
    report.residual_norm = base.residual_norm;
    report.window = {used_lo, used_hi};
    report.points = lx.size();

    Rng rng(options.seed);
    std::uniform_int_distribution<std::size_t> pick(0, lx.size() - 1);
    std::vector<double> slopes;
    slopes.reserve(options.bootstrap_resamples);
    std::vector<double> bx(lx.size());
    std::vector<double> by(lx.size());
    for (std::size_t r = 0; r < options.bootstrap_resamples; ++r) {
        bool distinct = false;
        for (std::size_t i = 0; i < lx.size(); ++i) {
            const std::size_t k = pick(rng);
            bx[i] = lx[k];
            by[i] = ly[k];
            distinct = distinct || bx[i] != bx[0];
        }
        if (distinct) {
            slopes.push_back(least_squares(bx, by).slope);
        }
    }
    if (slopes.empty()) {
        report.ci_low = report.ci_high = report.exponent;
    } else {
        const auto [l, h] = percentile_interval(std::move(slopes), options.confidence);
        report.ci_low = std::min(l, report.exponent);
        report.ci_high = std::max(h, report.exponent);
    }
    return report;
}

Interval wilson_interval(std::size_t successes, std::size_t trials, double z) {
    require(trials > 0, ErrorCode::InsufficientData, "wilson_interval: zero trials");
    const double n = static_cast<double>(trials);
    const double p = static_cast<double>(successes) / n;
    const double z2 = z * z;
    const double denom = 1.0 + z2 / n;
    const double centre = (p + z2 / (2.0 * n)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / n + z2 / (4.0 * n * n)) / denom;
    // The bounds are exactly 0 and 1 at the extremes; roundoff would leave crumbs.
    const double lo = successes == 0 ? 0.0 : std::max(0.0, centre - half);
    const double hi = successes == trials ? 1.0 : std::min(1.0, centre + half);
    return {lo, hi};
}

double shannon_entropy(std::span<const double> weights) {
    double total = 0.0;
    for (const double w : weights) {
        require(w >= 0.0, ErrorCode::InvalidArgument, "shannon_entropy: negative weight");
        total += w;
    }
    require(total > 0.0, ErrorCode::InvalidArgument, "shannon_entropy: zero total weight");
    double h = 0.0;
    for (const double w : weights) {
        if (w > 0.0) {
            const double p = w / total;
            h -= p * std::log(p);
        }
    }
    return h;
}

std::vector<std::size_t> log_grid(std::size_t lo, std::size_t hi, std::size_t count) {
    require(lo >= 1 && hi >= lo && count >= 1, ErrorCode::InvalidArgument, "log_grid: bad range");
    std::vector<std::size_t> grid;
    const double a = std::log(static_cast<double>(lo));
    const double b = std::log(static_cast<double>(hi));
    for (std::size_t i = 0; i < count; ++i) {
        const double f = count == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        grid.push_back(static_cast<std::size_t>(std::llround(std::exp(a + f * (b - a)))));
    }
    grid.front() = lo;
    grid.back() = hi;
    std::sort(grid.begin(), grid.end());
    grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
    return grid;
}

} // namespace seqgen
