#include "seqgen/halfline_walk.hpp"

#include "seqgen/errors.hpp"
#include "seqgen/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace seqgen::walk {

TransitionSpec TransitionSpec::make(double gamma_left, double gamma_right, std::optional<double> gamma_0) {
    TransitionSpec spec{gamma_left, gamma_right, gamma_0.value_or(gamma_right)};
    spec.validate();
    return spec;
}

void TransitionSpec::validate() const {
    require(gamma_left >= 0.0 && gamma_right >= 0.0 && gamma_boundary >= 0.0, ErrorCode::InvalidArgument,
            "transition rates must be nonnegative");
    require(gamma_left + gamma_right <= 1.0 + 1e-15, ErrorCode::InvalidArgument, "gamma_L + gamma_R exceeds 1");
    require(gamma_boundary <= 1.0 + 1e-15, ErrorCode::InvalidArgument, "gamma_0 exceeds 1");
}

double TransitionSpec::delta() const {
    require(gamma_left > 0.0, ErrorCode::UndefinedRatio, "delta undefined for gamma_L = 0");
    return gamma_right / gamma_left - 1.0;
}

const char *to_string(PhaseLabel phase) noexcept {
    switch (phase) {
    case PhaseLabel::Pinned:
        return "pinned";
    case PhaseLabel::Critical:
        return "critical";
    case PhaseLabel::Escaping:
        return "escaping";
    }
    return "unknown";
}

HalfLineDist HalfLineDist::point_mass(std::size_t n_max, std::size_t site) {
    require(site <= n_max, ErrorCode::InvalidArgument, "point_mass: site beyond truncation");
    HalfLineDist d;
    d.probabilities.assign(n_max + 1, 0.0);
    d.probabilities[site] = 1.0;
    return d;
}

double HalfLineDist::total() const {
    return std::accumulate(probabilities.begin(), probabilities.end(), 0.0);
}

double HalfLineDist::mean() const {
    double m = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        m += static_cast<double>(i) * probabilities[i];
    }
    return m;
}

double HalfLineDist::second_moment() const {
    double m = 0.0;
    for (std::size_t i = 0; i < probabilities.size(); ++i) {
        m += static_cast<double>(i) * static_cast<double>(i) * probabilities[i];
    }
    return m;
}

void HalfLineDist::validate() const {
    require(!probabilities.empty(), ErrorCode::InvalidArgument, "distribution has no sites");
    for (const double p : probabilities) {
        require(p >= 0.0, ErrorCode::InvalidArgument, "distribution has a negative entry");
    }
    require(std::abs(total() - 1.0) <= 1e-12, ErrorCode::InvalidArgument, "distribution does not sum to 1");
}

namespace {

void step_once(const std::vector<double> &in, std::vector<double> &out, const TransitionSpec &s) {
    const std::size_t n = in.size() - 1;
    std::fill(out.begin(), out.end(), 0.0);
    if (n == 0) {
        out[0] = in[0];
        return;
    }
    out[0] += (1.0 - s.gamma_boundary) * in[0];
    out[1] += s.gamma_boundary * in[0];
    const double stay = 1.0 - s.gamma_left - s.gamma_right;
    for (std::size_t i = 1; i < n; ++i) {
        const double p = in[i];
        out[i] += stay * p;
        out[i - 1] += s.gamma_left * p;
        out[i + 1] += s.gamma_right * p;
    }
    out[n] += (1.0 - s.gamma_left) * in[n];
    out[n - 1] += s.gamma_left * in[n];
}

void check_leak(const std::vector<double> &p, double tol) {
    if (p.back() > tol) {
        fail(ErrorCode::TruncationLeak, "mass " + std::to_string(p.back()) + " at truncation site " +
                                            std::to_string(p.size() - 1) + " exceeds tolerance");
    }
}

} // namespace

HalfLineDist evolve(const HalfLineDist &dist, const TransitionSpec &spec, std::size_t steps, double leak_tolerance) {
    spec.validate();
    dist.validate();
    std::vector<double> a = dist.probabilities;
    std::vector<double> b(a.size());
    for (std::size_t t = 0; t < steps; ++t) {
        step_once(a, b, spec);
        a.swap(b);
    }
    if (steps > 0) {
        check_leak(a, leak_tolerance);
    }
    return HalfLineDist{std::move(a)};
}

PhaseLabel classify_phase(const TransitionSpec &spec) {
    spec.validate();
    const double d = spec.delta();
    if (std::abs(d) < kCriticalTolerance) {
        return PhaseLabel::Critical;
    }
    return d < 0.0 ? PhaseLabel::Pinned : PhaseLabel::Escaping;
}

std::size_t auto_truncation(const TransitionSpec &spec, std::size_t horizon) {
    const double t = static_cast<double>(horizon);
    const double diffusive = 3.0 * std::sqrt(t) + 10.0;
    const double drift = std::max(0.0, spec.gamma_right - spec.gamma_left);
    const double spread = 8.0 * std::sqrt((spec.gamma_left + spec.gamma_right) * t) + 10.0;
    return static_cast<std::size_t>(std::ceil(std::max(diffusive, drift * t + spread)));
}

WalkSeries walk_series(const TransitionSpec &spec, std::size_t horizon) {
    spec.validate();
    require(horizon >= 1, ErrorCode::InvalidArgument, "horizon must be at least 1");
    const std::size_t n_max = auto_truncation(spec, horizon);
    std::vector<double> a(n_max + 1, 0.0);
    std::vector<double> b(n_max + 1);
    a[0] = 1.0;
    WalkSeries out;
    out.p0.reserve(horizon);
    out.mean.reserve(horizon);
    out.msd.reserve(horizon);
    for (std::size_t t = 0; t < horizon; ++t) {
        step_once(a, b, spec);
        a.swap(b);
        double m1 = 0.0;
        double m2 = 0.0;
        for (std::size_t i = 1; i <= n_max; ++i) {
            const double x = static_cast<double>(i);
            m1 += x * a[i];
            m2 += x * x * a[i];
        }
        out.p0.push_back(a[0]);
        out.mean.push_back(m1);
        out.msd.push_back(m2);
    }
    check_leak(a, kLeakTolerance);
    return out;
}

std::vector<double> return_probability_series(const TransitionSpec &spec, std::size_t horizon) {
    return walk_series(spec, horizon).p0;
}

double confinement_length(const TransitionSpec &spec) {
    const double d = spec.delta();
    require(d < 0.0 && std::abs(d) >= kCriticalTolerance, ErrorCode::NoSteadyState,
            "confinement length defined only in the pinned phase");
    if (spec.gamma_right == 0.0) {
        return 0.0;
    }
    return -1.0 / std::log1p(d);
}

HalfLineDist steady_state(const TransitionSpec &spec, std::optional<std::size_t> n_max) {
    spec.validate();
    if (classify_phase(spec) != PhaseLabel::Pinned) {
        fail(ErrorCode::NoSteadyState, std::string("no normalizable steady state in the ") +
                                           to_string(classify_phase(spec)) + " phase");
    }
    const double xi = confinement_length(spec);
    const std::size_t n = n_max.value_or(std::max<std::size_t>(16, static_cast<std::size_t>(std::ceil(10.0 * xi))));
    require(n >= 1, ErrorCode::InvalidArgument, "steady_state: n_max must be at least 1");
    // Birth-death chain: flux balance across each bond gives the exact
    // stationary vector of the truncated matrix.
    std::vector<double> p(n + 1, 0.0);
    p[0] = 1.0;
    if (spec.gamma_boundary > 0.0) {
        p[1] = spec.gamma_boundary / spec.gamma_left;
        const double r = spec.gamma_right / spec.gamma_left;
        for (std::size_t i = 2; i <= n; ++i) {
            p[i] = p[i - 1] * r;
        }
    }
    const double z = std::accumulate(p.begin(), p.end(), 0.0);
    for (double &x : p) {
        x /= z;
    }
    return HalfLineDist{std::move(p)};
}

double fit_confinement_length(const HalfLineDist &dist, std::size_t first, std::optional<std::size_t> last,
                              double floor) {
    const std::size_t end = std::min(last.value_or(dist.n_max()), dist.n_max());
    std::vector<double> x;
    std::vector<double> y;
    for (std::size_t i = first; i <= end; ++i) {
        if (dist.probabilities[i] > floor) {
            x.push_back(static_cast<double>(i));
            y.push_back(std::log(dist.probabilities[i]));
        }
    }
    require(x.size() >= 2, ErrorCode::InsufficientData, "fit_confinement_length: tail has fewer than two points");
    const LinearFit fit = least_squares(x, y);
    require(fit.slope < 0.0, ErrorCode::InsufficientData, "fit_confinement_length: tail does not decay");
    return -1.0 / fit.slope;
}

} // namespace seqgen::walk
