#include "seqgen/switches.hpp"

#include "seqgen/errors.hpp"
#include "seqgen/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <optional>

namespace seqgen::switches {

AuxWalkerModel AuxWalkerModel::parse(const std::string &name) {
    AuxWalkerModel m;
    if (name == "diffusive1d") {
        m.kind = Kind::Diffusive1d;
    } else if (name == "diffusive2d") {
        m.kind = Kind::Diffusive2d;
    } else if (name == "ballistic1d") {
        m.kind = Kind::Ballistic1d;
    } else {
        fail(ErrorCode::InvalidArgument, "unknown aux walker '" + name + "'");
    }
    return m;
}

void AuxWalkerModel::validate() const {
    require(move_probability >= 0.0 && move_probability <= 1.0, ErrorCode::InvalidArgument,
            "aux move probability must lie in [0, 1]");
}

const char *to_string(AuxWalkerModel::Kind kind) noexcept {
    switch (kind) {
    case AuxWalkerModel::Kind::Diffusive1d:
        return "diffusive1d";
    case AuxWalkerModel::Kind::Diffusive2d:
        return "diffusive2d";
    case AuxWalkerModel::Kind::Ballistic1d:
        return "ballistic1d";
    }
    return "unknown";
}

namespace {

constexpr long kMaxJump = 1'000'000'000'000L;

class AuxWalker {
  public:
    AuxWalker(const AuxWalkerModel &m, Rng &rng) : m_(m), rng_(rng), bits_(rng) {}

    /// Advances one step; true when the walker just came back to the origin.
    bool step() {
        const bool was_off = x_ != 0 || y_ != 0;
        if (m_.move_probability <= 0.0) {
            return false;
        }
        if (m_.move_probability < 1.0 && uniform_open(rng_) >= m_.move_probability) {
            return false;
        }
        switch (m_.kind) {
        case AuxWalkerModel::Kind::Diffusive1d:
            x_ += bits_.bit() ? 1 : -1;
            break;
        case AuxWalkerModel::Kind::Diffusive2d: {
            const bool axis = bits_.bit();
            const long d = bits_.bit() ? 1 : -1;
            (axis ? x_ : y_) += d;
            break;
        }
        case AuxWalkerModel::Kind::Ballistic1d: {
            const double len = std::floor(1.0 / uniform_open(rng_));
            const long l = len >= static_cast<double>(kMaxJump) ? kMaxJump : static_cast<long>(len);
            x_ += bits_.bit() ? l : -l;
            break;
        }
        }
        return was_off && x_ == 0 && y_ == 0;
    }

    [[nodiscard]] long x() const { return x_; }
    [[nodiscard]] long y() const { return y_; }
    [[nodiscard]] bool at_origin() const { return x_ == 0 && y_ == 0; }

  private:
    AuxWalkerModel m_;
    Rng &rng_;
    BitSource bits_;
    long x_ = 0;
    long y_ = 0;
};

std::uint64_t threshold(double p) {
    if (p >= 1.0) {
        return UINT64_MAX;
    }
    if (p <= 0.0) {
        return 0;
    }
    return static_cast<std::uint64_t>(static_cast<long double>(p) * 18446744073709551616.0L);
}

void check_samples(const std::vector<std::size_t> &samples, std::size_t horizon) {
    for (std::size_t i = 0; i < samples.size(); ++i) {
        require(samples[i] >= 1 && samples[i] <= horizon, ErrorCode::InvalidArgument, "sample time outside [1, T]");
        require(i == 0 || samples[i] > samples[i - 1], ErrorCode::InvalidArgument, "sample times must increase");
    }
}

SwitchedWalkTrace run_levy(const AuxWalkerModel &aux, std::size_t horizon, double drift, Rng &rng,
                           const std::vector<std::size_t> &samples) {
    SwitchedWalkTrace tr;
    tr.horizon = horizon;
    tr.sample_times = samples;
    tr.positions.reserve(samples.size());
    AuxWalker walker(aux, rng);
    const std::uint64_t up_thr[2] = {threshold(0.5 * (1.0 - drift)), threshold(0.5 * (1.0 + drift))};
    int b = 1; // index 1 is the +drift bias
    long x = 0;
    std::size_t next = 0;
    for (std::size_t t = 1; t <= horizon; ++t) {
        if (walker.step()) {
            tr.return_times.push_back(t);
            b ^= 1;
            tr.flip_times.push_back(t);
        }
        const std::uint64_t thr = up_thr[b];
        const bool up = thr == UINT64_MAX || rng() < thr;
        if (up) {
            ++x;
        } else if (x > 0) {
            --x;
        }
        tr.min_position = std::min(tr.min_position, x);
        if (next < samples.size() && samples[next] == t) {
            tr.positions.push_back(x);
            ++next;
        }
    }
    tr.final_aux_x = walker.x();
    tr.final_aux_y = walker.y();
    return tr;
}

SwitchedWalkTrace run_subdiffusive(const RandomRateField &field, std::size_t horizon, Rng &rng,
                                   const std::vector<std::size_t> &samples) {
    SwitchedWalkTrace tr;
    tr.horizon = horizon;
    tr.sample_times = samples;
    tr.positions.reserve(samples.size());
    long x = 0;
    double t = 0.0; // steps taken so far
    std::size_t next = 0;
    const auto h = static_cast<double>(horizon);
    // log of the stay probability per visited site, NaN until first looked up
    std::vector<double> log_stay;
    while (next < samples.size()) {
        const auto site = static_cast<std::size_t>(x);
        if (site >= log_stay.size()) {
            log_stay.resize(std::max<std::size_t>(2 * site + 16, 64), std::nan(""));
        }
        double &ls = log_stay[site];
        if (std::isnan(ls)) {
            ls = std::log1p(-std::clamp(field.rate(x), 0.0, 1.0)); // -inf at rate 1, 0 at rate 0
        }
        double wait = 1.0;
        if (ls == 0.0) {
            wait = HUGE_VAL;
        } else if (ls > -HUGE_VAL) {
            wait = 1.0 + std::floor(std::log(uniform_open(rng)) / ls);
        }
        const double hop_at = t + wait; // the step at which the hop happens
        while (next < samples.size() && static_cast<double>(samples[next]) < hop_at) {
            tr.positions.push_back(x);
            ++next;
        }
        if (hop_at > h) {
            break;
        }
        t = hop_at;
        if (rng() >> 63) {
            ++x;
        } else if (x > 0) {
            --x;
        }
    }
    return tr;
}

} // namespace

SwitchedWalkTrace levy_trace(const AuxWalkerModel &aux, std::size_t horizon, double drift, std::uint64_t seed,
                             const std::vector<std::size_t> &sample_times) {
    aux.validate();
    require(drift >= 0.0 && drift <= 1.0, ErrorCode::InvalidArgument, "drift magnitude must lie in [0, 1]");
    check_samples(sample_times, horizon);
    Rng rng(derive_seed(seed, "levy", 0));
    return run_levy(aux, horizon, drift, rng, sample_times);
}

double RandomRateField::rate(long site) const {
    if (kind == Kind::Uniform) {
        return 1.0;
    }
    // the site hash itself is the uniform draw; seeding a full engine per site is far too slow
    const std::uint64_t h = derive_seed(seed, "site", static_cast<std::uint64_t>(site));
    const double u = (static_cast<double>(h >> 11) + 0.5) * 0x1.0p-53;
    return std::pow(u, 1.0 / mu);
}

double RandomRateField::predicted_exponent() const {
    return kind == Kind::Trap ? mu / (1.0 + mu) : 0.5;
}

SwitchedWalkTrace subdiffusive_trace(const RandomRateField &field, std::size_t horizon, std::uint64_t seed,
                                     const std::vector<std::size_t> &sample_times) {
    require(field.kind == RandomRateField::Kind::Uniform || (field.mu > 0.0 && field.mu < 1.0),
            ErrorCode::InvalidArgument, "trap tail index must lie in (0, 1)");
    check_samples(sample_times, horizon);
    Rng rng(derive_seed(seed, "trace", 0));
    return run_subdiffusive(field, horizon, rng, sample_times);
}

std::vector<double> TraceEnsemble::mean_position() const {
    std::vector<double> m(sample_times.size(), 0.0);
    for (const auto &row : positions) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            m[i] += static_cast<double>(row[i]);
        }
    }
    for (auto &v : m) {
        v /= static_cast<double>(positions.size());
    }
    return m;
}

std::vector<double> TraceEnsemble::mean_square() const {
    std::vector<double> m(sample_times.size(), 0.0);
    for (const auto &row : positions) {
        for (std::size_t i = 0; i < row.size(); ++i) {
            m[i] += static_cast<double>(row[i]) * static_cast<double>(row[i]);
        }
    }
    for (auto &v : m) {
        v /= static_cast<double>(positions.size());
    }
    return m;
}

TraceEnsemble levy_ensemble(const AuxWalkerModel &aux, std::size_t horizon, double drift, std::size_t traces,
                            std::uint64_t seed, const std::vector<std::size_t> &sample_times) {
    aux.validate();
    require(drift >= 0.0 && drift <= 1.0, ErrorCode::InvalidArgument, "drift magnitude must lie in [0, 1]");
    require(traces >= 1, ErrorCode::InvalidArgument, "need at least one trace");
    check_samples(sample_times, horizon);
    TraceEnsemble ens;
    ens.sample_times = sample_times;
    ens.mean_flips.assign(sample_times.size(), 0.0);
    for (std::size_t i = 0; i < traces; ++i) {
        Rng rng(derive_seed(seed, "levy", i));
        auto tr = run_levy(aux, horizon, drift, rng, sample_times);
        std::size_t f = 0;
        for (std::size_t k = 0; k < sample_times.size(); ++k) {
            while (f < tr.flip_times.size() && tr.flip_times[f] <= sample_times[k]) {
                ++f;
            }
            ens.mean_flips[k] += static_cast<double>(f);
        }
        ens.positions.push_back(std::move(tr.positions));
    }
    for (auto &v : ens.mean_flips) {
        v /= static_cast<double>(traces);
    }
    return ens;
}

TraceEnsemble subdiffusive_ensemble(const RandomRateField &field, std::size_t horizon, std::size_t traces,
                                    std::uint64_t seed, const std::vector<std::size_t> &sample_times) {
    require(field.kind == RandomRateField::Kind::Uniform || (field.mu > 0.0 && field.mu < 1.0),
            ErrorCode::InvalidArgument, "trap tail index must lie in (0, 1)");
    require(traces >= 1, ErrorCode::InvalidArgument, "need at least one trace");
    check_samples(sample_times, horizon);
    TraceEnsemble ens;
    ens.sample_times = sample_times;
    ens.mean_flips.assign(sample_times.size(), 0.0);
    for (std::size_t i = 0; i < traces; ++i) {
        RandomRateField f = field;
        f.seed = derive_seed(field.seed, "field", i);
        Rng rng(derive_seed(seed, "trace", i));
        ens.positions.push_back(run_subdiffusive(f, horizon, rng, sample_times).positions);
    }
    return ens;
}

namespace {

// Percentile interval of slopes fitted to curves of resampled traces.
std::pair<double, double> trace_bootstrap(std::size_t traces, std::size_t resamples, std::uint64_t seed,
                                          const std::function<std::optional<double>(const std::vector<std::size_t> &)> &slope) {
    Rng rng(seed);
    std::uniform_int_distribution<std::size_t> pick(0, traces - 1);
    std::vector<double> slopes;
    std::vector<std::size_t> idx(traces);
    for (std::size_t r = 0; r < resamples; ++r) {
        for (auto &i : idx) {
            i = pick(rng);
        }
        if (const auto s = slope(idx)) {
            slopes.push_back(*s);
        }
    }
    require(!slopes.empty(), ErrorCode::InsufficientData, "every bootstrap resample was degenerate");
    return percentile_interval(std::move(slopes), 0.95);
}

std::optional<double> log_log_slope(const std::vector<double> &x, const std::vector<double> &y) {
    std::vector<double> lx;
    std::vector<double> ly;
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (y[i] <= 0.0) {
            return std::nullopt;
        }
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    return least_squares(lx, ly).slope;
}

} // namespace

FitReport fit_ensemble_exponent(const TraceEnsemble &ensemble, double t_min, double t_max, bool squared,
                                std::size_t resamples, std::uint64_t seed) {
    require(ensemble.traces() >= 2, ErrorCode::InsufficientEnsemble, "need at least two traces");
    require(resamples >= 200, ErrorCode::InvalidArgument, "use at least 200 bootstrap resamples");
    std::vector<std::size_t> cols;
    std::vector<double> ts;
    for (std::size_t k = 0; k < ensemble.sample_times.size(); ++k) {
        const auto t = static_cast<double>(ensemble.sample_times[k]);
        if (t >= t_min && t <= t_max) {
            cols.push_back(k);
            ts.push_back(t);
        }
    }
    require(cols.size() >= 4, ErrorCode::InsufficientData, "need at least 4 sample times in the window");
    auto curve = [&](const std::vector<std::size_t> &rows) {
        std::vector<double> y(cols.size(), 0.0);
        for (const auto r : rows) {
            for (std::size_t j = 0; j < cols.size(); ++j) {
                const auto v = static_cast<double>(ensemble.positions[r][cols[j]]);
                y[j] += squared ? v * v : v;
            }
        }
        for (auto &v : y) {
            v /= static_cast<double>(rows.size());
        }
        return y;
    };
    std::vector<std::size_t> all(ensemble.traces());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    FitOptions opt;
    opt.bootstrap_resamples = 0;
    FitReport rep = fit_exponent(ts, curve(all), std::nullopt, opt);
    const auto [lo, hi] = trace_bootstrap(ensemble.traces(), resamples, seed,
                                          [&](const std::vector<std::size_t> &rows) { return log_log_slope(ts, curve(rows)); });
    rep.ci_low = std::min(lo, rep.exponent);
    rep.ci_high = std::max(hi, rep.exponent);
    return rep;
}

OverheadPoint conditioned_overhead(const AuxWalkerModel &aux, std::size_t n, std::size_t trials, std::uint64_t seed) {
    aux.validate();
    require(trials >= 10000, ErrorCode::InsufficientEnsemble, "conditioned_overhead needs at least 10^4 trials");
    require(n >= 1, ErrorCode::InvalidArgument, "N must be positive");
    OverheadPoint pt;
    pt.n = n;
    pt.trials = trials;
    for (std::size_t i = 0; i < trials; ++i) {
        Rng rng(derive_seed(seed, "overhead", (static_cast<std::uint64_t>(n) << 32) ^ i));
        AuxWalker w(aux, rng);
        for (std::size_t t = 0; t < n; ++t) {
            w.step();
        }
        pt.hits += w.at_origin() ? 1 : 0;
    }
    pt.rate = static_cast<double>(pt.hits) / static_cast<double>(trials);
    pt.ci = wilson_interval(pt.hits, trials);
    return pt;
}

OverheadReport overhead_scaling(const AuxWalkerModel &aux, const std::vector<std::size_t> &lengths,
                                std::size_t trials, std::uint64_t seed) {
    OverheadReport rep;
    std::vector<double> xs;
    std::vector<double> ys;
    for (const auto n : lengths) {
        rep.points.push_back(conditioned_overhead(aux, n, trials, seed));
        const auto &p = rep.points.back();
        if (p.hits == 0) {
            rep.warnings.push_back("zero count at N=" + std::to_string(n));
        } else {
            xs.push_back(static_cast<double>(n));
            ys.push_back(p.rate);
        }
    }
    if (xs.size() < 2) {
        return rep;
    }
    auto fit_with = [&](const std::vector<double> &y, std::uint64_t s) {
        std::vector<double> lx;
        std::vector<double> ly;
        for (std::size_t i = 0; i < xs.size(); ++i) {
            lx.push_back(std::log(xs[i]));
            ly.push_back(std::log(y[i]));
        }
        const auto base = least_squares(lx, ly);
        FitReport f;
        f.exponent = base.slope;
        f.intercept = base.intercept;
        f.residual_norm = base.residual_norm;
        f.window = {xs.front(), xs.back()};
        f.points = xs.size();
        // Parametric bootstrap: redraw every hit count from its binomial.
        Rng rng(s);
        std::vector<double> slopes;
        for (std::size_t r = 0; r < 200; ++r) {
            std::vector<double> yy;
            bool ok = true;
            for (std::size_t i = 0; i < xs.size() && ok; ++i) {
                std::binomial_distribution<std::size_t> draw(trials, ys[i]);
                const auto h = draw(rng);
                ok = h > 0;
                yy.push_back(static_cast<double>(h) / static_cast<double>(trials) * (y[i] / ys[i]));
            }
            if (ok) {
                if (const auto sl = log_log_slope(xs, yy)) {
                    slopes.push_back(*sl);
                }
            }
        }
        if (slopes.empty()) {
            f.ci_low = f.ci_high = f.exponent;
        } else {
            const auto [lo, hi] = percentile_interval(std::move(slopes), 0.95);
            f.ci_low = std::min(lo, f.exponent);
            f.ci_high = std::max(hi, f.exponent);
        }
        return f;
    };
    rep.fit = fit_with(ys, derive_seed(seed, "overhead-fit"));
    rep.has_fit = true;
    std::vector<double> corrected;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        corrected.push_back(ys[i] * std::log(xs[i]));
    }
    rep.log_corrected = fit_with(corrected, derive_seed(seed, "overhead-fit-log"));
    rep.has_log_corrected_fit = true;
    return rep;
}

ProxyReport entanglement_proxy(const TraceEnsemble &ensemble, int colors, double l_min, std::uint64_t seed) {
    require(colors >= 2, ErrorCode::InvalidArgument,
            "entanglement proxy needs s >= 2: with s = 1 the log s term vanishes and only the height entropy is left");
    require(ensemble.traces() >= 1000, ErrorCode::InsufficientEnsemble, "entanglement proxy needs at least 10^3 traces");
    const double log_s = std::log(static_cast<double>(colors));
    std::vector<std::size_t> cols;
    ProxyReport rep;
    for (std::size_t k = 0; k < ensemble.sample_times.size(); ++k) {
        if (static_cast<double>(ensemble.sample_times[k]) >= l_min) {
            cols.push_back(k);
            rep.cuts.push_back(static_cast<double>(ensemble.sample_times[k]));
        }
    }
    auto curve = [&](const std::vector<std::size_t> &rows) {
        std::vector<double> s;
        for (const auto k : cols) {
            std::map<long, double> hist;
            double mean = 0.0;
            for (const auto r : rows) {
                const long m = ensemble.positions[r][k];
                hist[m] += 1.0;
                mean += static_cast<double>(m);
            }
            mean /= static_cast<double>(rows.size());
            std::vector<double> counts;
            for (const auto &[m, c] : hist) {
                counts.push_back(c);
            }
            s.push_back(mean * log_s + shannon_entropy(counts));
        }
        return s;
    };
    std::vector<std::size_t> all(ensemble.traces());
    for (std::size_t i = 0; i < all.size(); ++i) {
        all[i] = i;
    }
    rep.entropy = curve(all);
    if (rep.cuts.size() >= 4) {
        FitOptions opt;
        opt.bootstrap_resamples = 0;
        rep.fit = fit_exponent(rep.cuts, rep.entropy, std::nullopt, opt);
        const auto [lo, hi] = trace_bootstrap(ensemble.traces(), 200, seed, [&](const std::vector<std::size_t> &rows) {
            return log_log_slope(rep.cuts, curve(rows));
        });
        rep.fit.ci_low = std::min(lo, rep.fit.exponent);
        rep.fit.ci_high = std::max(hi, rep.fit.exponent);
        rep.has_fit = true;
    }
    return rep;
}

} // namespace seqgen::switches
