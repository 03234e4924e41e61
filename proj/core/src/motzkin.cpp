#include "seqgen/motzkin.hpp"

#include "seqgen/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>

namespace seqgen::motzkin {

namespace {

constexpr double kNormTolerance = 1e-12;

bool close(double a, double b) {
    return std::abs(a - b) <= kNormTolerance;
}

// Neumaier compensated sum.
struct CompensatedSum {
    long double sum = 0.0L;
    long double c = 0.0L;
    void add(long double x) {
        const long double t = sum + x;
        if (std::abs(sum) >= std::abs(x)) {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    [[nodiscard]] long double value() const { return sum + c; }
};

} // namespace

MotzkinEnsemble MotzkinEnsemble::make(std::size_t length, int colors, double w_plus, double w_minus, double w_zero,
                                      double w_plus_boundary, double w_zero_boundary) {
    MotzkinEnsemble e{length, colors, w_plus, w_minus, w_zero, w_plus_boundary, w_zero_boundary, true};
    e.validate();
    return e;
}

MotzkinEnsemble MotzkinEnsemble::unbiased(std::size_t length, int colors, double up) {
    require(colors >= 1, ErrorCode::InvalidArgument, "colors must be at least 1");
    const double s = colors;
    const double minus = s * up;
    const double boundary = (s * up + minus) / s;
    return make(length, colors, up, minus, 1.0 - 2.0 * s * up, boundary, 1.0 - 2.0 * s * up);
}

MotzkinEnsemble MotzkinEnsemble::from_walk(std::size_t length, const walk::TransitionSpec &spec, int colors) {
    spec.validate();
    require(colors >= 1, ErrorCode::InvalidArgument, "colors must be at least 1");
    const double s = colors;
    return make(length, colors, spec.gamma_right / s, spec.gamma_left, 1.0 - spec.gamma_left - spec.gamma_right,
                spec.gamma_boundary / s, 1.0 - spec.gamma_boundary);
}

MotzkinEnsemble MotzkinEnsemble::uniform(std::size_t length, int colors) {
    MotzkinEnsemble e{length, colors, 1.0, 1.0, 1.0, 1.0, 1.0, false};
    e.validate();
    return e;
}

void MotzkinEnsemble::validate() const {
    require(colors >= 1 && colors <= 16, ErrorCode::InvalidArgument, "colors must lie in [1, 16]");
    for (const double w : {w_plus, w_minus, w_zero, w_plus_boundary, w_zero_boundary}) {
        require(w >= 0.0 && std::isfinite(w), ErrorCode::InvalidArgument, "move weights must be finite and >= 0");
    }
    if (stochastic) {
        const double s = colors;
        require(close(s * w_plus + w_minus + w_zero, 1.0), ErrorCode::WeightNormalization,
                "bulk weights violate s*w+ + w- + w0 = 1");
        require(close(s * w_plus_boundary + w_zero_boundary, 1.0), ErrorCode::WeightNormalization,
                "boundary weights violate s*w+_b + w0_b = 1");
    }
}

MotzkinEnsemble MotzkinEnsemble::with_length(std::size_t n) const {
    MotzkinEnsemble e = *this;
    e.length = n;
    return e;
}

std::vector<std::string> alphabet(int colors) {
    std::vector<std::string> out{"f"};
    for (int c = 1; c <= colors; ++c) {
        const std::string tag = colors == 1 ? "" : std::to_string(c);
        out.push_back("u" + tag);
        out.push_back("d" + tag);
    }
    return out;
}

std::uint8_t symbol_index(Step step) {
    if (step == 0) {
        return 0;
    }
    return static_cast<std::uint8_t>(step > 0 ? 2 * step - 1 : -2 * step);
}

Step step_of_symbol(std::uint8_t symbol) {
    if (symbol == 0) {
        return 0;
    }
    return symbol % 2 == 1 ? (symbol + 1) / 2 : -(symbol / 2);
}

std::string render(const Path &path, int colors) {
    const auto labels = alphabet(colors);
    std::string out;
    for (const Step s : path) {
        out += labels.at(symbol_index(s));
    }
    return out;
}

bool is_legal(const Path &path, int colors) {
    std::vector<int> stack;
    for (const Step s : path) {
        if (std::abs(s) > colors) {
            return false;
        }
        if (s > 0) {
            stack.push_back(s);
        } else if (s < 0) {
            if (stack.empty() || stack.back() != -s) {
                return false;
            }
            stack.pop_back();
        }
    }
    return stack.empty();
}

std::vector<Path> enumerate_walks(std::size_t n, int colors) {
    require(n <= kMaxEnumerationLength, ErrorCode::SizeLimit, "enumerate_walks: N above 14");
    require(colors >= 1, ErrorCode::InvalidArgument, "colors must be at least 1");
    std::vector<Path> out;
    Path path;
    std::vector<int> stack;
    std::function<void()> rec = [&]() {
        const std::size_t left = n - path.size();
        if (left == 0) {
            if (stack.empty()) {
                out.push_back(path);
            }
            return;
        }
        if (stack.size() > left) {
            return;
        }
        path.push_back(0);
        rec();
        path.pop_back();
        for (int c = 1; c <= colors; ++c) {
            path.push_back(c);
            stack.push_back(c);
            rec();
            stack.pop_back();
            path.pop_back();
        }
        if (!stack.empty()) {
            const int top = stack.back();
            path.push_back(-top);
            stack.pop_back();
            rec();
            stack.push_back(top);
            path.pop_back();
        }
    };
    rec();
    return out;
}

BigCount walk_count(std::size_t n, int colors) {
    require(colors >= 1, ErrorCode::InvalidArgument, "colors must be at least 1");
    std::vector<BigCount> h(n + 2, 0);
    h[0] = 1;
    for (std::size_t t = 0; t < n; ++t) {
        std::vector<BigCount> next(n + 2, 0);
        for (std::size_t m = 0; m <= n; ++m) {
            if (h[m] == 0) {
                continue;
            }
            next[m] += h[m];
            next[m + 1] += h[m] * colors;
            if (m > 0) {
                next[m - 1] += h[m];
            }
        }
        h.swap(next);
    }
    return h[0];
}

namespace {

// Unnormalized weight product of a legal path.
double path_weight(const MotzkinEnsemble &e, const Path &path) {
    double w = 1.0;
    std::size_t height = 0;
    for (const Step s : path) {
        if (s == 0) {
            w *= height == 0 ? e.w_zero_boundary : e.w_zero;
        } else if (s > 0) {
            w *= height == 0 ? e.w_plus_boundary : e.w_plus;
            ++height;
        } else {
            w *= e.w_minus;
            --height;
        }
    }
    return w;
}

} // namespace

double amplitude(const MotzkinEnsemble &ensemble, const Path &path) {
    ensemble.validate();
    if (path.size() != ensemble.length || !is_legal(path, ensemble.colors)) {
        return 0.0;
    }
    const HeightDp dp(ensemble);
    return std::sqrt(path_weight(ensemble, path)) * std::exp(-0.5 * dp.log_partition());
}

RadiatedState exact_state(const MotzkinEnsemble &ensemble) {
    ensemble.validate();
    const auto walks = enumerate_walks(ensemble.length, ensemble.colors);
    std::map<Word, cplx> amps;
    double z = 0.0;
    for (const auto &p : walks) {
        z += path_weight(ensemble, p);
    }
    require(z > 0.0, ErrorCode::EmptySupport, "all legal strings carry zero weight");
    for (const auto &p : walks) {
        const double a = std::sqrt(path_weight(ensemble, p) / z);
        if (a >= kAmplitudeThreshold) {
            Word w;
            for (const Step s : p) {
                w.push_back(symbol_index(s));
            }
            amps.emplace(std::move(w), a);
        }
    }
    const double success = ensemble.stochastic ? z : 1.0;
    return RadiatedState(ensemble.length, alphabet(ensemble.colors), std::move(amps), success);
}

HeightDp::HeightDp(const MotzkinEnsemble &ensemble) : e_(ensemble) {
    e_.validate();
    const std::size_t n = e_.length;
    const long double s = e_.colors;
    const long double up = s * e_.w_plus;
    const long double up_b = s * e_.w_plus_boundary;
    const long double down = e_.w_minus;
    const long double flat = e_.w_zero;
    const long double flat_b = e_.w_zero_boundary;
    const std::size_t hmax = n / 2 + 1;

    long double log_scale = 0.0L;
    prefix_.assign(n + 1, {});
    prefix_[0].assign(hmax + 1, 0.0L);
    prefix_[0][0] = 1.0L;
    for (std::size_t l = 1; l <= n; ++l) {
        const auto &a = prefix_[l - 1];
        std::vector<long double> b(hmax + 1, 0.0L);
        for (std::size_t m = 0; m <= hmax; ++m) {
            if (a[m] == 0.0L) {
                continue;
            }
            b[m] += a[m] * (m == 0 ? flat_b : flat);
            if (m < hmax) {
                b[m + 1] += a[m] * (m == 0 ? up_b : up);
            }
            if (m > 0) {
                b[m - 1] += a[m] * down;
            }
        }
        const long double mx = *std::max_element(b.begin(), b.end());
        require(mx > 0.0L, ErrorCode::EmptySupport, "no legal prefix carries weight");
        for (auto &x : b) {
            x /= mx;
        }
        log_scale += std::log(mx);
        prefix_[l] = std::move(b);
    }
    require(prefix_[n][0] > 0.0L, ErrorCode::EmptySupport, "all legal strings carry zero weight");
    log_z_ = static_cast<double>(log_scale + std::log(prefix_[n][0]));

    // suffix_[k][m]: weight of length-k continuations from height m back to 0.
    suffix_.assign(n + 1, {});
    suffix_[0].assign(hmax + 1, 0.0L);
    suffix_[0][0] = 1.0L;
    for (std::size_t k = 1; k <= n; ++k) {
        const auto &a = suffix_[k - 1];
        std::vector<long double> b(hmax + 1, 0.0L);
        for (std::size_t m = 0; m <= hmax; ++m) {
            long double v = a[m] * (m == 0 ? flat_b : flat);
            if (m < hmax) {
                v += (m == 0 ? up_b : up) * a[m + 1];
            }
            if (m > 0) {
                v += down * a[m - 1];
            }
            b[m] = v;
        }
        const long double mx = *std::max_element(b.begin(), b.end());
        require(mx > 0.0L, ErrorCode::EmptySupport, "no legal suffix carries weight");
        for (auto &x : b) {
            x /= mx;
        }
        suffix_[k] = std::move(b);
    }
}

std::vector<double> HeightDp::height_distribution(std::size_t cut) const {
    require(cut <= e_.length, ErrorCode::CutOutOfRange, "cut beyond chain length");
    const auto &a = prefix_[cut];
    const auto &b = suffix_[e_.length - cut];
    CompensatedSum z;
    for (std::size_t m = 0; m < a.size(); ++m) {
        z.add(a[m] * b[m]);
    }
    const long double zt = z.value();
    std::vector<double> p(a.size());
    for (std::size_t m = 0; m < a.size(); ++m) {
        p[m] = static_cast<double>(a[m] * b[m] / zt);
    }
    while (p.size() > 1 && p.back() == 0.0) {
        p.pop_back();
    }
    return p;
}

SchmidtSpectrum HeightDp::spectrum(std::size_t cut) const {
    require(cut >= 1 && cut < e_.length, ErrorCode::CutOutOfRange, "cut must satisfy 1 <= l < N");
    SchmidtSpectrum out;
    out.cut = cut;
    out.colors = e_.colors;
    const auto p = height_distribution(cut);
    const double log_s = std::log(static_cast<double>(e_.colors));
    for (std::size_t m = 0; m < p.size(); ++m) {
        if (p[m] <= 0.0) {
            continue;
        }
        SchmidtEntry entry;
        entry.height = m;
        entry.weight = p[m];
        entry.lambda = std::exp(std::log(p[m]) - static_cast<double>(m) * log_s);
        entry.multiplicity = std::pow(static_cast<double>(e_.colors), static_cast<double>(m));
        out.entries.push_back(entry);
    }
    return out;
}

SchmidtSpectrum schmidt_spectrum(const MotzkinEnsemble &ensemble, std::size_t cut) {
    require(cut >= 1 && cut < ensemble.length, ErrorCode::CutOutOfRange, "cut must satisfy 1 <= l < N");
    return HeightDp(ensemble).spectrum(cut);
}

double SchmidtSpectrum::total_weight() const {
    double t = 0.0;
    for (const auto &e : entries) {
        t += e.weight;
    }
    return t;
}

double SchmidtSpectrum::entropy() const {
    const double log_s = std::log(static_cast<double>(colors));
    double h = 0.0;
    for (const auto &e : entries) {
        h += e.weight * (static_cast<double>(e.height) * log_s - std::log(e.weight));
    }
    return h;
}

double SchmidtSpectrum::renyi(double order) const {
    if (std::abs(order - 1.0) < 1e-12) {
        return entropy();
    }
    const double log_s = std::log(static_cast<double>(colors));
    // sum_m s^m lambda^n = sum_m p^n s^{m(1-n)}
    double acc = 0.0;
    for (const auto &e : entries) {
        acc += std::exp(order * std::log(e.weight) + (1.0 - order) * static_cast<double>(e.height) * log_s);
    }
    return std::log(acc) / (1.0 - order);
}

double SchmidtSpectrum::height_mean() const {
    double m = 0.0;
    for (const auto &e : entries) {
        m += static_cast<double>(e.height) * e.weight;
    }
    return m;
}

std::vector<double> SchmidtSpectrum::expanded(std::size_t max_entries) const {
    std::vector<double> out;
    for (const auto &e : entries) {
        require(e.multiplicity <= static_cast<double>(max_entries - out.size()), ErrorCode::SizeLimit,
                "expanded spectrum too large");
        for (std::size_t k = 0; k < static_cast<std::size_t>(e.multiplicity); ++k) {
            out.push_back(e.lambda);
        }
    }
    std::sort(out.begin(), out.end(), std::greater<>());
    return out;
}

const char *to_string(EntropyForm form) noexcept {
    switch (form) {
    case EntropyForm::Logarithmic:
        return "logarithmic";
    case EntropyForm::PowerLaw:
        return "power-law";
    case EntropyForm::Saturating:
        return "saturating";
    }
    return "unknown";
}

ScalingReport entropy_scaling(const MotzkinEnsemble &ensemble, const std::vector<std::size_t> &cuts,
                              std::uint64_t seed) {
    require(cuts.size() >= 4, ErrorCode::InsufficientData, "entropy_scaling: need at least 4 cut values");
    for (const auto l : cuts) {
        require(l >= 1 && 4 * l <= ensemble.length, ErrorCode::CutOutOfRange, "entropy_scaling: cuts must be <= N/4");
    }
    const HeightDp dp(ensemble);
    ScalingReport r;
    std::vector<double> log_l;
    for (const auto l : cuts) {
        r.cuts.push_back(static_cast<double>(l));
        r.entropies.push_back(dp.spectrum(l).entropy());
        log_l.push_back(std::log(static_cast<double>(l)));
    }
    r.logarithmic = least_squares(log_l, r.entropies);
    r.log_residual = r.logarithmic.residual_norm;

    // Area law: the local slope dS/dlog(l) collapses towards the last cut.
    // It stays put for a log law and grows for a power law.
    std::vector<double> slopes;
    for (std::size_t i = 0; i + 1 < r.cuts.size(); ++i) {
        const double dl = log_l[i + 1] - log_l[i];
        if (dl > 0.0) {
            slopes.push_back((r.entropies[i + 1] - r.entropies[i]) / dl);
        }
    }
    const double top = std::max(std::abs(r.entropies.back()), 1e-300);
    bool flat = slopes.empty() || std::abs(slopes.back()) <= 1e-3 * top;
    if (!flat && slopes.size() >= 2) {
        const double peak = *std::max_element(slopes.begin(), slopes.end());
        flat = peak > 0.0 && std::abs(slopes.back()) <= 0.05 * peak && std::abs(slopes.back()) <= 1e-2 * top;
    }

    bool positive = true;
    for (const double s : r.entropies) {
        positive = positive && s > 0.0;
    }
    if (positive) {
        FitOptions opt;
        opt.seed = seed;
        r.power = fit_exponent(r.cuts, r.entropies, std::nullopt, opt);
        double rss = 0.0;
        for (std::size_t i = 0; i < r.cuts.size(); ++i) {
            const double pred = std::exp(r.power.intercept) * std::pow(r.cuts[i], r.power.exponent);
            rss += (r.entropies[i] - pred) * (r.entropies[i] - pred);
        }
        r.power_residual = std::sqrt(rss);
    } else {
        r.power_residual = HUGE_VAL;
    }
    if (flat) {
        r.preferred = EntropyForm::Saturating;
    } else {
        r.preferred = r.log_residual <= r.power_residual ? EntropyForm::Logarithmic : EntropyForm::PowerLaw;
    }
    return r;
}

KrausFamily motzkin_channel(const MotzkinEnsemble &ensemble, std::size_t n_max) {
    ensemble.validate();
    require(n_max >= 1, ErrorCode::InvalidArgument, "motzkin_channel: n_max must be at least 1");
    require(ensemble.stochastic, ErrorCode::WeightNormalization, "motzkin_channel needs a stochastic ensemble");
    const std::size_t s = static_cast<std::size_t>(ensemble.colors);
    // States: color sequences of length <= n_max; index = offset(h) + base-s digits.
    std::vector<std::size_t> offset{0};
    std::size_t count = 1;
    std::size_t level = 1;
    for (std::size_t h = 1; h <= n_max; ++h) {
        offset.push_back(count);
        level *= s;
        count += level;
        require(count <= 4096, ErrorCode::SizeLimit, "motzkin_channel: emitter dimension above 4096");
    }
    const auto dim = static_cast<Eigen::Index>(count);
    const std::size_t nsym = 1 + 2 * s;
    std::vector<std::vector<Eigen::Triplet<cplx>>> trip(nsym);
    const double sq_up = std::sqrt(ensemble.w_plus);
    const double sq_up_b = std::sqrt(ensemble.w_plus_boundary);
    const double sq_down = std::sqrt(ensemble.w_minus);
    std::size_t width = 1;
    for (std::size_t h = 0; h <= n_max; ++h) {
        for (std::size_t code = 0; code < width; ++code) {
            const auto src = static_cast<Eigen::Index>(offset[h] + code);
            double flat = h == 0 ? ensemble.w_zero_boundary : ensemble.w_zero;
            if (h == n_max) {
                flat += static_cast<double>(s) * ensemble.w_plus;
            } else {
                for (std::size_t c = 0; c < s; ++c) {
                    const auto dst = static_cast<Eigen::Index>(offset[h + 1] + code * s + c);
                    trip[2 * c + 1].emplace_back(dst, src, h == 0 ? sq_up_b : sq_up);
                }
            }
            trip[0].emplace_back(src, src, std::sqrt(flat));
            if (h > 0) {
                const std::size_t top = code % s;
                const auto dst = static_cast<Eigen::Index>(offset[h - 1] + code / s);
                trip[2 * top + 2].emplace_back(dst, src, sq_down);
            }
        }
        width *= s;
    }
    std::vector<SparseOp> ops;
    for (auto &t : trip) {
        SparseOp op(dim, dim);
        op.setFromTriplets(t.begin(), t.end());
        ops.push_back(std::move(op));
    }
    return KrausFamily(alphabet(ensemble.colors), std::move(ops));
}

} // namespace seqgen::motzkin
