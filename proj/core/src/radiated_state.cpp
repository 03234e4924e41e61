#include "seqgen/channel.hpp"

#include "seqgen/errors.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <unordered_map>

namespace seqgen {

RadiatedState::RadiatedState(std::size_t length, std::vector<std::string> alphabet, std::map<Word, cplx> amplitudes,
                             double success_probability)
    : length_(length), alphabet_(std::move(alphabet)), amplitudes_(std::move(amplitudes)),
      success_probability_(success_probability) {
    for (const auto &[w, a] : amplitudes_) {
        require(w.size() == length_, ErrorCode::DimensionMismatch, "RadiatedState: word length differs from N");
        for (const auto s : w) {
            require(s < alphabet_.size(), ErrorCode::InvalidArgument, "RadiatedState: symbol outside alphabet");
        }
    }
}

cplx RadiatedState::amplitude(const Word &w) const {
    const auto it = amplitudes_.find(w);
    return it == amplitudes_.end() ? cplx(0.0) : it->second;
}

cplx RadiatedState::amplitude(const std::vector<std::string> &labels) const {
    Word w;
    w.reserve(labels.size());
    for (const auto &l : labels) {
        const auto it = std::find(alphabet_.begin(), alphabet_.end(), l);
        if (it == alphabet_.end()) {
            return 0.0;
        }
        w.push_back(static_cast<std::uint8_t>(it - alphabet_.begin()));
    }
    return amplitude(w);
}

double RadiatedState::norm_squared() const {
    double s = 0.0;
    for (const auto &[w, a] : amplitudes_) {
        s += std::norm(a);
    }
    return s;
}

std::string RadiatedState::render(const Word &w, const std::string &sep) const {
    std::string out;
    for (std::size_t i = 0; i < w.size(); ++i) {
        if (i > 0) {
            out += sep;
        }
        out += alphabet_.at(w[i]);
    }
    return out;
}

namespace {

struct WordHash {
    std::size_t operator()(const Word &w) const noexcept {
        std::size_t h = 1469598103934665603ull;
        for (const auto c : w) {
            h = (h ^ c) * 1099511628211ull;
        }
        return h;
    }
};

std::size_t find_root(std::vector<std::size_t> &parent, std::size_t x) {
    while (parent[x] != x) {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    return x;
}

} // namespace

std::vector<double> RadiatedState::schmidt_spectrum(std::size_t cut) const {
    require(cut <= length_, ErrorCode::CutOutOfRange, "cut beyond state length");
    std::unordered_map<Word, std::size_t, WordHash> left;
    std::unordered_map<Word, std::size_t, WordHash> right;
    struct Entry {
        std::size_t l;
        std::size_t r;
        cplx a;
    };
    std::vector<Entry> entries;
    entries.reserve(amplitudes_.size());
    for (const auto &[w, a] : amplitudes_) {
        Word pre(w.begin(), w.begin() + static_cast<std::ptrdiff_t>(cut));
        Word suf(w.begin() + static_cast<std::ptrdiff_t>(cut), w.end());
        const auto li = left.emplace(std::move(pre), left.size()).first->second;
        const auto ri = right.emplace(std::move(suf), right.size()).first->second;
        entries.push_back({li, ri, a});
    }
    // Connected components of the bipartite prefix/suffix graph are
    // independent blocks of the coefficient matrix.
    const std::size_t nl = left.size();
    std::vector<std::size_t> parent(nl + right.size());
    std::iota(parent.begin(), parent.end(), 0);
    for (const auto &e : entries) {
        const auto a = find_root(parent, e.l);
        const auto b = find_root(parent, nl + e.r);
        if (a != b) {
            parent[a] = b;
        }
    }
    std::unordered_map<std::size_t, std::vector<std::size_t>> blocks;
    for (std::size_t i = 0; i < entries.size(); ++i) {
        blocks[find_root(parent, entries[i].l)].push_back(i);
    }
    std::vector<double> spectrum;
    for (const auto &[root, members] : blocks) {
        std::unordered_map<std::size_t, Eigen::Index> rows;
        std::unordered_map<std::size_t, Eigen::Index> cols;
        for (const auto i : members) {
            rows.emplace(entries[i].l, static_cast<Eigen::Index>(rows.size()));
            cols.emplace(entries[i].r, static_cast<Eigen::Index>(cols.size()));
        }
        Matrix m = Matrix::Zero(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
        for (const auto i : members) {
            m(rows[entries[i].l], cols[entries[i].r]) += entries[i].a;
        }
        if (m.rows() == 1 || m.cols() == 1) {
            spectrum.push_back(m.squaredNorm());
            continue;
        }
        Eigen::BDCSVD<Matrix> svd(m);
        for (Eigen::Index k = 0; k < svd.singularValues().size(); ++k) {
            const double s = svd.singularValues()(k);
            spectrum.push_back(s * s);
        }
    }
    std::sort(spectrum.begin(), spectrum.end(), std::greater<>());
    return spectrum;
}

double renyi_of_spectrum(const std::vector<double> &p, double order) {
    double total = 0.0;
    for (const double x : p) {
        total += x;
    }
    require(total > 0.0, ErrorCode::EmptySupport, "empty spectrum");
    if (std::abs(order - 1.0) < 1e-12) {
        double h = 0.0;
        for (const double x : p) {
            if (x > 0.0) {
                const double q = x / total;
                h -= q * std::log(q);
            }
        }
        return h;
    }
    double s = 0.0;
    for (const double x : p) {
        if (x > 0.0) {
            s += std::pow(x / total, order);
        }
    }
    return std::log(s) / (1.0 - order);
}

double RadiatedState::renyi_entropy(std::size_t cut, double order) const {
    return renyi_of_spectrum(schmidt_spectrum(cut), order);
}

double RadiatedState::entanglement_entropy(std::size_t cut) const {
    return renyi_entropy(cut, 1.0);
}

double RadiatedState::mps_discarded_weight(std::size_t rank) const {
    double worst = 0.0;
    for (std::size_t cut = 1; cut < length_; ++cut) {
        const auto spec = schmidt_spectrum(cut);
        double discarded = 0.0;
        for (std::size_t k = rank; k < spec.size(); ++k) {
            discarded += spec[k];
        }
        worst = std::max(worst, discarded);
    }
    return worst;
}

double fidelity(const RadiatedState &a, const RadiatedState &b) {
    std::vector<int> map(b.alphabet().size(), -1);
    for (std::size_t i = 0; i < b.alphabet().size(); ++i) {
        const auto it = std::find(a.alphabet().begin(), a.alphabet().end(), b.alphabet()[i]);
        if (it != a.alphabet().end()) {
            map[i] = static_cast<int>(it - a.alphabet().begin());
        }
    }
    cplx overlap = 0.0;
    for (const auto &[w, amp] : b.amplitudes()) {
        Word t;
        t.reserve(w.size());
        bool ok = true;
        for (const auto s : w) {
            if (map[s] < 0) {
                ok = false;
                break;
            }
            t.push_back(static_cast<std::uint8_t>(map[s]));
        }
        if (ok) {
            overlap += std::conj(a.amplitude(t)) * amp;
        }
    }
    return std::norm(overlap) / (a.norm_squared() * b.norm_squared());
}

} // namespace seqgen
