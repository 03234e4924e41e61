#include "seqgen/channel.hpp"

#include "seqgen/errors.hpp"
#include "seqgen/rng.hpp"

#include <nlohmann/json.hpp>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

namespace seqgen {

namespace {

std::vector<SparseOp> to_sparse(const std::vector<Matrix> &ops) {
    std::vector<SparseOp> out;
    out.reserve(ops.size());
    for (const auto &m : ops) {
        out.push_back(m.sparseView(0.0, 0.0));
    }
    return out;
}

} // namespace

KrausFamily::KrausFamily(std::vector<std::string> alphabet, std::vector<SparseOp> ops)
    : alphabet_(std::move(alphabet)), ops_(std::move(ops)) {
    require(!ops_.empty(), ErrorCode::InvalidArgument, "Kraus family needs at least one operator");
    require(alphabet_.size() == ops_.size(), ErrorCode::DimensionMismatch, "alphabet size differs from operator count");
    require(ops_.size() <= 256, ErrorCode::SizeLimit, "at most 256 symbols are supported");
    dim_ = static_cast<std::size_t>(ops_.front().rows());
    require(dim_ >= 1, ErrorCode::InvalidArgument, "emitter dimension must be positive");
    for (auto &op : ops_) {
        require(static_cast<std::size_t>(op.rows()) == dim_ && static_cast<std::size_t>(op.cols()) == dim_,
                ErrorCode::DimensionMismatch, "Kraus blocks must be square with a common dimension");
        op.makeCompressed();
    }
}

KrausFamily::KrausFamily(std::vector<std::string> alphabet, const std::vector<Matrix> &ops)
    : KrausFamily(std::move(alphabet), to_sparse(ops)) {}

double KrausFamily::completeness_residual() const {
    Matrix sum = Matrix::Zero(static_cast<Eigen::Index>(dim_), static_cast<Eigen::Index>(dim_));
    for (const auto &op : ops_) {
        sum += Matrix(op.adjoint() * op);
    }
    sum -= Matrix::Identity(sum.rows(), sum.cols());
    return sum.cwiseAbs().maxCoeff();
}

KrausChannel::KrausChannel(KrausFamily family) : KrausFamily(std::move(family)) {
    const double r = completeness_residual();
    require(r <= kCompletenessTolerance, ErrorCode::InvalidArgument,
            "Kraus completeness residual " + std::to_string(r) + " exceeds 1e-10");
}

KrausChannel::KrausChannel(std::vector<std::string> alphabet, std::vector<SparseOp> ops)
    : KrausChannel(KrausFamily(std::move(alphabet), std::move(ops))) {}

KrausChannel::KrausChannel(std::vector<std::string> alphabet, const std::vector<Matrix> &ops)
    : KrausChannel(KrausFamily(std::move(alphabet), ops)) {}

KrausChannel compose(const KrausChannel &first, const KrausChannel &second) {
    require(first.emitter_dim() == second.emitter_dim(), ErrorCode::DimensionMismatch,
            "compose: emitter dimensions differ");
    std::vector<std::string> labels;
    std::vector<SparseOp> ops;
    for (std::size_t a = 0; a < first.alphabet_size(); ++a) {
        for (std::size_t b = 0; b < second.alphabet_size(); ++b) {
            labels.push_back(first.alphabet()[a] + "." + second.alphabet()[b]);
            ops.emplace_back(second.op(b) * first.op(a));
        }
    }
    return KrausChannel(std::move(labels), std::move(ops));
}

DensityOperator DensityOperator::basis(std::size_t dim, std::size_t index) {
    require(index < dim, ErrorCode::InvalidArgument, "basis index out of range");
    DensityOperator d{Matrix::Zero(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))};
    d.matrix(static_cast<Eigen::Index>(index), static_cast<Eigen::Index>(index)) = 1.0;
    return d;
}

DensityOperator DensityOperator::identity(std::size_t dim) {
    return {Matrix::Identity(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim))};
}

void DensityOperator::validate(bool normalized) const {
    require(matrix.rows() == matrix.cols() && matrix.rows() > 0, ErrorCode::DimensionMismatch,
            "density operator must be square");
    require((matrix - matrix.adjoint()).cwiseAbs().maxCoeff() <= 1e-12, ErrorCode::InvalidArgument,
            "density operator is not Hermitian");
    if (normalized) {
        require(std::abs(matrix.trace() - cplx(1.0)) <= 1e-12, ErrorCode::InvalidArgument,
                "density operator trace differs from 1");
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(matrix, Eigen::EigenvaluesOnly);
    require(es.eigenvalues().minCoeff() >= -1e-10, ErrorCode::InvalidArgument, "density operator is not PSD");
}

DensityOperator apply_channel(const DensityOperator &rho, const KrausFamily &ch) {
    require(rho.dim() == ch.emitter_dim(), ErrorCode::DimensionMismatch, "apply_channel: dimension mismatch");
    Matrix out = Matrix::Zero(rho.matrix.rows(), rho.matrix.cols());
    for (const auto &k : ch.ops()) {
        const Matrix kr = k * rho.matrix;
        out += Matrix(kr * k.adjoint());
    }
    return {std::move(out)};
}

DensityOperator apply_dual(const DensityOperator &op, const KrausFamily &ch) {
    require(op.dim() == ch.emitter_dim(), ErrorCode::DimensionMismatch, "apply_dual: dimension mismatch");
    Matrix out = Matrix::Zero(op.matrix.rows(), op.matrix.cols());
    for (const auto &k : ch.ops()) {
        const Matrix ko = Matrix(k.adjoint()) * op.matrix;
        out += Matrix(ko * k);
    }
    return {std::move(out)};
}

DensityOperator apply_channel_n(DensityOperator rho, const KrausFamily &ch, std::size_t steps) {
    for (std::size_t i = 0; i < steps; ++i) {
        rho = apply_channel(rho, ch);
    }
    return rho;
}

DensityOperator apply_dual_n(DensityOperator op, const KrausFamily &ch, std::size_t steps) {
    for (std::size_t i = 0; i < steps; ++i) {
        op = apply_dual(op, ch);
    }
    return op;
}

RadiatedState sequential_generate(const KrausFamily &ch, std::size_t start, std::size_t n, std::size_t final_state,
                                  std::size_t max_strings) {
    const std::size_t dim = ch.emitter_dim();
    require(n >= 1, ErrorCode::InvalidArgument, "sequential_generate: N must be at least 1");
    require(start < dim && final_state < dim, ErrorCode::InvalidArgument,
            "sequential_generate: start/final outside emitter");

    // reach[k][i]: basis state i can reach the final state in exactly k steps
    // through nonzero matrix elements.
    std::vector<std::vector<char>> reach(n + 1, std::vector<char>(dim, 0));
    reach[0][final_state] = 1;
    for (std::size_t k = 1; k <= n; ++k) {
        for (const auto &op : ch.ops()) {
            for (Eigen::Index col = 0; col < op.outerSize(); ++col) {
                for (SparseOp::InnerIterator it(op, col); it; ++it) {
                    if (it.value() != cplx(0.0) && reach[k - 1][static_cast<std::size_t>(it.row())]) {
                        reach[k][static_cast<std::size_t>(col)] = 1;
                    }
                }
            }
        }
    }

    std::map<Word, cplx> raw;
    Word word(n);
    std::vector<Vector> stack(n + 1);
    stack[0] = Vector::Zero(static_cast<Eigen::Index>(dim));
    stack[0](static_cast<Eigen::Index>(start)) = 1.0;

    std::function<void(std::size_t)> dfs = [&](std::size_t depth) {
        if (depth == n) {
            const cplx a = stack[n](static_cast<Eigen::Index>(final_state));
            if (a != cplx(0.0)) {
                raw.emplace(word, a);
                require(raw.size() <= max_strings, ErrorCode::SizeLimit, "sequential_generate: support too large");
            }
            return;
        }
        const auto &alive = reach[n - depth - 1];
        for (std::size_t s = 0; s < ch.alphabet_size(); ++s) {
            stack[depth + 1] = ch.op(s) * stack[depth];
            bool useful = false;
            for (std::size_t i = 0; i < dim && !useful; ++i) {
                useful = alive[i] && stack[depth + 1](static_cast<Eigen::Index>(i)) != cplx(0.0);
            }
            if (!useful) {
                continue;
            }
            word[depth] = static_cast<std::uint8_t>(s);
            dfs(depth + 1);
        }
    };
    dfs(0);

    double p = 0.0;
    for (const auto &[w, a] : raw) {
        p += std::norm(a);
    }
    require(p > 0.0, ErrorCode::EmptySupport, "post-selection probability is zero");
    const double scale = 1.0 / std::sqrt(p);
    std::map<Word, cplx> kept;
    for (const auto &[w, a] : raw) {
        if (std::abs(a) * scale >= kAmplitudeThreshold) {
            kept.emplace_hint(kept.end(), w, a * scale);
        }
    }
    require(!kept.empty(), ErrorCode::EmptySupport, "no amplitude survives the sparsity threshold");
    return RadiatedState(n, ch.alphabet(), std::move(kept), p);
}

double renyi_entropy_channel(const KrausFamily &ch, std::size_t start, std::size_t final_state, std::size_t n,
                             std::size_t cut, int order) {
    require(order >= 2, ErrorCode::InvalidArgument, "Renyi order must be an integer >= 2");
    require(cut >= 1 && cut < n, ErrorCode::CutOutOfRange, "cut must satisfy 1 <= l < N");
    const std::size_t dim = ch.emitter_dim();
    require(start < dim && final_state < dim, ErrorCode::InvalidArgument, "start/final outside emitter");
    const DensityOperator rho = apply_channel_n(DensityOperator::basis(dim, start), ch, cut);
    const DensityOperator o = apply_dual_n(DensityOperator::basis(dim, final_state), ch, n - cut);
    const Matrix m = rho.matrix * o.matrix;
    const double tr = m.trace().real();
    require(tr > 0.0, ErrorCode::EmptySupport, "Tr(rho O) vanishes");
    const Matrix mn = m / tr;
    Matrix power = mn;
    for (int k = 1; k < order; ++k) {
        power = power * mn;
    }
    const double t = power.trace().real();
    require(t > 0.0, ErrorCode::EmptySupport, "Tr[(rho O)^n] is not positive");
    return std::log(t) / (1.0 - static_cast<double>(order));
}

DensityOperator steady_state_of_channel(const KrausChannel &ch) {
    const auto dim = static_cast<Eigen::Index>(ch.emitter_dim());
    require(dim <= 64, ErrorCode::SizeLimit, "steady_state_of_channel: emitter dimension above 64");
    const Eigen::Index d2 = dim * dim;
    // Column-major vec: vec(K rho K^dagger) = (conj(K) (x) K) vec(rho).
    Matrix t = Matrix::Zero(d2, d2);
    for (const auto &sk : ch.ops()) {
        const Matrix k(sk);
        const Matrix kc = k.conjugate();
        for (Eigen::Index a = 0; a < dim; ++a) {
            for (Eigen::Index b = 0; b < dim; ++b) {
                if (kc(a, b) != cplx(0.0)) {
                    t.block(a * dim, b * dim, dim, dim) += kc(a, b) * k;
                }
            }
        }
    }
    Eigen::ComplexEigenSolver<Matrix> es(t, false);
    const auto &ev = es.eigenvalues();
    std::size_t near_one = 0;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (std::abs(ev(i) - cplx(1.0)) < 1e-8) {
            ++near_one;
        }
    }
    require(near_one <= 1, ErrorCode::DegenerateSteadyState, "leading transfer eigenvalue is not simple");
    t -= Matrix::Identity(d2, d2);
    Eigen::JacobiSVD<Matrix> svd(t, Eigen::ComputeFullV);
    const Vector v = svd.matrixV().col(d2 - 1);
    Matrix rho = Eigen::Map<const Matrix>(v.data(), dim, dim);
    rho /= rho.trace();
    rho = 0.5 * (rho + rho.adjoint());
    DensityOperator out{rho};
    const double residual = (apply_channel(out, ch).matrix - out.matrix).cwiseAbs().maxCoeff();
    require(residual < 1e-10, ErrorCode::NoSteadyState,
            "fixed point residual " + std::to_string(residual) + " above 1e-10");
    return out;
}

namespace channels {

KrausChannel identity(std::size_t dim) {
    return KrausChannel({"0"}, std::vector<Matrix>{Matrix::Identity(static_cast<Eigen::Index>(dim),
                                                                    static_cast<Eigen::Index>(dim))});
}

KrausChannel amplitude_damping(double gamma) {
    require(gamma >= 0.0 && gamma <= 1.0, ErrorCode::InvalidArgument, "damping must lie in [0, 1]");
    Matrix k0 = Matrix::Zero(2, 2);
    Matrix k1 = Matrix::Zero(2, 2);
    k0(0, 0) = 1.0;
    k0(1, 1) = std::sqrt(1.0 - gamma);
    k1(0, 1) = std::sqrt(gamma);
    return KrausChannel({"0", "1"}, std::vector<Matrix>{k0, k1});
}

KrausChannel depolarizing(double p) {
    require(p >= 0.0 && p <= 1.0, ErrorCode::InvalidArgument, "depolarizing strength must lie in [0, 1]");
    Matrix i = Matrix::Identity(2, 2);
    Matrix x(2, 2);
    Matrix y(2, 2);
    Matrix z(2, 2);
    x << 0, 1, 1, 0;
    y << 0, cplx(0, -1), cplx(0, 1), 0;
    z << 1, 0, 0, -1;
    const double a = std::sqrt(1.0 - 0.75 * p);
    const double b = std::sqrt(p / 4.0);
    return KrausChannel({"i", "x", "y", "z"}, std::vector<Matrix>{a * i, b * x, b * y, b * z});
}

KrausChannel ghz() {
    Vector u(2);
    Vector v(2);
    u << M_SQRT1_2, M_SQRT1_2;
    v << M_SQRT1_2, -M_SQRT1_2;
    return KrausChannel({"0", "1"}, std::vector<Matrix>{u * u.adjoint(), v * v.adjoint()});
}

KrausChannel product(std::size_t dim) {
    return identity(dim);
}

KrausChannel random(std::size_t dim, std::size_t symbols, std::uint64_t seed) {
    require(dim >= 1 && symbols >= 1, ErrorCode::InvalidArgument, "random channel: empty shape");
    const auto d = static_cast<Eigen::Index>(dim);
    const auto rows = d * static_cast<Eigen::Index>(symbols);
    Rng rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix a(rows, d);
    for (Eigen::Index i = 0; i < rows; ++i) {
        for (Eigen::Index j = 0; j < d; ++j) {
            a(i, j) = cplx(g(rng), g(rng));
        }
    }
    Eigen::HouseholderQR<Matrix> qr(a);
    Matrix q = qr.householderQ() * Matrix::Identity(rows, d);
    std::vector<Matrix> ops;
    std::vector<std::string> labels;
    for (std::size_t s = 0; s < symbols; ++s) {
        ops.push_back(q.block(static_cast<Eigen::Index>(s) * d, 0, d, d));
        labels.push_back(std::to_string(s));
    }
    return KrausChannel(std::move(labels), ops);
}

} // namespace channels

KrausFamily channel_from_json(const std::string &text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception &e) {
        fail(ErrorCode::InvalidArgument, std::string("channel JSON: ") + e.what());
    }
    try {
        require(doc.value("format", std::string()) == "seqgen-channel", ErrorCode::InvalidArgument,
                "channel JSON: format must be \"seqgen-channel\"");
        const auto dim = doc.at("emitter_dim").get<std::size_t>();
        const auto alphabet = doc.at("alphabet").get<std::vector<std::string>>();
        std::vector<Matrix> ops(alphabet.size());
        std::vector<bool> seen(alphabet.size(), false);
        for (const auto &k : doc.at("kraus")) {
            const auto sym = k.at("symbol").get<std::string>();
            std::size_t idx = alphabet.size();
            for (std::size_t i = 0; i < alphabet.size(); ++i) {
                if (alphabet[i] == sym) {
                    idx = i;
                }
            }
            require(idx < alphabet.size(), ErrorCode::InvalidArgument, "channel JSON: unknown symbol " + sym);
            require(!seen[idx], ErrorCode::InvalidArgument, "channel JSON: duplicate symbol " + sym);
            seen[idx] = true;
            const auto re = k.at("re").get<std::vector<double>>();
            const auto im = k.contains("im") ? k.at("im").get<std::vector<double>>() : std::vector<double>(re.size());
            require(re.size() == dim * dim && im.size() == dim * dim, ErrorCode::DimensionMismatch,
                    "channel JSON: block for " + sym + " is not emitter_dim^2 long");
            Matrix m(static_cast<Eigen::Index>(dim), static_cast<Eigen::Index>(dim));
            for (std::size_t r = 0; r < dim; ++r) {
                for (std::size_t c = 0; c < dim; ++c) {
                    m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) =
                        cplx(re[r * dim + c], im[r * dim + c]);
                }
            }
            ops[idx] = m;
        }
        for (std::size_t i = 0; i < alphabet.size(); ++i) {
            require(seen[i], ErrorCode::InvalidArgument, "channel JSON: missing block for " + alphabet[i]);
        }
        return KrausFamily(alphabet, ops);
    } catch (const nlohmann::json::exception &e) {
        fail(ErrorCode::InvalidArgument, std::string("channel JSON: ") + e.what());
    }
}

std::string channel_to_json(const KrausFamily &ch, long start, long final_state) {
    nlohmann::json doc;
    doc["format"] = "seqgen-channel";
    doc["version"] = 1;
    doc["emitter_dim"] = ch.emitter_dim();
    doc["alphabet"] = ch.alphabet();
    doc["kraus"] = nlohmann::json::array();
    const std::size_t dim = ch.emitter_dim();
    for (std::size_t s = 0; s < ch.alphabet_size(); ++s) {
        const Matrix m = ch.dense(s);
        std::vector<double> re;
        std::vector<double> im;
        for (std::size_t r = 0; r < dim; ++r) {
            for (std::size_t c = 0; c < dim; ++c) {
                re.push_back(m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)).real());
                im.push_back(m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)).imag());
            }
        }
        doc["kraus"].push_back({{"symbol", ch.alphabet()[s]}, {"re", re}, {"im", im}});
    }
    if (start >= 0) {
        doc["start"] = start;
    }
    if (final_state >= 0) {
        doc["final"] = final_state;
    }
    return doc.dump(2);
}

ChannelDocument load_channel_document(const std::string &path) {
    std::ifstream in(path);
    require(static_cast<bool>(in), ErrorCode::InvalidArgument, "cannot open channel file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    ChannelDocument doc{channel_from_json(text), 0, 0};
    const auto j = nlohmann::json::parse(text);
    doc.start = j.value("start", std::size_t{0});
    doc.final_state = j.value("final", std::size_t{0});
    require(doc.start < doc.family.emitter_dim() && doc.final_state < doc.family.emitter_dim(),
            ErrorCode::InvalidArgument, "channel file: start/final outside emitter");
    return doc;
}

} // namespace seqgen
