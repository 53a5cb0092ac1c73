#include "hinmine/mf.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "hinmine/rng.hpp"

namespace hinmine {

namespace {

constexpr std::uint64_t kInitRowTag = 0x4d465530ULL;
constexpr std::uint64_t kInitColTag = 0x4d465531ULL;
constexpr std::uint64_t kInitCtxTag = 0x4d465532ULL;
constexpr std::uint64_t kOrderUvTag = 0x4d465533ULL;
constexpr std::uint64_t kOrderUuTag = 0x4d465534ULL;

void init_gaussian(std::vector<double>& m, std::size_t count, std::uint32_t rank,
                   std::uint64_t seed) {
    m.resize(count * rank);
    Rng rng(seed);
    double std_dev = 0.1 / std::sqrt(static_cast<double>(rank));
    for (double& x : m) x = rng.gaussian() * std_dev;
}

/// One SGD pass over a matrix: positives in shuffled order, each followed
/// by its sampled zeros from the same row. `scale` weights the loss term.
void sgd_pass(const SparseMatrix& m, std::vector<double>& rows, std::vector<double>& cols,
              const MfParams& p, double scale, Rng& rng) {
    const std::uint32_t rank = p.rank;
    std::vector<std::uint32_t> order(m.entries().size());
    std::iota(order.begin(), order.end(), 0u);
    rng.shuffle(order);

    double neg_acc = 0.0;
    auto update = [&](std::uint32_t r, std::uint32_t c, double target) {
        double* u = rows.data() + std::size_t(r) * rank;
        double* v = cols.data() + std::size_t(c) * rank;
        double pred = 0.0;
        for (std::uint32_t k = 0; k < rank; ++k) pred += u[k] * v[k];
        double err = target - pred;
        double step = p.learning_rate * scale;
        for (std::uint32_t k = 0; k < rank; ++k) {
            double uk = u[k];
            u[k] += step * (err * v[k] - p.reg * uk);
            v[k] += step * (err * uk - p.reg * v[k]);
        }
    };

    for (std::uint32_t idx : order) {
        const auto& e = m.entries()[idx];
        update(e.row, e.col, e.value);
        neg_acc += p.neg_ratio;
        while (neg_acc >= 1.0) {
            neg_acc -= 1.0;
            // same-row unobserved column; bounded retries keep the pass
            // total even when a row is dense
            for (int attempt = 0; attempt < 32; ++attempt) {
                std::uint32_t c = static_cast<std::uint32_t>(rng.bounded(m.n_cols()));
                if (!m.contains(e.row, c)) {
                    update(e.row, c, 0.0);
                    break;
                }
            }
        }
    }
}

} // namespace

SparseMatrix::SparseMatrix(std::uint32_t n_rows, std::uint32_t n_cols)
    : n_rows_(n_rows), n_cols_(n_cols) {
    if (n_rows == 0 || n_cols == 0)
        throw ArgumentError("SparseMatrix dimensions must be positive");
}

void SparseMatrix::add(std::uint32_t row, std::uint32_t col, double value) {
    if (row >= n_rows_ || col >= n_cols_)
        throw ArgumentError("SparseMatrix entry out of range");
    if (!std::isfinite(value)) throw ArgumentError("SparseMatrix value must be finite");
    if (!index_.insert(key(row, col)).second)
        throw ArgumentError("duplicate SparseMatrix entry");
    entries_.push_back(Entry{row, col, value});
}

bool SparseMatrix::contains(std::uint32_t row, std::uint32_t col) const {
    return index_.count(key(row, col)) != 0;
}

SparseMatrix build_interaction_matrix(const HinGraph& g, EdgeKind kind) {
    std::uint32_t n_users = static_cast<std::uint32_t>(g.n_of_kind(NodeKind::User));
    std::uint32_t n_cols = kind == EdgeKind::Donate
                               ? static_cast<std::uint32_t>(g.n_of_kind(NodeKind::Video))
                               : n_users;
    SparseMatrix m(n_users, n_cols);
    for (std::uint32_t user : g.members(NodeKind::User)) {
        std::uint32_t r = g.kind_index(user);
        for (std::uint32_t dst : g.neighbors_dir(user, kind, Direction::Out))
            m.add(r, g.kind_index(dst), 1.0); // adjacency is already collapsed
    }
    return m;
}

Factors train_pmf(const SparseMatrix& m, const MfParams& params) {
    if (m.empty()) throw ArgumentError("train_pmf: empty matrix");
    if (params.rank == 0 || params.rank > std::min(m.n_rows(), m.n_cols()))
        throw ArgumentError("train_pmf: rank must be in [1, min(n_rows, n_cols)]");

    Factors f;
    f.rank = params.rank;
    f.n_rows = m.n_rows();
    f.n_cols = m.n_cols();
    init_gaussian(f.row_factors, f.n_rows, f.rank, mix_seed(params.seed, kInitRowTag));
    init_gaussian(f.col_factors, f.n_cols, f.rank, mix_seed(params.seed, kInitColTag));

    Rng rng(mix_seed(params.seed, kOrderUvTag));
    for (std::uint32_t epoch = 0; epoch < params.epochs; ++epoch)
        sgd_pass(m, f.row_factors, f.col_factors, params, 1.0, rng);
    return f;
}

Factors train_cmf(const SparseMatrix& m_uv, const SparseMatrix& m_uu, const MfParams& params) {
    if (m_uv.empty()) throw ArgumentError("train_cmf: empty user-video matrix");
    if (m_uv.n_rows() != m_uu.n_rows() || m_uu.n_rows() != m_uu.n_cols())
        throw ArgumentError("train_cmf: user universes of the two matrices do not match");
    if (params.rank == 0 || params.rank > std::min(m_uv.n_rows(), m_uv.n_cols()))
        throw ArgumentError("train_cmf: rank must be in [1, min(n_rows, n_cols)]");
    if (params.alpha < 0.0 || params.alpha > 1.0)
        throw ArgumentError("train_cmf: alpha must be in [0, 1]");

    Factors f;
    f.rank = params.rank;
    f.n_rows = m_uv.n_rows();
    f.n_cols = m_uv.n_cols();
    f.n_context = m_uu.n_cols();
    init_gaussian(f.row_factors, f.n_rows, f.rank, mix_seed(params.seed, kInitRowTag));
    init_gaussian(f.col_factors, f.n_cols, f.rank, mix_seed(params.seed, kInitColTag));
    init_gaussian(f.context_factors, f.n_context, f.rank, mix_seed(params.seed, kInitCtxTag));

    // streams are independent per matrix so that alpha=1 consumes exactly
    // the randomness train_pmf would
    Rng rng_uv(mix_seed(params.seed, kOrderUvTag));
    Rng rng_uu(mix_seed(params.seed, kOrderUuTag));
    for (std::uint32_t epoch = 0; epoch < params.epochs; ++epoch) {
        if (params.alpha > 0.0)
            sgd_pass(m_uv, f.row_factors, f.col_factors, params, params.alpha, rng_uv);
        if (params.alpha < 1.0 && !m_uu.empty())
            sgd_pass(m_uu, f.row_factors, f.context_factors, params, 1.0 - params.alpha, rng_uu);
    }
    return f;
}

double mf_score(const Factors& f, std::uint32_t user, std::uint32_t item) {
    if (user >= f.n_rows || item >= f.n_cols)
        throw ArgumentError("mf_score: index out of range");
    auto u = f.row(user);
    auto v = f.col(item);
    double s = 0.0;
    for (std::uint32_t k = 0; k < f.rank; ++k) s += u[k] * v[k];
    return s;
}

double mf_batch_loss(const Factors& f, std::span<const MfSample> samples, double reg,
                     bool context_cols) {
    const std::vector<double>& cols = context_cols ? f.context_factors : f.col_factors;
    double loss = 0.0;
    for (const MfSample& s : samples) {
        const double* u = f.row_factors.data() + std::size_t(s.row) * f.rank;
        const double* v = cols.data() + std::size_t(s.col) * f.rank;
        double pred = 0.0, nu = 0.0, nv = 0.0;
        for (std::uint32_t k = 0; k < f.rank; ++k) {
            pred += u[k] * v[k];
            nu += u[k] * u[k];
            nv += v[k] * v[k];
        }
        double err = s.target - pred;
        loss += 0.5 * (err * err + reg * (nu + nv));
    }
    return loss;
}

void mf_batch_gradient(const Factors& f, std::span<const MfSample> samples, double reg,
                       bool context_cols, std::vector<double>& grad_rows,
                       std::vector<double>& grad_cols) {
    const std::vector<double>& cols = context_cols ? f.context_factors : f.col_factors;
    grad_rows.assign(f.row_factors.size(), 0.0);
    grad_cols.assign(cols.size(), 0.0);
    for (const MfSample& s : samples) {
        const double* u = f.row_factors.data() + std::size_t(s.row) * f.rank;
        const double* v = cols.data() + std::size_t(s.col) * f.rank;
        double pred = 0.0;
        for (std::uint32_t k = 0; k < f.rank; ++k) pred += u[k] * v[k];
        double err = s.target - pred;
        double* gu = grad_rows.data() + std::size_t(s.row) * f.rank;
        double* gv = grad_cols.data() + std::size_t(s.col) * f.rank;
        for (std::uint32_t k = 0; k < f.rank; ++k) {
            gu[k] += -err * v[k] + reg * u[k];
            gv[k] += -err * u[k] + reg * v[k];
        }
    }
}

void write_factors(const std::filesystem::path& path, const Factors& f, const HinGraph& g,
                   NodeKind row_kind, NodeKind col_kind) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write factors file " + path.string());
    char buf[32];
    auto write_block = [&](const char* role, const std::vector<double>& m, std::uint32_t count,
                           NodeKind kind) {
        out << "role " << role << ' ' << count << ' ' << f.rank << '\n';
        for (std::uint32_t i = 0; i < count; ++i) {
            out << g.external_id(g.node_of_kind(kind, i));
            for (std::uint32_t k = 0; k < f.rank; ++k) {
                std::snprintf(buf, sizeof(buf), " %.9g", m[std::size_t(i) * f.rank + k]);
                out << buf;
            }
            out << '\n';
        }
    };
    write_block("row", f.row_factors, f.n_rows, row_kind);
    write_block("col", f.col_factors, f.n_cols, col_kind);
    if (f.n_context > 0) write_block("context", f.context_factors, f.n_context, NodeKind::User);
}

} // namespace hinmine
