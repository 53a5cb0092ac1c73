#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <unordered_set>
#include <vector>

#include "hinmine/graph.hpp"

namespace hinmine {

/// Binary interaction matrix stored as a coordinate list with a membership
/// index for negative-sampling rejection.
class SparseMatrix {
public:
    struct Entry {
        std::uint32_t row, col;
        double value;
    };

    SparseMatrix(std::uint32_t n_rows, std::uint32_t n_cols);

    void add(std::uint32_t row, std::uint32_t col, double value);
    bool contains(std::uint32_t row, std::uint32_t col) const;

    std::uint32_t n_rows() const { return n_rows_; }
    std::uint32_t n_cols() const { return n_cols_; }
    const std::vector<Entry>& entries() const { return entries_; }
    bool empty() const { return entries_.empty(); }

private:
    static std::uint64_t key(std::uint32_t r, std::uint32_t c) {
        return (static_cast<std::uint64_t>(r) << 32) | c;
    }
    std::uint32_t n_rows_, n_cols_;
    std::vector<Entry> entries_;
    std::unordered_set<std::uint64_t> index_;
};

/// Rows are users (kind index order). Donate -> columns are videos,
/// Follow -> columns are users. Entries are 1 iff at least one edge exists.
SparseMatrix build_interaction_matrix(const HinGraph& g, EdgeKind kind);

struct MfParams {
    std::uint32_t rank = 64;
    double reg = 0.01;
    double alpha = 0.5; // CMF only: weight of the user-video loss
    std::uint32_t epochs = 50;
    double learning_rate = 0.05;
    double neg_ratio = 4.0; // sampled zeros per positive per epoch
    std::uint64_t seed = 0;
};

struct Factors {
    std::uint32_t rank = 0;
    std::uint32_t n_rows = 0, n_cols = 0, n_context = 0;
    std::vector<double> row_factors;     // n_rows x rank
    std::vector<double> col_factors;     // n_cols x rank
    std::vector<double> context_factors; // CMF: n_context x rank (follow columns)

    std::span<const double> row(std::uint32_t i) const { return {row_factors.data() + std::size_t(i) * rank, rank}; }
    std::span<const double> col(std::uint32_t j) const { return {col_factors.data() + std::size_t(j) * rank, rank}; }
};

/// Squared-error matrix factorization on observed ones plus sampled zeros
/// (implicit feedback), by SGD with per-sample L2 regularization.
Factors train_pmf(const SparseMatrix& m, const MfParams& params);

/// Collective variant: minimizes
///   alpha * L(m_uv; U, V) + (1 - alpha) * L(m_uu; U, W)
/// with shared user factors U. With alpha = 1 this performs exactly the
/// same update sequence as train_pmf on m_uv.
Factors train_cmf(const SparseMatrix& m_uv, const SparseMatrix& m_uu, const MfParams& params);

double mf_score(const Factors& f, std::uint32_t user, std::uint32_t item);

/// Per-sample regularized squared loss used by the SGD updates:
///   0.5 * [(target - u.v)^2 + reg * (|u|^2 + |v|^2)]
/// Batch versions sum over samples; used by the gradient-check tests.
struct MfSample {
    std::uint32_t row, col;
    double target;
};
double mf_batch_loss(const Factors& f, std::span<const MfSample> samples, double reg,
                     bool context_cols = false);
/// Gradients w.r.t. all factor matrices, same layout as Factors.
void mf_batch_gradient(const Factors& f, std::span<const MfSample> samples, double reg,
                       bool context_cols, std::vector<double>& grad_rows,
                       std::vector<double>& grad_cols);

/// Embedding-style text serialization with role tag lines separating the
/// row/col/context blocks.
void write_factors(const std::filesystem::path& path, const Factors& f, const HinGraph& g,
                   NodeKind row_kind, NodeKind col_kind);

} // namespace hinmine
