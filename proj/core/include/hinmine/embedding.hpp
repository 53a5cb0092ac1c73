#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "hinmine/graph.hpp"
#include "hinmine/metapath.hpp"
#include "hinmine/walks.hpp"

namespace hinmine {

/// Dense vectors per node. Center vectors are the embedding proper; the
/// context table is the skip-gram output side (empty for trainers that use
/// a single table).
class EmbeddingSet {
public:
    EmbeddingSet() = default;
    EmbeddingSet(std::uint32_t n_nodes, std::uint32_t dim, bool with_context);

    std::uint32_t dim() const { return dim_; }
    std::uint32_t n_nodes() const { return n_; }
    bool has_context() const { return !context_.empty(); }

    std::span<double> center(std::uint32_t id) { return {center_.data() + std::size_t(id) * dim_, dim_}; }
    std::span<const double> center(std::uint32_t id) const { return {center_.data() + std::size_t(id) * dim_, dim_}; }
    std::span<double> context(std::uint32_t id) { return {context_.data() + std::size_t(id) * dim_, dim_}; }
    std::span<const double> context(std::uint32_t id) const { return {context_.data() + std::size_t(id) * dim_, dim_}; }

    std::uint32_t trained_epochs = 0;
    std::vector<double> epoch_mean_loss; // one entry per trained epoch

private:
    std::uint32_t n_ = 0, dim_ = 0;
    std::vector<double> center_, context_;
};

struct MetaPathEmbeddings {
    std::uint32_t dim = 0;
    std::vector<MetaPath> paths;
    std::vector<double> vectors; // paths.size() x dim

    std::span<const double> vector(std::size_t i) const { return {vectors.data() + i * dim, dim}; }
    std::span<double> vector(std::size_t i) { return {vectors.data() + i * dim, dim}; }
    std::ptrdiff_t index_of(const MetaPath& mp) const;
};

struct SgnsParams {
    std::uint32_t dim = 128;
    std::uint32_t window = 5;
    std::uint32_t negatives = 5;
    std::uint32_t epochs = 5;
    double learning_rate = 0.025;
    std::uint64_t seed = 0;
    std::uint32_t workers = 1;
};

/// Skip-gram with negative sampling over a meta-path walk corpus.
/// Negatives come from the unigram^0.75 distribution restricted to the
/// context node's kind; the learning rate decays linearly to 10% of the
/// initial value. Bit-deterministic at workers == 1.
EmbeddingSet train_metapath2vec(const HinGraph& g, const WalkCorpus& corpus,
                                const SgnsParams& params);

struct Hin2vecParams {
    std::uint32_t dim = 128;
    std::uint32_t negatives = 5;
    std::uint32_t epochs = 5;
    std::uint32_t max_hops = 4; // window over walk positions
    double learning_rate = 0.025;
    std::uint64_t seed = 0;
    std::uint32_t workers = 1;
};

/// Joint node/meta-path training: binary logistic loss on
/// P(r | x, y) = sigmoid( sum_k x_k * y_k * sigmoid(r_k) ), positives from
/// walk co-occurrences whose kind sequence matches a registered meta-path,
/// negatives replacing y with a random node of the same kind.
std::pair<EmbeddingSet, MetaPathEmbeddings> train_hin2vec(const HinGraph& g,
                                                          const std::vector<MetaPath>& metapaths,
                                                          const WalkCorpus& corpus,
                                                          const Hin2vecParams& params);

enum class EdgeOp { Hadamard };

/// Componentwise product feature for a node pair.
std::vector<double> edge_feature(std::span<const double> u, std::span<const double> v,
                                 EdgeOp op = EdgeOp::Hadamard);

// -- loss kernels (shared by the trainers and the gradient-check tests) --

/// SGNS pair loss and gradients. negs are context vectors of the sampled
/// negatives. Gradient buffers are resized to match.
double sgns_loss_and_grad(std::span<const double> center, std::span<const double> context,
                          std::span<const std::span<const double>> negs,
                          std::vector<double>& grad_center, std::vector<double>& grad_context,
                          std::vector<std::vector<double>>& grad_negs);
double sgns_loss(std::span<const double> center, std::span<const double> context,
                 std::span<const std::span<const double>> negs);

/// HIN2vec sample loss and gradients for target t in {0, 1}.
double hin2vec_loss_and_grad(std::span<const double> x, std::span<const double> y,
                             std::span<const double> r, double target,
                             std::vector<double>& grad_x, std::vector<double>& grad_y,
                             std::vector<double>& grad_r);
double hin2vec_loss(std::span<const double> x, std::span<const double> y,
                    std::span<const double> r, double target);

/// word2vec-style text format: `<count> <dim>` header, then one line per
/// node: external id followed by the center vector.
void write_embeddings(const std::filesystem::path& path, const EmbeddingSet& e,
                      const HinGraph& g);
EmbeddingSet read_embeddings(const std::filesystem::path& path, const HinGraph& g);

void write_metapath_embeddings(const std::filesystem::path& path, const MetaPathEmbeddings& e);

} // namespace hinmine
