#include "hinmine/embedding.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

#include "hinmine/rng.hpp"

namespace hinmine {

namespace {

constexpr std::uint64_t kInitTag = 0x454d4230ULL;
constexpr std::uint64_t kNegTag = 0x454d4231ULL;
constexpr std::uint64_t kRelTag = 0x454d4232ULL;
constexpr std::size_t kWalkBlock = 2048; // negative-stream granularity

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

/// log(1 + exp(x)) without overflow.
inline double softplus(double x) {
    return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

inline double dot(const double* a, const double* b, std::uint32_t dim) {
    double s = 0.0;
    for (std::uint32_t k = 0; k < dim; ++k) s += a[k] * b[k];
    return s;
}

void init_uniform(std::span<double> v, std::uint32_t dim, Rng& rng) {
    double half = 0.5 / static_cast<double>(dim);
    for (double& x : v) x = (2.0 * rng.next_double() - 1.0) * half;
}

/// Unigram^0.75 sampler over the nodes of one kind that occur in the corpus.
struct KindSampler {
    std::vector<std::uint32_t> ids;
    std::vector<double> cum;

    bool empty() const { return ids.empty(); }

    std::uint32_t sample(Rng& rng) const {
        double x = rng.next_double() * cum.back();
        auto it = std::upper_bound(cum.begin(), cum.end(), x);
        std::size_t i = std::min<std::size_t>(it - cum.begin(), ids.size() - 1);
        return ids[i];
    }
};

std::array<KindSampler, 2> build_unigram_samplers(const HinGraph& g, const WalkCorpus& corpus) {
    std::vector<std::uint64_t> counts(g.n_nodes(), 0);
    for (const auto& walk : corpus.walks)
        for (std::uint32_t id : walk) ++counts[id];
    std::array<KindSampler, 2> samplers;
    for (std::uint32_t id = 0; id < g.n_nodes(); ++id) {
        if (counts[id] == 0) continue;
        KindSampler& s = samplers[static_cast<int>(g.kind(id))];
        s.ids.push_back(id);
        double w = std::pow(static_cast<double>(counts[id]), 0.75);
        s.cum.push_back(s.cum.empty() ? w : s.cum.back() + w);
    }
    return samplers;
}

/// Linear decay to 10% of the initial rate over the scheduled updates.
inline double decayed_lr(double lr0, std::uint64_t t, std::uint64_t total) {
    double frac = total == 0 ? 0.0 : static_cast<double>(t) / static_cast<double>(total);
    return lr0 * std::max(0.1, 1.0 - 0.9 * frac);
}

} // namespace

EmbeddingSet::EmbeddingSet(std::uint32_t n_nodes, std::uint32_t dim, bool with_context)
    : n_(n_nodes), dim_(dim), center_(std::size_t(n_nodes) * dim, 0.0) {
    if (with_context) context_.assign(std::size_t(n_nodes) * dim, 0.0);
}

std::ptrdiff_t MetaPathEmbeddings::index_of(const MetaPath& mp) const {
    for (std::size_t i = 0; i < paths.size(); ++i)
        if (paths[i] == mp) return static_cast<std::ptrdiff_t>(i);
    return -1;
}

double sgns_loss_and_grad(std::span<const double> center, std::span<const double> context,
                          std::span<const std::span<const double>> negs,
                          std::vector<double>& grad_center, std::vector<double>& grad_context,
                          std::vector<std::vector<double>>& grad_negs) {
    std::uint32_t dim = static_cast<std::uint32_t>(center.size());
    if (context.size() != dim) throw ArgumentError("sgns: dimension mismatch");
    grad_center.assign(dim, 0.0);
    grad_context.assign(dim, 0.0);
    grad_negs.assign(negs.size(), std::vector<double>(dim, 0.0));

    double s = dot(center.data(), context.data(), dim);
    double loss = softplus(-s);
    double g = sigmoid(s) - 1.0;
    for (std::uint32_t k = 0; k < dim; ++k) {
        grad_center[k] += g * context[k];
        grad_context[k] += g * center[k];
    }
    for (std::size_t n = 0; n < negs.size(); ++n) {
        if (negs[n].size() != dim) throw ArgumentError("sgns: dimension mismatch");
        double sn = dot(center.data(), negs[n].data(), dim);
        loss += softplus(sn);
        double gn = sigmoid(sn);
        for (std::uint32_t k = 0; k < dim; ++k) {
            grad_center[k] += gn * negs[n][k];
            grad_negs[n][k] += gn * center[k];
        }
    }
    return loss;
}

double sgns_loss(std::span<const double> center, std::span<const double> context,
                 std::span<const std::span<const double>> negs) {
    std::uint32_t dim = static_cast<std::uint32_t>(center.size());
    double loss = softplus(-dot(center.data(), context.data(), dim));
    for (const auto& n : negs) loss += softplus(dot(center.data(), n.data(), dim));
    return loss;
}

EmbeddingSet train_metapath2vec(const HinGraph& g, const WalkCorpus& corpus,
                                const SgnsParams& params) {
    if (params.dim == 0) throw ArgumentError("train_metapath2vec: dim must be positive");
    if (params.negatives == 0) throw ArgumentError("train_metapath2vec: negatives must be positive");
    if (params.window == 0) throw ArgumentError("train_metapath2vec: window must be positive");
    if (corpus.walks.empty()) throw ArgumentError("train_metapath2vec: empty corpus");

    const std::uint32_t dim = params.dim;
    EmbeddingSet emb(static_cast<std::uint32_t>(g.n_nodes()), dim, /*with_context=*/true);
    {
        Rng init_rng(mix_seed(params.seed, kInitTag));
        for (std::uint32_t id = 0; id < g.n_nodes(); ++id)
            init_uniform(emb.center(id), dim, init_rng);
        // context starts at zero (word2vec convention)
    }

    auto samplers = build_unigram_samplers(g, corpus);

    // scheduled update count, for the lr decay
    std::uint64_t pairs_per_epoch = 0;
    for (const auto& walk : corpus.walks) {
        std::int64_t len = static_cast<std::int64_t>(walk.size());
        for (std::int64_t i = 0; i < len; ++i) {
            std::int64_t lo = std::max<std::int64_t>(0, i - params.window);
            std::int64_t hi = std::min<std::int64_t>(len - 1, i + params.window);
            pairs_per_epoch += static_cast<std::uint64_t>(hi - lo);
        }
    }
    const std::uint64_t total_updates = pairs_per_epoch * params.epochs;

    double* center = emb.center(0).data();
    double* context = emb.context(0).data();
    std::atomic<std::uint64_t> ticket{0};
    const std::size_t n_blocks = (corpus.walks.size() + kWalkBlock - 1) / kWalkBlock;

    auto run_block = [&](std::uint32_t epoch, std::size_t block, double& loss_out) {
        Rng rng(mix_seed(params.seed, kNegTag,
                         (static_cast<std::uint64_t>(epoch) << 32) | block));
        std::vector<double> grad_u(dim);
        std::size_t begin = block * kWalkBlock;
        std::size_t end = std::min(begin + kWalkBlock, corpus.walks.size());
        for (std::size_t wi = begin; wi < end; ++wi) {
            const auto& walk = corpus.walks[wi];
            std::int64_t len = static_cast<std::int64_t>(walk.size());
            for (std::int64_t i = 0; i < len; ++i) {
                double* u = center + std::size_t(walk[i]) * dim;
                std::int64_t lo = std::max<std::int64_t>(0, i - params.window);
                std::int64_t hi = std::min<std::int64_t>(len - 1, i + params.window);
                for (std::int64_t j = lo; j <= hi; ++j) {
                    if (j == i) continue;
                    std::uint64_t t = ticket.fetch_add(1, std::memory_order_relaxed);
                    double lr = decayed_lr(params.learning_rate, t, total_updates);
                    std::uint32_t ctx_node = walk[j];
                    double* v = context + std::size_t(ctx_node) * dim;
                    const KindSampler& sampler = samplers[static_cast<int>(g.kind(ctx_node))];

                    std::fill(grad_u.begin(), grad_u.end(), 0.0);
                    double s = dot(u, v, dim);
                    double gp = sigmoid(s) - 1.0;
                    loss_out += softplus(-s);
                    for (std::uint32_t k = 0; k < dim; ++k) {
                        grad_u[k] += gp * v[k];
                        v[k] -= lr * gp * u[k];
                    }
                    for (std::uint32_t nn = 0; nn < params.negatives; ++nn) {
                        std::uint32_t neg = sampler.sample(rng);
                        if (neg == ctx_node) continue; // skip label collisions
                        double* vn = context + std::size_t(neg) * dim;
                        double sn = dot(u, vn, dim);
                        double gn = sigmoid(sn);
                        loss_out += softplus(sn);
                        for (std::uint32_t k = 0; k < dim; ++k) {
                            grad_u[k] += gn * vn[k];
                            vn[k] -= lr * gn * u[k];
                        }
                    }
                    for (std::uint32_t k = 0; k < dim; ++k) u[k] -= lr * grad_u[k];
                }
            }
        }
    };

    const std::uint32_t workers = std::max<std::uint32_t>(1, params.workers);
    for (std::uint32_t epoch = 0; epoch < params.epochs; ++epoch) {
        double epoch_loss = 0.0;
        if (workers == 1) {
            for (std::size_t b = 0; b < n_blocks; ++b) run_block(epoch, b, epoch_loss);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<double> worker_loss(workers, 0.0);
            std::vector<std::thread> pool;
            for (std::uint32_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    for (;;) {
                        std::size_t b = next.fetch_add(1);
                        if (b >= n_blocks) return;
                        run_block(epoch, b, worker_loss[w]);
                    }
                });
            }
            for (auto& th : pool) th.join();
            for (double l : worker_loss) epoch_loss += l;
        }
        emb.epoch_mean_loss.push_back(pairs_per_epoch == 0
                                          ? 0.0
                                          : epoch_loss / static_cast<double>(pairs_per_epoch));
    }
    emb.trained_epochs = params.epochs;
    return emb;
}

double hin2vec_loss_and_grad(std::span<const double> x, std::span<const double> y,
                             std::span<const double> r, double target,
                             std::vector<double>& grad_x, std::vector<double>& grad_y,
                             std::vector<double>& grad_r) {
    std::uint32_t dim = static_cast<std::uint32_t>(x.size());
    if (y.size() != dim || r.size() != dim) throw ArgumentError("hin2vec: dimension mismatch");
    grad_x.assign(dim, 0.0);
    grad_y.assign(dim, 0.0);
    grad_r.assign(dim, 0.0);

    double s = 0.0;
    for (std::uint32_t k = 0; k < dim; ++k) s += x[k] * y[k] * sigmoid(r[k]);
    double p = sigmoid(s);
    double g = p - target;
    for (std::uint32_t k = 0; k < dim; ++k) {
        double sr = sigmoid(r[k]);
        grad_x[k] = g * y[k] * sr;
        grad_y[k] = g * x[k] * sr;
        grad_r[k] = g * x[k] * y[k] * sr * (1.0 - sr);
    }
    return target > 0.5 ? softplus(-s) : softplus(s);
}

double hin2vec_loss(std::span<const double> x, std::span<const double> y,
                    std::span<const double> r, double target) {
    std::uint32_t dim = static_cast<std::uint32_t>(x.size());
    double s = 0.0;
    for (std::uint32_t k = 0; k < dim; ++k) s += x[k] * y[k] * sigmoid(r[k]);
    return target > 0.5 ? softplus(-s) : softplus(s);
}

std::pair<EmbeddingSet, MetaPathEmbeddings> train_hin2vec(const HinGraph& g,
                                                          const std::vector<MetaPath>& metapaths,
                                                          const WalkCorpus& corpus,
                                                          const Hin2vecParams& params) {
    if (metapaths.empty()) throw ArgumentError("train_hin2vec: empty meta-path list");
    if (params.dim == 0) throw ArgumentError("train_hin2vec: dim must be positive");
    if (params.negatives == 0) throw ArgumentError("train_hin2vec: negatives must be positive");
    if (params.max_hops == 0) throw ArgumentError("train_hin2vec: max_hops must be positive");

    const std::uint32_t dim = params.dim;
    EmbeddingSet emb(static_cast<std::uint32_t>(g.n_nodes()), dim, /*with_context=*/false);
    MetaPathEmbeddings rels;
    rels.dim = dim;
    for (const MetaPath& mp : metapaths)
        if (rels.index_of(mp) < 0) rels.paths.push_back(mp);
    rels.vectors.assign(rels.paths.size() * dim, 0.0);

    {
        Rng init_rng(mix_seed(params.seed, kInitTag ^ kRelTag));
        for (std::uint32_t id = 0; id < g.n_nodes(); ++id)
            init_uniform(emb.center(id), dim, init_rng);
        // relation vectors start at zero: f(0) = 0.5 on every component
    }

    // relation lookup per (pattern phase, hop count); walks are traversed
    // in both directions, the reverse leg under the reversed relation
    const MetaPath& walk_mp = corpus.metapath;
    if (walk_mp.kinds.empty()) throw ArgumentError("train_hin2vec: corpus lacks a meta-path");
    std::size_t phases = walk_mp.tiles() ? walk_mp.period() : walk_mp.length();
    std::vector<std::vector<std::ptrdiff_t>> rel_lut(phases,
                                                     std::vector<std::ptrdiff_t>(params.max_hops, -1));
    std::vector<std::vector<std::ptrdiff_t>> rel_lut_rev(
        phases, std::vector<std::ptrdiff_t>(params.max_hops, -1));
    for (std::size_t phase = 0; phase < phases; ++phase) {
        for (std::uint32_t h = 1; h <= params.max_hops; ++h) {
            if (!walk_mp.tiles() && phase + h >= walk_mp.length()) break;
            MetaPath sub;
            for (std::uint32_t i = 0; i <= h; ++i) sub.kinds.push_back(walk_mp.kind_at(phase + i));
            MetaPath rev;
            rev.kinds.assign(sub.kinds.rbegin(), sub.kinds.rend());
            rel_lut[phase][h - 1] = rels.index_of(sub);
            rel_lut_rev[phase][h - 1] = rels.index_of(rev);
        }
    }

    std::uint64_t pairs_per_epoch = 0;
    for (const auto& walk : corpus.walks) {
        for (std::size_t i = 0; i < walk.size(); ++i) {
            std::size_t phase = phases == 0 ? 0 : i % phases;
            for (std::uint32_t h = 1; h <= params.max_hops && i + h < walk.size(); ++h) {
                if (rel_lut[phase][h - 1] >= 0) ++pairs_per_epoch;
                if (rel_lut_rev[phase][h - 1] >= 0) ++pairs_per_epoch;
            }
        }
    }
    const std::uint64_t total_updates = pairs_per_epoch * params.epochs;

    // corpus-frequency negatives, as in the skip-gram trainer
    auto samplers = build_unigram_samplers(g, corpus);

    double* nodes = g.n_nodes() ? emb.center(0).data() : nullptr;
    double* relv = rels.vectors.data();
    std::atomic<std::uint64_t> ticket{0};
    const std::size_t n_blocks = (corpus.walks.size() + kWalkBlock - 1) / kWalkBlock;

    auto run_sample = [&](double* x, double* y, double* r, double target, double lr,
                          std::vector<double>& gx, std::vector<double>& gy,
                          std::vector<double>& sr, double& loss_out) {
        double s = 0.0;
        for (std::uint32_t k = 0; k < dim; ++k) {
            sr[k] = sigmoid(r[k]);
            s += x[k] * y[k] * sr[k];
        }
        double p = sigmoid(s);
        double g = p - target;
        loss_out += target > 0.5 ? softplus(-s) : softplus(s);
        for (std::uint32_t k = 0; k < dim; ++k) {
            gx[k] = g * y[k] * sr[k];
            gy[k] = g * x[k] * sr[k];
            r[k] -= lr * g * x[k] * y[k] * sr[k] * (1.0 - sr[k]);
        }
        for (std::uint32_t k = 0; k < dim; ++k) {
            x[k] -= lr * gx[k];
            y[k] -= lr * gy[k];
        }
    };

    auto run_block = [&](std::uint32_t epoch, std::size_t block, double& loss_out) {
        Rng rng(mix_seed(params.seed, kRelTag,
                         (static_cast<std::uint64_t>(epoch) << 32) | block));
        std::vector<double> gx(dim), gy(dim), sr(dim);
        std::size_t begin = block * kWalkBlock;
        std::size_t end = std::min(begin + kWalkBlock, corpus.walks.size());
        for (std::size_t wi = begin; wi < end; ++wi) {
            const auto& walk = corpus.walks[wi];
            for (std::size_t i = 0; i < walk.size(); ++i) {
                std::size_t phase = i % phases;
                for (std::uint32_t h = 1; h <= params.max_hops && i + h < walk.size(); ++h) {
                    auto train_pair = [&](std::uint32_t xid, std::uint32_t yid,
                                          std::ptrdiff_t rel) {
                        if (rel < 0) return;
                        std::uint64_t t = ticket.fetch_add(1, std::memory_order_relaxed);
                        double lr = decayed_lr(params.learning_rate, t, total_updates);
                        double* x = nodes + std::size_t(xid) * dim;
                        double* r = relv + std::size_t(rel) * dim;
                        run_sample(x, nodes + std::size_t(yid) * dim, r, 1.0, lr, gx, gy, sr,
                                   loss_out);
                        const KindSampler& sampler = samplers[static_cast<int>(g.kind(yid))];
                        for (std::uint32_t nn = 0; nn < params.negatives; ++nn) {
                            std::uint32_t neg = sampler.sample(rng);
                            if (neg == yid) continue;
                            run_sample(x, nodes + std::size_t(neg) * dim, r, 0.0, lr, gx, gy,
                                       sr, loss_out);
                        }
                    };
                    train_pair(walk[i], walk[i + h], rel_lut[phase][h - 1]);
                    train_pair(walk[i + h], walk[i], rel_lut_rev[phase][h - 1]);
                }
            }
        }
    };

    const std::uint32_t workers = std::max<std::uint32_t>(1, params.workers);
    for (std::uint32_t epoch = 0; epoch < params.epochs; ++epoch) {
        double epoch_loss = 0.0;
        if (workers == 1) {
            for (std::size_t b = 0; b < n_blocks; ++b) run_block(epoch, b, epoch_loss);
        } else {
            std::atomic<std::size_t> next{0};
            std::vector<double> worker_loss(workers, 0.0);
            std::vector<std::thread> pool;
            for (std::uint32_t w = 0; w < workers; ++w) {
                pool.emplace_back([&, w] {
                    for (;;) {
                        std::size_t b = next.fetch_add(1);
                        if (b >= n_blocks) return;
                        run_block(epoch, b, worker_loss[w]);
                    }
                });
            }
            for (auto& th : pool) th.join();
            for (double l : worker_loss) epoch_loss += l;
        }
        emb.epoch_mean_loss.push_back(pairs_per_epoch == 0
                                          ? 0.0
                                          : epoch_loss / static_cast<double>(pairs_per_epoch));
    }
    emb.trained_epochs = params.epochs;
    return {std::move(emb), std::move(rels)};
}

std::vector<double> edge_feature(std::span<const double> u, std::span<const double> v,
                                 EdgeOp op) {
    if (u.size() != v.size())
        throw ArgumentError("edge_feature: dimension mismatch (" + std::to_string(u.size()) +
                            " vs " + std::to_string(v.size()) + ")");
    (void)op; // Hadamard is the only operator
    std::vector<double> out(u.size());
    for (std::size_t k = 0; k < u.size(); ++k) out[k] = u[k] * v[k];
    return out;
}

void write_embeddings(const std::filesystem::path& path, const EmbeddingSet& e,
                      const HinGraph& g) {
    if (e.n_nodes() != g.n_nodes())
        throw ArgumentError("write_embeddings: embedding/graph size mismatch");
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write embeddings file " + path.string());
    out << e.n_nodes() << ' ' << e.dim() << '\n';
    char buf[32];
    for (std::uint32_t id = 0; id < e.n_nodes(); ++id) {
        out << g.external_id(id);
        for (double x : e.center(id)) {
            std::snprintf(buf, sizeof(buf), " %.9g", x);
            out << buf;
        }
        out << '\n';
    }
}

EmbeddingSet read_embeddings(const std::filesystem::path& path, const HinGraph& g) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open embeddings file " + path.string());
    std::size_t count = 0;
    std::uint32_t dim = 0;
    if (!(in >> count >> dim) || dim == 0)
        throw ParseError(path.string() + ":1: expected '<count> <dim>' header");
    if (count != g.n_nodes())
        throw ReferenceError(path.string() + ": embedding count " + std::to_string(count) +
                             " does not match graph size " + std::to_string(g.n_nodes()));

    EmbeddingSet e(static_cast<std::uint32_t>(g.n_nodes()), dim, /*with_context=*/false);
    std::vector<bool> seen(g.n_nodes(), false);
    std::unordered_map<std::string, int> occurrences;
    for (std::size_t i = 0; i < count; ++i) {
        std::string ext;
        if (!(in >> ext)) throw ParseError(path.string() + ": truncated embeddings file");
        auto as_user = g.find(ext, NodeKind::User);
        auto as_video = g.find(ext, NodeKind::Video);
        std::uint32_t id;
        if (as_user && as_video) {
            // ambiguous external id: lines appear in internal-id order
            int n = occurrences[ext]++;
            std::uint32_t lo = std::min(*as_user, *as_video);
            std::uint32_t hi = std::max(*as_user, *as_video);
            id = n == 0 ? lo : hi;
        } else if (as_user || as_video) {
            id = as_user ? *as_user : *as_video;
        } else {
            throw ReferenceError(path.string() + ": unknown node '" + ext + "'");
        }
        if (seen[id]) throw ParseError(path.string() + ": duplicate embedding for '" + ext + "'");
        seen[id] = true;
        auto vec = e.center(id);
        for (std::uint32_t k = 0; k < dim; ++k) {
            if (!(in >> vec[k]))
                throw ParseError(path.string() + ": truncated vector for '" + ext + "'");
        }
    }
    return e;
}

void write_metapath_embeddings(const std::filesystem::path& path, const MetaPathEmbeddings& e) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write meta-path embeddings file " + path.string());
    out << e.paths.size() << ' ' << e.dim << '\n';
    char buf[32];
    for (std::size_t i = 0; i < e.paths.size(); ++i) {
        out << e.paths[i].to_string();
        for (double x : e.vector(i)) {
            std::snprintf(buf, sizeof(buf), " %.9g", x);
            out << buf;
        }
        out << '\n';
    }
}

} // namespace hinmine
