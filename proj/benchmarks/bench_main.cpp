#include <benchmark/benchmark.h>

#include "hinmine/embedding.hpp"
#include "hinmine/forest.hpp"
#include "hinmine/rng.hpp"
#include "hinmine/stats.hpp"
#include "hinmine/synth.hpp"
#include "hinmine/tasks.hpp"
#include "hinmine/walks.hpp"

namespace {

using namespace hinmine;

const HinGraph& bench_graph() {
    static HinGraph g = [] {
        SynthConfig c;
        c.n_users = 4000;
        c.n_videos = 200;
        c.n_communities = 40;
        c.donation_volume = 8000;
        c.seed = 1;
        SynthData d = generate_synth(c);
        return HinGraph::build(std::move(d.nodes), std::move(d.edges));
    }();
    return g;
}

void BM_GenerateWalks(benchmark::State& state) {
    const HinGraph& g = bench_graph();
    MetaPath mp = parse_metapath("U-U-V-U-U");
    WalkParams p{.walks_per_node = 2, .walk_length = 40, .seed = 3,
                 .workers = static_cast<std::uint32_t>(state.range(0))};
    for (auto _ : state) {
        WalkCorpus corpus = generate_walks(g, mp, p);
        benchmark::DoNotOptimize(corpus.walks.size());
    }
}
BENCHMARK(BM_GenerateWalks)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond);

void BM_SgnsEpoch(benchmark::State& state) {
    const HinGraph& g = bench_graph();
    WalkParams wp{.walks_per_node = 2, .walk_length = 30, .seed = 3};
    WalkCorpus corpus = generate_walks(g, parse_metapath("U-U-V-U-U"), wp);
    SgnsParams sp{.dim = static_cast<std::uint32_t>(state.range(0)), .window = 4,
                  .negatives = 4, .epochs = 1, .seed = 3};
    for (auto _ : state) {
        EmbeddingSet emb = train_metapath2vec(g, corpus, sp);
        benchmark::DoNotOptimize(emb.center(0).data());
    }
}
BENCHMARK(BM_SgnsEpoch)->Arg(48)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_Hin2vecEpoch(benchmark::State& state) {
    const HinGraph& g = bench_graph();
    MetaPath mp = parse_metapath("U-U-V-U-U");
    WalkParams wp{.walks_per_node = 2, .walk_length = 30, .seed = 3};
    WalkCorpus corpus = generate_walks(g, mp, wp);
    Hin2vecParams hp{.dim = 48, .negatives = 3, .epochs = 1, .max_hops = 4, .seed = 3};
    auto registry = enumerate_sub_metapaths(mp, 4);
    for (auto _ : state) {
        auto [emb, rels] = train_hin2vec(g, registry, corpus, hp);
        benchmark::DoNotOptimize(emb.center(0).data());
    }
}
BENCHMARK(BM_Hin2vecEpoch)->Unit(benchmark::kMillisecond);

void BM_ForestTrain(benchmark::State& state) {
    Rng rng(9);
    FeatureTable t;
    for (int c = 0; c < 32; ++c) t.columns.push_back("f" + std::to_string(c));
    for (int r = 0; r < 5000; ++r) {
        std::vector<double> row(32);
        for (double& x : row) x = rng.gaussian();
        t.add_row("r" + std::to_string(r), row, row[3] + row[7] > 0 ? 1 : 0);
    }
    ForestParams p{.n_trees = static_cast<std::uint32_t>(state.range(0)), .max_depth = 12,
                   .seed = 4};
    for (auto _ : state) {
        ForestModel m = train_forest(t, p);
        benchmark::DoNotOptimize(m.trees.size());
    }
}
BENCHMARK(BM_ForestTrain)->Arg(10)->Arg(30)->Unit(benchmark::kMillisecond);

void BM_ForestPredict(benchmark::State& state) {
    Rng rng(9);
    FeatureTable t;
    for (int c = 0; c < 32; ++c) t.columns.push_back("f" + std::to_string(c));
    for (int r = 0; r < 20000; ++r) {
        std::vector<double> row(32);
        for (double& x : row) x = rng.gaussian();
        t.add_row("r" + std::to_string(r), row, row[3] + row[7] > 0 ? 1 : 0);
    }
    ForestParams p{.n_trees = 30, .max_depth = 12, .seed = 4};
    ForestModel m = train_forest(t, p);
    for (auto _ : state) {
        std::vector<double> scores = forest_predict(m, t);
        benchmark::DoNotOptimize(scores.data());
    }
}
BENCHMARK(BM_ForestPredict)->Unit(benchmark::kMillisecond);

void BM_Auc(benchmark::State& state) {
    Rng rng(5);
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 100000; ++i) {
        scores.push_back(static_cast<double>(rng.bounded(1000)));
        labels.push_back(static_cast<std::uint8_t>(rng.bounded(2)));
    }
    for (auto _ : state) benchmark::DoNotOptimize(auc(scores, labels));
}
BENCHMARK(BM_Auc)->Unit(benchmark::kMillisecond);

void BM_SpearmanRcc(benchmark::State& state) {
    Rng rng(6);
    std::vector<double> x, y;
    for (int i = 0; i < 100000; ++i) {
        x.push_back(static_cast<double>(rng.bounded(500)));
        y.push_back(static_cast<double>(rng.bounded(500)));
    }
    for (auto _ : state) benchmark::DoNotOptimize(spearman_rcc(x, y));
}
BENCHMARK(BM_SpearmanRcc)->Unit(benchmark::kMillisecond);

void BM_KHopCandidates(benchmark::State& state) {
    const HinGraph& g = bench_graph();
    const std::vector<std::uint32_t>& videos = g.members(NodeKind::Video);
    for (auto _ : state) {
        std::size_t total = 0;
        for (std::uint32_t v : videos) total += g.k_hop_candidates(v, 2, true).size();
        benchmark::DoNotOptimize(total);
    }
}
BENCHMARK(BM_KHopCandidates)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
