#include "hinmine/walks.hpp"

#include <atomic>
#include <fstream>
#include <sstream>
#include <thread>

#include "hinmine/rng.hpp"

namespace hinmine {

namespace {

constexpr std::uint64_t kWalkTag = 0x57414c4bULL; // per-start-node stream tag

void walks_for_start(const HinGraph& g, const MetaPath& mp, const WalkParams& params,
                     std::uint32_t start, std::vector<std::vector<std::uint32_t>>& out) {
    Rng rng(mix_seed(params.seed, kWalkTag, start));
    std::size_t max_len = params.walk_length;
    if (!mp.tiles()) max_len = std::min<std::size_t>(max_len, mp.length());

    for (std::uint32_t w = 0; w < params.walks_per_node; ++w) {
        std::vector<std::uint32_t> walk{start};
        walk.reserve(max_len);
        std::uint32_t cur = start;
        for (std::size_t pos = 1; pos < max_len; ++pos) {
            NodeKind cur_kind = mp.kind_at(pos - 1);
            NodeKind next_kind = mp.kind_at(pos);
            EdgeKind ek = implied_edge_kind(cur_kind, next_kind);
            auto eligible = g.neighbors_both(cur, ek);
            if (eligible.empty()) break; // dead end: truncate
            cur = eligible[rng.bounded(eligible.size())];
            walk.push_back(cur);
        }
        out.push_back(std::move(walk));
    }
}

} // namespace

WalkCorpus generate_walks(const HinGraph& g, const MetaPath& mp, const WalkParams& params) {
    if (params.walks_per_node < 1 || params.walk_length < 1)
        throw ArgumentError("generate_walks: walks_per_node and walk_length must be positive");
    if (g.n_nodes() == 0) throw ArgumentError("generate_walks: empty graph");

    WalkCorpus corpus;
    corpus.metapath = mp;
    corpus.params = params;

    const auto& starts = g.members(mp.kinds.front());
    if (starts.empty()) {
        corpus.no_start_nodes = true;
        return corpus;
    }

    std::uint32_t workers = std::max<std::uint32_t>(1, params.workers);
    if (workers == 1) {
        for (std::uint32_t s : starts) walks_for_start(g, mp, params, s, corpus.walks);
        return corpus;
    }

    // Per-start streams make the result independent of the partitioning.
    std::vector<std::vector<std::vector<std::uint32_t>>> shards(starts.size());
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    for (std::uint32_t t = 0; t < workers; ++t) {
        pool.emplace_back([&] {
            for (;;) {
                std::size_t i = next.fetch_add(1);
                if (i >= starts.size()) return;
                walks_for_start(g, mp, params, starts[i], shards[i]);
            }
        });
    }
    for (auto& th : pool) th.join();
    for (auto& shard : shards)
        for (auto& walk : shard) corpus.walks.push_back(std::move(walk));
    return corpus;
}

void write_corpus(const std::filesystem::path& path, const WalkCorpus& corpus,
                  const HinGraph& g) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write corpus file " + path.string());
    out << "# metapath=" << corpus.metapath.to_string() << " walks_per_node="
        << corpus.params.walks_per_node << " walk_length=" << corpus.params.walk_length
        << " seed=" << corpus.params.seed << '\n';
    for (const auto& walk : corpus.walks) {
        for (std::size_t i = 0; i < walk.size(); ++i) {
            if (i) out << ' ';
            out << g.external_id(walk[i]);
        }
        out << '\n';
    }
}

WalkCorpus read_corpus(const std::filesystem::path& path, const HinGraph& g) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open corpus file " + path.string());

    WalkCorpus corpus;
    std::string line;
    if (!std::getline(in, line) || line.rfind("# metapath=", 0) != 0)
        throw ParseError(path.string() + ":1: expected corpus header '# metapath=...'");
    {
        std::istringstream hdr(line.substr(2));
        std::string field;
        while (hdr >> field) {
            auto eq = field.find('=');
            if (eq == std::string::npos) continue;
            std::string key = field.substr(0, eq), val = field.substr(eq + 1);
            if (key == "metapath") corpus.metapath = parse_metapath(val);
            else if (key == "walks_per_node") corpus.params.walks_per_node = std::stoul(val);
            else if (key == "walk_length") corpus.params.walk_length = std::stoul(val);
            else if (key == "seed") corpus.params.seed = std::stoull(val);
        }
    }
    if (corpus.metapath.kinds.empty())
        throw ParseError(path.string() + ":1: corpus header lacks metapath");

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        std::vector<std::uint32_t> walk;
        std::size_t pos = 0;
        while (ss >> tok) {
            if (!corpus.metapath.tiles() && pos >= corpus.metapath.length())
                throw ParseError(path.string() + ":" + std::to_string(lineno) +
                                 ": walk longer than non-tiling meta-path");
            NodeKind want = corpus.metapath.kind_at(pos);
            auto id = g.find(tok, want);
            if (!id)
                throw ReferenceError(path.string() + ":" + std::to_string(lineno) +
                                     ": unknown " + std::string(to_string(want)) + " '" + tok +
                                     "'");
            walk.push_back(*id);
            ++pos;
        }
        if (!walk.empty()) corpus.walks.push_back(std::move(walk));
    }
    return corpus;
}

} // namespace hinmine
