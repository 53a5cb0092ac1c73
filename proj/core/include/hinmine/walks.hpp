#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hinmine/graph.hpp"
#include "hinmine/metapath.hpp"

namespace hinmine {

struct WalkParams {
    std::uint32_t walks_per_node = 10;
    std::uint32_t walk_length = 80;
    std::uint64_t seed = 0;
    std::uint32_t workers = 1;
};

/// Meta-path-guided walk corpus. Every walk position conforms to the tiled
/// meta-path; walks truncate at dead ends. Generation derives one random
/// stream per start node from (seed, node id), so the corpus is identical
/// for any worker count.
struct WalkCorpus {
    MetaPath metapath;
    WalkParams params;
    std::vector<std::vector<std::uint32_t>> walks;
    bool no_start_nodes = false; // warning flag: nothing matched metapath[0]
};

WalkCorpus generate_walks(const HinGraph& g, const MetaPath& mp, const WalkParams& params);

/// Text serialization: a `#` header line with metapath/seed/parameters,
/// then one walk per line as space-separated external ids.
void write_corpus(const std::filesystem::path& path, const WalkCorpus& corpus,
                  const HinGraph& g);
WalkCorpus read_corpus(const std::filesystem::path& path, const HinGraph& g);

} // namespace hinmine
