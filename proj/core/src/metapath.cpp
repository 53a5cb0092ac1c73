#include "hinmine/metapath.hpp"

#include <set>

namespace hinmine {

EdgeKind implied_edge_kind(NodeKind a, NodeKind b) {
    if (a == NodeKind::User && b == NodeKind::User) return EdgeKind::Follow;
    if (a != b) return EdgeKind::Donate;
    throw SchemaError("illegal meta-path step V-V: no video-video edge kind exists");
}

std::string MetaPath::to_string() const {
    std::string out;
    for (std::size_t i = 0; i < kinds.size(); ++i) {
        if (i) out += '-';
        out += kinds[i] == NodeKind::User ? 'U' : 'V';
    }
    return out;
}

MetaPath parse_metapath(const std::string& spec) {
    MetaPath mp;
    std::size_t start = 0;
    while (start <= spec.size()) {
        auto pos = spec.find('-', start);
        std::string tok = spec.substr(start, pos == std::string::npos ? pos : pos - start);
        if (tok == "U")
            mp.kinds.push_back(NodeKind::User);
        else if (tok == "V")
            mp.kinds.push_back(NodeKind::Video);
        else
            throw ParseError("meta-path '" + spec + "': unknown token '" + tok +
                             "' (expected U or V)");
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (mp.kinds.size() < 2)
        throw ArgumentError("meta-path '" + spec + "' must have at least 2 kinds");
    for (std::size_t i = 0; i + 1 < mp.kinds.size(); ++i)
        implied_edge_kind(mp.kinds[i], mp.kinds[i + 1]); // throws on V-V
    return mp;
}

std::vector<MetaPath> enumerate_sub_metapaths(const MetaPath& mp, std::size_t max_hops) {
    if (mp.kinds.size() < 2) throw ArgumentError("enumerate_sub_metapaths: meta-path too short");
    if (max_hops < 1) throw ArgumentError("enumerate_sub_metapaths: max_hops must be >= 1");

    std::size_t phases = mp.tiles() ? mp.period() : mp.kinds.size();
    std::set<std::string> seen;
    std::vector<MetaPath> out;
    for (std::size_t phase = 0; phase < phases; ++phase) {
        for (std::size_t h = 1; h <= max_hops; ++h) {
            if (!mp.tiles() && phase + h >= mp.kinds.size()) break;
            MetaPath sub;
            for (std::size_t i = 0; i <= h; ++i) sub.kinds.push_back(mp.kind_at(phase + i));
            if (seen.insert(sub.to_string()).second) out.push_back(std::move(sub));
        }
    }
    return out;
}

} // namespace hinmine
