#pragma once

#include <string>
#include <vector>

#include "hinmine/graph.hpp"

namespace hinmine {

/// A node-kind sequence constraining walk transitions, e.g. U-U-V-U-U.
/// Each adjacent pair implies an edge kind: U-U -> Follow, U-V / V-U ->
/// Donate. V-V is illegal (no video-video edges exist). When the first and
/// last kind coincide the path tiles cyclically under repetition; otherwise
/// walks stop at the end of the pattern.
struct MetaPath {
    std::vector<NodeKind> kinds;

    std::size_t length() const { return kinds.size(); }
    bool tiles() const { return kinds.size() >= 2 && kinds.front() == kinds.back(); }
    std::size_t period() const { return kinds.size() - 1; }

    /// Node kind required at walk position `i` under the tiling rule.
    NodeKind kind_at(std::size_t i) const {
        return tiles() ? kinds[i % period()] : kinds[i];
    }

    std::string to_string() const;

    bool operator==(const MetaPath&) const = default;
};

/// Edge kind implied by a legal adjacent node-kind pair.
EdgeKind implied_edge_kind(NodeKind a, NodeKind b);

/// Parses a dash-separated kind spec such as "U-U-V-U-U".
MetaPath parse_metapath(const std::string& spec);

/// All distinct contiguous sub-paths of 1..max_hops hops that a walk
/// following `mp` (tiled) can traverse. Used as the relation registry for
/// joint node/meta-path training.
std::vector<MetaPath> enumerate_sub_metapaths(const MetaPath& mp, std::size_t max_hops);

} // namespace hinmine
