#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hinmine/errors.hpp"

namespace hinmine {

enum class NodeKind : std::uint8_t { User = 0, Video = 1 };
enum class EdgeKind : std::uint8_t { Follow = 0, Donate = 1 };
enum class Direction : std::uint8_t { Out, In, Both };

inline const char* to_string(NodeKind k) { return k == NodeKind::User ? "User" : "Video"; }
inline const char* to_string(EdgeKind k) { return k == EdgeKind::Follow ? "Follow" : "Donate"; }

/// Named nonnegative-integer node attributes. Ordered map keeps
/// serialization deterministic.
using AttrMap = std::map<std::string, std::uint64_t>;

struct NodeRecord {
    std::string external_id;
    NodeKind kind;
    AttrMap attrs;
};

/// Typed edge. Timestamps are epoch-days; 0 marks an untimed follow.
/// Weight is the donation count for Donate edges and 1.0 for follows.
struct Edge {
    std::uint32_t src = 0;
    std::uint32_t dst = 0;
    EdgeKind kind = EdgeKind::Follow;
    double weight = 1.0;
    std::int64_t timestamp = 0;

    bool operator==(const Edge&) const = default;
};

/// Node table with dense 0-based internal ids assigned in insertion order.
/// (external_id, kind) pairs are unique; the same external id may name both
/// a user and a video.
class NodeTable {
public:
    /// Appends a node; throws ConflictError on duplicate (external_id, kind).
    std::uint32_t add(std::string external_id, NodeKind kind, AttrMap attrs = {});

    std::optional<std::uint32_t> find(const std::string& external_id, NodeKind kind) const;

    /// Resolves an external id for an edge endpoint that must have
    /// `expected` kind. If the id exists only under the other kind the
    /// caller gets that node back so it can report a kind violation.
    std::optional<std::uint32_t> resolve(const std::string& external_id, NodeKind expected) const;

    std::size_t size() const { return records_.size(); }
    bool empty() const { return records_.empty(); }
    const NodeRecord& operator[](std::uint32_t id) const { return records_[id]; }
    const std::vector<NodeRecord>& records() const { return records_; }

private:
    std::vector<NodeRecord> records_;
    // slot per kind: index into records_ or -1
    std::unordered_map<std::string, std::array<std::int64_t, 2>> by_external_;
};

/// Donation events observed after a snapshot cutoff, used as labels and
/// recommendation ground truth.
struct LabelWindow {
    std::int64_t cutoff = 0;
    std::int64_t horizon_days = 0;
    std::vector<Edge> events;                      // cutoff < t <= cutoff + horizon
    std::map<std::uint32_t, std::uint32_t> counts; // per-video event count
    std::uint64_t dropped_past_horizon = 0;
    std::uint64_t dropped_missing_endpoint = 0;
};

/// Immutable typed heterogeneous graph over User and Video nodes with
/// Follow (user-user) and Donate (user-video) edges. Parallel Donate edges
/// are kept as distinct events in the edge multiset; adjacency collapses
/// them for neighbor queries. Safe for concurrent reads once built.
class HinGraph {
public:
    HinGraph() = default;

    static HinGraph build(NodeTable nodes, std::vector<Edge> edges);

    std::size_t n_nodes() const { return nodes_.size(); }
    std::size_t n_of_kind(NodeKind k) const { return kind_members_[static_cast<int>(k)].size(); }
    std::uint64_t edge_count(EdgeKind k) const { return edge_count_[static_cast<int>(k)]; }

    const NodeTable& nodes() const { return nodes_; }
    const NodeRecord& node(std::uint32_t id) const;
    NodeKind kind(std::uint32_t id) const { return nodes_[id].kind; }
    const std::string& external_id(std::uint32_t id) const { return nodes_[id].external_id; }
    std::optional<std::uint32_t> find(const std::string& external_id, NodeKind k) const {
        return nodes_.find(external_id, k);
    }

    /// Dense index of a node within its kind (0-based, id order).
    std::uint32_t kind_index(std::uint32_t id) const { return kind_index_[id]; }
    /// Inverse of kind_index.
    std::uint32_t node_of_kind(NodeKind k, std::uint32_t idx) const {
        return kind_members_[static_cast<int>(k)][idx];
    }
    const std::vector<std::uint32_t>& members(NodeKind k) const {
        return kind_members_[static_cast<int>(k)];
    }

    const std::vector<Edge>& edges() const { return edges_; }

    std::size_t degree(std::uint32_t id, EdgeKind k, Direction dir) const;

    /// Distinct neighbors of `id` over edges of `kind` (or both kinds when
    /// nullopt), in ascending internal-id order.
    std::vector<std::uint32_t> typed_neighbors(std::uint32_t id, std::optional<EdgeKind> kind,
                                               Direction dir) const;

    /// Precomputed undirected neighbor list for one edge kind. Sorted,
    /// multiplicity collapsed. This is the walk-transition fast path.
    std::span<const std::uint32_t> neighbors_both(std::uint32_t id, EdgeKind k) const;
    std::span<const std::uint32_t> neighbors_dir(std::uint32_t id, EdgeKind k, Direction dir) const;

    /// Users within `k` undirected hops of `video` over both edge kinds.
    /// Never contains the video's own id; with `exclude_existing_donors`
    /// users that already donated to the video are removed. Sorted.
    std::vector<std::uint32_t> k_hop_candidates(std::uint32_t video, std::uint32_t k,
                                                bool exclude_existing_donors) const;

    /// Splits into a snapshot graph (edges with t <= cutoff; untimed follows
    /// always kept) and the label window (Donate events with
    /// cutoff < t <= cutoff + horizon). The node universe is unchanged.
    std::pair<HinGraph, LabelWindow> snapshot_split(std::int64_t cutoff,
                                                    std::int64_t horizon_days) const;

private:
    struct Adjacency {
        // indexed by EdgeKind
        std::vector<std::uint32_t> out[2], in[2], both[2];
    };

    void check_node(std::uint32_t id) const;

    NodeTable nodes_;
    std::vector<Edge> edges_;
    std::vector<Adjacency> adj_;
    std::vector<std::uint32_t> kind_index_;
    std::vector<std::uint32_t> kind_members_[2];
    std::uint64_t edge_count_[2] = {0, 0};
};

/// Reads the node file format: `external_id,kind,attrs-as-JSON-object`,
/// one node per line, `#` comments and blank lines allowed.
NodeTable ingest_nodes(const std::filesystem::path& path);

/// Reads the edge file format: `src_external,dst_external,kind,weight,timestamp`.
/// Endpoints must exist in `nodes`; edge kinds are validated against the
/// node kinds (Follow: user->user, Donate: user->video), self-follows are
/// rejected, follow weights are normalized to 1.0.
std::vector<Edge> ingest_edges(const std::filesystem::path& path, const NodeTable& nodes);

void write_nodes(const std::filesystem::path& path, const NodeTable& nodes);
void write_edges(const std::filesystem::path& path, std::span<const Edge> edges,
                 const NodeTable& nodes);

} // namespace hinmine
