#include "hinmine/graph.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <sstream>

#include <json.hpp>

namespace hinmine {

namespace {

std::string loc(const std::filesystem::path& path, std::size_t line) {
    return path.string() + ":" + std::to_string(line);
}

std::string strip_cr(std::string s) {
    if (!s.empty() && s.back() == '\r') s.pop_back();
    return s;
}

bool is_blank_or_comment(const std::string& s) {
    for (char c : s) {
        if (c == '#') return true;
        if (!std::isspace(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

NodeKind parse_node_kind(const std::string& tok, const std::string& where) {
    if (tok == "User") return NodeKind::User;
    if (tok == "Video") return NodeKind::Video;
    throw ParseError(where + ": unknown node kind '" + tok + "' (expected User or Video)");
}

EdgeKind parse_edge_kind(const std::string& tok, const std::string& where) {
    if (tok == "Follow") return EdgeKind::Follow;
    if (tok == "Donate") return EdgeKind::Donate;
    throw ParseError(where + ": unknown edge kind '" + tok + "' (expected Follow or Donate)");
}

void validate_external_id(const std::string& id, const std::string& where) {
    if (id.empty()) throw ParseError(where + ": empty external id");
    for (char c : id) {
        if (std::isspace(static_cast<unsigned char>(c)) || c == ',')
            throw ParseError(where + ": external id '" + id +
                             "' may not contain whitespace or commas");
    }
}

std::vector<std::uint32_t> merge_sorted_unique(std::span<const std::uint32_t> a,
                                               std::span<const std::uint32_t> b) {
    std::vector<std::uint32_t> out;
    out.reserve(a.size() + b.size());
    std::set_union(a.begin(), a.end(), b.begin(), b.end(), std::back_inserter(out));
    return out;
}

void sort_unique(std::vector<std::uint32_t>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
}

} // namespace

std::uint32_t NodeTable::add(std::string external_id, NodeKind kind, AttrMap attrs) {
    auto& slots = by_external_.try_emplace(external_id, std::array<std::int64_t, 2>{-1, -1})
                      .first->second;
    auto& slot = slots[static_cast<int>(kind)];
    if (slot >= 0)
        throw ConflictError("duplicate node (" + external_id + ", " +
                            std::string(to_string(kind)) + ")");
    std::uint32_t id = static_cast<std::uint32_t>(records_.size());
    slot = id;
    records_.push_back(NodeRecord{std::move(external_id), kind, std::move(attrs)});
    return id;
}

std::optional<std::uint32_t> NodeTable::find(const std::string& external_id, NodeKind kind) const {
    auto it = by_external_.find(external_id);
    if (it == by_external_.end()) return std::nullopt;
    std::int64_t slot = it->second[static_cast<int>(kind)];
    if (slot < 0) return std::nullopt;
    return static_cast<std::uint32_t>(slot);
}

std::optional<std::uint32_t> NodeTable::resolve(const std::string& external_id,
                                                NodeKind expected) const {
    auto it = by_external_.find(external_id);
    if (it == by_external_.end()) return std::nullopt;
    std::int64_t slot = it->second[static_cast<int>(expected)];
    if (slot >= 0) return static_cast<std::uint32_t>(slot);
    std::int64_t other = it->second[1 - static_cast<int>(expected)];
    if (other >= 0) return static_cast<std::uint32_t>(other);
    return std::nullopt;
}

HinGraph HinGraph::build(NodeTable nodes, std::vector<Edge> edges) {
    HinGraph g;
    g.nodes_ = std::move(nodes);
    g.edges_ = std::move(edges);

    std::size_t n = g.nodes_.size();
    g.adj_.resize(n);
    g.kind_index_.resize(n);
    for (std::uint32_t id = 0; id < n; ++id) {
        int k = static_cast<int>(g.nodes_[id].kind);
        g.kind_index_[id] = static_cast<std::uint32_t>(g.kind_members_[k].size());
        g.kind_members_[k].push_back(id);
    }

    for (const Edge& e : g.edges_) {
        if (e.src >= n || e.dst >= n)
            throw ReferenceError("edge endpoint out of range");
        int k = static_cast<int>(e.kind);
        g.adj_[e.src].out[k].push_back(e.dst);
        g.adj_[e.dst].in[k].push_back(e.src);
        ++g.edge_count_[k];
    }
    for (auto& a : g.adj_) {
        for (int k = 0; k < 2; ++k) {
            sort_unique(a.out[k]);
            sort_unique(a.in[k]);
            a.both[k] = merge_sorted_unique(a.out[k], a.in[k]);
        }
    }
    return g;
}

const NodeRecord& HinGraph::node(std::uint32_t id) const {
    check_node(id);
    return nodes_[id];
}

void HinGraph::check_node(std::uint32_t id) const {
    if (id >= nodes_.size())
        throw NotFoundError("unknown node id " + std::to_string(id));
}

std::size_t HinGraph::degree(std::uint32_t id, EdgeKind k, Direction dir) const {
    check_node(id);
    const auto& a = adj_[id];
    int ki = static_cast<int>(k);
    switch (dir) {
        case Direction::Out: return a.out[ki].size();
        case Direction::In: return a.in[ki].size();
        default: return a.both[ki].size();
    }
}

std::span<const std::uint32_t> HinGraph::neighbors_both(std::uint32_t id, EdgeKind k) const {
    return adj_[id].both[static_cast<int>(k)];
}

std::span<const std::uint32_t> HinGraph::neighbors_dir(std::uint32_t id, EdgeKind k,
                                                       Direction dir) const {
    const auto& a = adj_[id];
    int ki = static_cast<int>(k);
    switch (dir) {
        case Direction::Out: return a.out[ki];
        case Direction::In: return a.in[ki];
        default: return a.both[ki];
    }
}

std::vector<std::uint32_t> HinGraph::typed_neighbors(std::uint32_t id,
                                                     std::optional<EdgeKind> kind,
                                                     Direction dir) const {
    check_node(id);
    if (kind) {
        auto s = neighbors_dir(id, *kind, dir);
        return {s.begin(), s.end()};
    }
    return merge_sorted_unique(neighbors_dir(id, EdgeKind::Follow, dir),
                               neighbors_dir(id, EdgeKind::Donate, dir));
}

std::vector<std::uint32_t> HinGraph::k_hop_candidates(std::uint32_t video, std::uint32_t k,
                                                      bool exclude_existing_donors) const {
    check_node(video);
    if (kind(video) != NodeKind::Video)
        throw ArgumentError("k_hop_candidates requires a Video node, got User '" +
                            external_id(video) + "'");
    if (k < 1) throw ArgumentError("k_hop_candidates requires k >= 1");

    std::vector<std::int32_t> dist(nodes_.size(), -1);
    std::deque<std::uint32_t> queue{video};
    dist[video] = 0;
    std::vector<std::uint32_t> users;
    while (!queue.empty()) {
        std::uint32_t cur = queue.front();
        queue.pop_front();
        if (static_cast<std::uint32_t>(dist[cur]) >= k) continue;
        for (int ek = 0; ek < 2; ++ek) {
            for (std::uint32_t nb : adj_[cur].both[ek]) {
                if (dist[nb] >= 0) continue;
                dist[nb] = dist[cur] + 1;
                if (kind(nb) == NodeKind::User) users.push_back(nb);
                queue.push_back(nb);
            }
        }
    }
    if (exclude_existing_donors) {
        const auto& donors = adj_[video].in[static_cast<int>(EdgeKind::Donate)];
        std::erase_if(users, [&](std::uint32_t u) {
            return std::binary_search(donors.begin(), donors.end(), u);
        });
    }
    std::sort(users.begin(), users.end());
    return users;
}

std::pair<HinGraph, LabelWindow> HinGraph::snapshot_split(std::int64_t cutoff,
                                                          std::int64_t horizon_days) const {
    if (horizon_days < 1) throw ArgumentError("snapshot_split requires horizon_days >= 1");

    std::vector<Edge> kept;
    LabelWindow window;
    window.cutoff = cutoff;
    window.horizon_days = horizon_days;
    for (const Edge& e : edges_) {
        if (e.kind == EdgeKind::Follow) {
            // untimed follows (t == 0) belong to every snapshot
            if (e.timestamp == 0 || e.timestamp <= cutoff) kept.push_back(e);
            continue;
        }
        if (e.timestamp <= cutoff) {
            kept.push_back(e);
        } else if (e.timestamp <= cutoff + horizon_days) {
            if (e.src >= nodes_.size() || e.dst >= nodes_.size()) {
                ++window.dropped_missing_endpoint;
                continue;
            }
            window.events.push_back(e);
            ++window.counts[e.dst];
        } else {
            ++window.dropped_past_horizon;
        }
    }
    return {HinGraph::build(nodes_, std::move(kept)), std::move(window)};
}

NodeTable ingest_nodes(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open node file " + path.string());

    NodeTable table;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = strip_cr(raw);
        if (is_blank_or_comment(line)) continue;
        const std::string where = loc(path, lineno);

        auto c1 = line.find(',');
        auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos)
            throw ParseError(where + ": expected 'external_id,kind,attrs-json'");
        std::string ext = line.substr(0, c1);
        std::string kind_tok = line.substr(c1 + 1, c2 - c1 - 1);
        std::string attrs_json = line.substr(c2 + 1);

        validate_external_id(ext, where);
        NodeKind kind = parse_node_kind(kind_tok, where);

        nlohmann::json j = nlohmann::json::parse(attrs_json, nullptr, false);
        if (j.is_discarded() || !j.is_object())
            throw ParseError(where + ": attributes must be a JSON object");
        AttrMap attrs;
        for (auto& [key, val] : j.items()) {
            if (!val.is_number_integer() || val.get<std::int64_t>() < 0)
                throw ParseError(where + ": attribute '" + key +
                                 "' must be a nonnegative integer");
            attrs[key] = val.get<std::uint64_t>();
        }

        try {
            table.add(std::move(ext), kind, std::move(attrs));
        } catch (const ConflictError& e) {
            throw ConflictError(where + ": " + e.what());
        }
    }
    return table;
}

std::vector<Edge> ingest_edges(const std::filesystem::path& path, const NodeTable& nodes) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open edge file " + path.string());

    std::vector<Edge> edges;
    std::string raw;
    std::size_t lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        std::string line = strip_cr(raw);
        if (is_blank_or_comment(line)) continue;
        const std::string where = loc(path, lineno);

        std::array<std::string, 5> fields;
        std::size_t start = 0;
        for (int f = 0; f < 5; ++f) {
            auto pos = f < 4 ? line.find(',', start) : std::string::npos;
            if (f < 4 && pos == std::string::npos)
                throw ParseError(where +
                                 ": expected 'src,dst,kind,weight,timestamp' (5 fields)");
            fields[f] = line.substr(start, pos == std::string::npos ? pos : pos - start);
            start = pos + 1;
        }

        EdgeKind kind = parse_edge_kind(fields[2], where);
        NodeKind src_kind = NodeKind::User;
        NodeKind dst_kind = kind == EdgeKind::Donate ? NodeKind::Video : NodeKind::User;

        auto resolve_endpoint = [&](const std::string& ext, NodeKind expected) {
            auto id = nodes.resolve(ext, expected);
            if (!id)
                throw ReferenceError(where + ": unknown endpoint '" + ext + "'");
            if (nodes[*id].kind != expected)
                throw SchemaError(where + ": endpoint '" + ext + "' is a " +
                                  std::string(to_string(nodes[*id].kind)) + ", but a " +
                                  std::string(to_string(kind)) + " edge requires a " +
                                  std::string(to_string(expected)) + " here");
            return *id;
        };
        std::uint32_t src = resolve_endpoint(fields[0], src_kind);
        std::uint32_t dst = resolve_endpoint(fields[1], dst_kind);

        if (kind == EdgeKind::Follow && src == dst)
            throw SchemaError(where + ": self-follow '" + fields[0] + "' is not allowed");

        double weight;
        std::int64_t timestamp;
        try {
            std::size_t used = 0;
            weight = std::stod(fields[3], &used);
            if (used != fields[3].size()) throw std::invalid_argument("trailing");
            timestamp = std::stoll(fields[4], &used);
            if (used != fields[4].size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw ParseError(where + ": malformed weight or timestamp");
        }
        if (!std::isfinite(weight) || weight <= 0.0)
            throw SchemaError(where + ": edge weight must be positive and finite");
        if (timestamp < 0)
            throw ParseError(where + ": negative timestamp");
        if (kind == EdgeKind::Donate && timestamp == 0)
            throw SchemaError(where + ": Donate edges require a timestamp >= 1");
        if (kind == EdgeKind::Follow) weight = 1.0;

        edges.push_back(Edge{src, dst, kind, weight, timestamp});
    }
    return edges;
}

void write_nodes(const std::filesystem::path& path, const NodeTable& nodes) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write node file " + path.string());
    for (const NodeRecord& r : nodes.records()) {
        nlohmann::json j = nlohmann::json::object();
        for (const auto& [k, v] : r.attrs) j[k] = v;
        out << r.external_id << ',' << to_string(r.kind) << ',' << j.dump() << '\n';
    }
}

void write_edges(const std::filesystem::path& path, std::span<const Edge> edges,
                 const NodeTable& nodes) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write edge file " + path.string());
    std::ostringstream buf;
    for (const Edge& e : edges) {
        buf.str("");
        buf << e.weight;
        out << nodes[e.src].external_id << ',' << nodes[e.dst].external_id << ','
            << to_string(e.kind) << ',' << buf.str() << ',' << e.timestamp << '\n';
    }
}

} // namespace hinmine
