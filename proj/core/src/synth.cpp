#include "hinmine/synth.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <unordered_set>

#include <json.hpp>

#include "hinmine/rng.hpp"

namespace hinmine {

namespace {

constexpr std::int64_t kCutoff = 360;
constexpr std::int64_t kHorizonDays = 7;
constexpr double kFollowIntraProb = 0.9; // follows mostly stay in-community
constexpr std::uint32_t kFollowerXmin = 3;
constexpr double kPropensityZipf = 0.7;
// share of in-community donations drawn from follow-neighbors of the
// video's existing donors (social cascade); scaled by the bias knob so a
// bias of zero leaves no recoverable structure at all
constexpr double kCascadeProb = 0.6;

/// floor(xmin * U^(-1/(a-1))): P[X >= k] = (xmin/k)^(a-1) for k >= xmin.
std::uint64_t pareto_int(Rng& rng, double exponent, std::uint32_t xmin, std::uint64_t cap) {
    double u = rng.next_double();
    while (u <= 0.0) u = rng.next_double();
    double x = static_cast<double>(xmin) * std::pow(u, -1.0 / (exponent - 1.0));
    if (!(x < static_cast<double>(cap))) return cap;
    return std::max<std::uint64_t>(xmin, static_cast<std::uint64_t>(x));
}

/// Index into a cumulative-weight array.
std::size_t pick_cumulative(Rng& rng, const std::vector<double>& cum) {
    double x = rng.next_double() * cum.back();
    auto it = std::upper_bound(cum.begin(), cum.end(), x);
    return std::min<std::size_t>(it - cum.begin(), cum.size() - 1);
}

std::uint64_t scaled_count(double base, double scale, double noise_sigma, Rng& rng) {
    double v = scale * base * std::exp(noise_sigma * rng.gaussian());
    return static_cast<std::uint64_t>(std::llround(std::max(1.0, v)));
}

} // namespace

void SynthConfig::validate() const {
    if (n_users == 0 || n_videos == 0 || n_communities == 0)
        throw ArgumentError("synth: n_users, n_videos, n_communities must be positive");
    if (n_communities > n_users)
        throw ArgumentError("synth: n_communities may not exceed n_users");
    if (n_communities > n_videos)
        throw ArgumentError("synth: n_communities may not exceed n_videos");
    if (!(follower_exponent > 1.0))
        throw ArgumentError("synth: follower_exponent must be > 1");
    if (intra_community_donation_bias < 0.0 || intra_community_donation_bias > 1.0)
        throw ArgumentError("synth: intra_community_donation_bias must be in [0, 1]");
    if (donation_volume == 0)
        throw ArgumentError("synth: donation_volume must be positive");
    if (donation_volume > static_cast<std::uint64_t>(n_users) * n_videos)
        throw ArgumentError("synth: donation_volume exceeds the user-video pair count");
    if (!(window_fraction > 0.0) || !(window_fraction < 1.0))
        throw ArgumentError("synth: window_fraction must be in (0, 1)");
}

SynthData generate_synth(const SynthConfig& config) {
    config.validate();
    Rng rng(mix_seed(config.seed, 0x53594e54ULL));

    SynthData data;
    data.cutoff = kCutoff;
    data.horizon_days = kHorizonDays;

    const std::uint32_t C = config.n_communities;

    // community assignment: users random, videos round-robin so every
    // community owns at least one video
    data.user_community.resize(config.n_users);
    for (auto& c : data.user_community) c = static_cast<std::uint32_t>(rng.bounded(C));
    data.video_community.resize(config.n_videos);
    for (std::uint32_t v = 0; v < config.n_videos; ++v) data.video_community[v] = v % C;

    std::vector<std::vector<std::uint32_t>> community_users(C), community_videos(C);
    for (std::uint32_t u = 0; u < config.n_users; ++u)
        community_users[data.user_community[u]].push_back(u);
    for (std::uint32_t v = 0; v < config.n_videos; ++v)
        community_videos[data.video_community[v]].push_back(v);

    // skewed donation propensity over a shuffled video ranking
    std::vector<std::uint32_t> rank(config.n_videos);
    std::iota(rank.begin(), rank.end(), 0u);
    rng.shuffle(rank);
    data.video_propensity.resize(config.n_videos);
    for (std::uint32_t v = 0; v < config.n_videos; ++v)
        data.video_propensity[v] = 1.0 / std::pow(static_cast<double>(rank[v]) + 1.0,
                                                  kPropensityZipf);

    std::vector<double> global_cum(config.n_videos);
    {
        double acc = 0.0;
        for (std::uint32_t v = 0; v < config.n_videos; ++v) {
            acc += data.video_propensity[v];
            global_cum[v] = acc;
        }
    }
    std::vector<std::vector<double>> community_cum(C);
    for (std::uint32_t c = 0; c < C; ++c) {
        double acc = 0.0;
        for (std::uint32_t v : community_videos[c]) {
            acc += data.video_propensity[v];
            community_cum[c].push_back(acc);
        }
    }

    // follow edges: follower counts from a discrete power law, followers
    // drawn mostly from the followee's community
    std::vector<std::vector<std::uint32_t>> followers(config.n_users);
    if (config.n_users > 1) {
        std::unordered_set<std::uint32_t> seen;
        for (std::uint32_t u = 0; u < config.n_users; ++u) {
            std::uint64_t want = pareto_int(rng, config.follower_exponent, kFollowerXmin,
                                            config.n_users - 1);
            const auto& pool = community_users[data.user_community[u]];
            seen.clear();
            std::uint64_t attempts = 4 * want;
            while (followers[u].size() < want && attempts-- > 0) {
                std::uint32_t w;
                if (pool.size() > 1 && rng.next_double() < kFollowIntraProb)
                    w = pool[rng.bounded(pool.size())];
                else
                    w = static_cast<std::uint32_t>(rng.bounded(config.n_users));
                if (w == u || !seen.insert(w).second) continue;
                followers[u].push_back(w);
            }
        }
    }

    // donation events: snapshot first, then the post-cutoff window. Videos
    // are drawn by propensity; donors follow a social cascade around the
    // video's existing donors when the bias allows it.
    std::uint64_t n_window = static_cast<std::uint64_t>(
        std::llround(config.window_fraction * static_cast<double>(config.donation_volume)));
    n_window = std::min(n_window, config.donation_volume);
    data.n_window_events = n_window;
    data.n_snapshot_events = config.donation_volume - n_window;

    // undirected follow adjacency for the cascade pool
    std::vector<std::vector<std::uint32_t>> follow_adj(config.n_users);
    for (std::uint32_t u = 0; u < config.n_users; ++u)
        for (std::uint32_t w : followers[u]) {
            follow_adj[u].push_back(w);
            follow_adj[w].push_back(u);
        }

    struct Event {
        std::uint32_t user, video;
        std::int64_t t;
    };
    std::vector<Event> events;
    events.reserve(config.donation_volume);
    std::vector<std::vector<std::uint32_t>> donors_of(config.n_videos);
    auto draw_event = [&](bool in_window) {
        std::uint32_t v = static_cast<std::uint32_t>(pick_cumulative(rng, global_cum));
        std::uint32_t vc = data.video_community[v];
        const auto& community = community_users[vc];
        bool in_community = rng.next_double() < config.intra_community_donation_bias;
        std::uint32_t u = UINT32_MAX;
        if (in_community && !donors_of[v].empty() && rng.next_double() < kCascadeProb) {
            // pick a follow-neighbor of a previous donor, staying in-community
            for (int attempt = 0; attempt < 8 && u == UINT32_MAX; ++attempt) {
                const auto& donor_nbrs =
                    follow_adj[donors_of[v][rng.bounded(donors_of[v].size())]];
                if (donor_nbrs.empty()) continue;
                std::uint32_t cand = donor_nbrs[rng.bounded(donor_nbrs.size())];
                if (data.user_community[cand] == vc) u = cand;
            }
        }
        if (u == UINT32_MAX) {
            u = in_community ? community[rng.bounded(community.size())]
                             : static_cast<std::uint32_t>(rng.bounded(config.n_users));
        }
        std::int64_t t = in_window ? kCutoff + 1 + static_cast<std::int64_t>(
                                                       rng.bounded(kHorizonDays))
                                   : 1 + static_cast<std::int64_t>(rng.bounded(kCutoff));
        donors_of[v].push_back(u);
        events.push_back(Event{u, v, t});
    };
    for (std::uint64_t i = 0; i < data.n_snapshot_events; ++i) draw_event(false);
    for (std::uint64_t i = 0; i < n_window; ++i) draw_event(true);

    // video attributes, measured at the cutoff
    std::vector<std::uint64_t> donations_total(config.n_videos, 0),
        donations_week(config.n_videos, 0);
    for (const Event& e : events) {
        if (e.t <= kCutoff) {
            ++donations_total[e.video];
            if (e.t > kCutoff - 7) ++donations_week[e.video];
        }
    }

    for (std::uint32_t u = 0; u < config.n_users; ++u)
        data.nodes.add("u" + std::to_string(u), NodeKind::User);

    // popularity = noisy monotone transform of the realized donation rate,
    // keeping SRCC(popularity, donations_total) inside the target band
    for (std::uint32_t v = 0; v < config.n_videos; ++v) {
        double base = static_cast<double>(donations_total[v]) + 1.0;
        AttrMap attrs;
        attrs["views"] = scaled_count(base, 2.0e4, 0.55, rng);
        attrs["subscriptions"] = scaled_count(base, 1.5e3, 0.45, rng);
        attrs["danmus"] = scaled_count(base, 4.0e2, 0.65, rng);
        attrs["donations_total"] = donations_total[v];
        attrs["donations_week"] = donations_week[v];
        attrs["age_days"] = 30 + rng.bounded(970);
        data.nodes.add("v" + std::to_string(v), NodeKind::Video, std::move(attrs));
    }

    for (std::uint32_t u = 0; u < config.n_users; ++u)
        for (std::uint32_t w : followers[u])
            data.edges.push_back(Edge{w, u, EdgeKind::Follow, 1.0, 0});
    for (const Event& e : events)
        data.edges.push_back(Edge{e.user, config.n_users + e.video, EdgeKind::Donate, 1.0, e.t});

    return data;
}

void write_synth(const std::filesystem::path& dir, const SynthData& data,
                 const SynthConfig& config) {
    std::filesystem::create_directories(dir);
    write_nodes(dir / "nodes.csv", data.nodes);
    write_edges(dir / "edges.csv", data.edges, data.nodes);

    nlohmann::json manifest;
    manifest["config"] = {
        {"n_users", config.n_users},
        {"n_videos", config.n_videos},
        {"n_communities", config.n_communities},
        {"follower_exponent", config.follower_exponent},
        {"intra_community_donation_bias", config.intra_community_donation_bias},
        {"donation_volume", config.donation_volume},
        {"window_fraction", config.window_fraction},
        {"seed", config.seed},
    };
    manifest["cutoff"] = data.cutoff;
    manifest["horizon_days"] = data.horizon_days;
    manifest["n_snapshot_events"] = data.n_snapshot_events;
    manifest["n_window_events"] = data.n_window_events;
    manifest["user_community"] = data.user_community;
    manifest["video_community"] = data.video_community;
    manifest["video_propensity"] = data.video_propensity;

    std::ofstream out(dir / "manifest.json");
    if (!out) throw ParseError("cannot write manifest " + (dir / "manifest.json").string());
    out << manifest.dump(2) << '\n';
}

SynthConfig load_synth_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open config " + path.string());
    nlohmann::json j = nlohmann::json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw ParseError(path.string() + ": config must be a JSON object");

    SynthConfig config;
    auto get = [&](const char* key, auto& field) {
        if (j.contains(key)) {
            try {
                field = j.at(key).get<std::decay_t<decltype(field)>>();
            } catch (const nlohmann::json::exception&) {
                throw ParseError(path.string() + ": bad value for '" + key + "'");
            }
        }
    };
    get("n_users", config.n_users);
    get("n_videos", config.n_videos);
    get("n_communities", config.n_communities);
    get("follower_exponent", config.follower_exponent);
    get("intra_community_donation_bias", config.intra_community_donation_bias);
    get("donation_volume", config.donation_volume);
    get("window_fraction", config.window_fraction);
    get("seed", config.seed);
    for (auto& [key, _] : j.items()) {
        static const std::unordered_set<std::string> known = {
            "n_users", "n_videos", "n_communities", "follower_exponent",
            "intra_community_donation_bias", "donation_volume", "window_fraction", "seed"};
        if (!known.count(key))
            throw ParseError(path.string() + ": unknown config key '" + key + "'");
    }
    config.validate();
    return config;
}

} // namespace hinmine
