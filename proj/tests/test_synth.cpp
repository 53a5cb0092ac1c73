#include <doctest.h>

#include <cmath>
#include <set>

#include "hinmine/stats.hpp"
#include "hinmine/synth.hpp"
#include "support/tmpdir.hpp"

using namespace hinmine;
using testsup::TmpDir;

namespace {

SynthConfig small_config() {
    SynthConfig c;
    c.n_users = 600;
    c.n_videos = 40;
    c.n_communities = 8;
    c.donation_volume = 1500;
    c.seed = 7;
    return c;
}

} // namespace

TEST_CASE("synth: determinism, byte-identical files") {
    TmpDir tmp1("synth_a"), tmp2("synth_b");
    SynthConfig c = small_config();
    write_synth(tmp1.path(), generate_synth(c), c);
    write_synth(tmp2.path(), generate_synth(c), c);
    CHECK(testsup::slurp(tmp1.file("nodes.csv")) == testsup::slurp(tmp2.file("nodes.csv")));
    CHECK(testsup::slurp(tmp1.file("edges.csv")) == testsup::slurp(tmp2.file("edges.csv")));
    CHECK(testsup::slurp(tmp1.file("manifest.json")) ==
          testsup::slurp(tmp2.file("manifest.json")));

    SynthConfig c2 = c;
    c2.seed = 8;
    TmpDir tmp3("synth_c");
    write_synth(tmp3.path(), generate_synth(c2), c2);
    CHECK(testsup::slurp(tmp1.file("edges.csv")) != testsup::slurp(tmp3.file("edges.csv")));
}

TEST_CASE("synth: output passes ingestion with zero errors") {
    TmpDir tmp("synth_ingest");
    SynthConfig c = small_config();
    SynthData data = generate_synth(c);
    write_synth(tmp.path(), data, c);
    NodeTable nodes = ingest_nodes(tmp.file("nodes.csv"));
    std::vector<Edge> edges = ingest_edges(tmp.file("edges.csv"), nodes);
    CHECK(nodes.size() == c.n_users + c.n_videos);
    CHECK(edges.size() == data.edges.size());
    HinGraph g = HinGraph::build(std::move(nodes), edges);
    CHECK(g.n_of_kind(NodeKind::User) == c.n_users);
    CHECK(g.n_of_kind(NodeKind::Video) == c.n_videos);
}

TEST_CASE("synth: window events are exactly the post-cutoff events") {
    SynthConfig c = small_config();
    SynthData data = generate_synth(c);
    std::uint64_t past_cutoff = 0;
    for (const Edge& e : data.edges)
        if (e.kind == EdgeKind::Donate && e.timestamp > data.cutoff) ++past_cutoff;
    CHECK(past_cutoff == data.n_window_events);
    CHECK(data.n_snapshot_events + data.n_window_events == c.donation_volume);
    for (const Edge& e : data.edges) {
        if (e.kind != EdgeKind::Donate) continue;
        CHECK(e.timestamp >= 1);
        CHECK(e.timestamp <= data.cutoff + data.horizon_days);
    }
}

TEST_CASE("synth: bias 1 keeps donations inside the community subset") {
    SynthConfig c = small_config();
    c.intra_community_donation_bias = 1.0;
    SynthData data = generate_synth(c);
    for (const Edge& e : data.edges) {
        if (e.kind != EdgeKind::Donate) continue;
        std::uint32_t user_idx = e.src;
        std::uint32_t video_idx = e.dst - c.n_users;
        CHECK(data.user_community[user_idx] == data.video_community[video_idx]);
    }
}

TEST_CASE("synth: bias 0 spreads donations across communities") {
    SynthConfig c = small_config();
    c.intra_community_donation_bias = 0.0;
    SynthData data = generate_synth(c);
    std::uint64_t cross = 0, total = 0;
    for (const Edge& e : data.edges) {
        if (e.kind != EdgeKind::Donate) continue;
        ++total;
        if (data.user_community[e.src] != data.video_community[e.dst - c.n_users]) ++cross;
    }
    // 8 communities: ~7/8 of uniform donations leave their community
    CHECK(static_cast<double>(cross) / static_cast<double>(total) > 0.7);
}

TEST_CASE("synth: follower tail slope tracks 1 - exponent at 20k users") {
    SynthConfig c;
    c.n_users = 20000;
    c.n_videos = 100;
    c.n_communities = 20;
    c.follower_exponent = 2.5;
    c.donation_volume = 10000;
    c.seed = 7;
    SynthData data = generate_synth(c);

    std::vector<std::uint32_t> in_deg(c.n_users, 0);
    for (const Edge& e : data.edges)
        if (e.kind == EdgeKind::Follow) ++in_deg[e.dst];
    std::vector<double> counts;
    for (std::uint32_t d : in_deg) counts.push_back(static_cast<double>(d));
    DistributionCurve ccdf = distribution_curve(counts, CurveMode::CCDF);
    double slope = tail_slope(ccdf, 10.0);
    CHECK(slope > -1.7);
    CHECK(slope < -1.3);
}

TEST_CASE("synth: popularity attributes rank-correlate with total donations") {
    SynthConfig c;
    c.n_users = 4000;
    c.n_videos = 300;
    c.n_communities = 30;
    c.donation_volume = 12000;
    c.seed = 11;
    SynthData data = generate_synth(c);
    HinGraph g = HinGraph::build(data.nodes, data.edges);
    auto [snapshot, window] = g.snapshot_split(data.cutoff, data.horizon_days);
    CharacterizationReport report = characterization_report(snapshot);
    for (const auto& cell : report.srcc) {
        if (cell.metric == "donations_total" && cell.against != "age") {
            CHECK(cell.srcc > 0.6);
            CHECK(cell.srcc < 0.95);
        }
        if (cell.against == "age") CHECK(std::fabs(cell.srcc) < 0.25);
    }
}

TEST_CASE("synth: config validation") {
    SynthConfig c = small_config();
    c.n_communities = c.n_users + 1;
    CHECK_THROWS_AS(generate_synth(c), ArgumentError);
    c = small_config();
    c.follower_exponent = 1.0;
    CHECK_THROWS_AS(generate_synth(c), ArgumentError);
    c = small_config();
    c.donation_volume = static_cast<std::uint64_t>(c.n_users) * c.n_videos + 1;
    CHECK_THROWS_AS(generate_synth(c), ArgumentError);
    c = small_config();
    c.window_fraction = 1.0;
    CHECK_THROWS_AS(generate_synth(c), ArgumentError);
}

TEST_CASE("synth: config file loading") {
    TmpDir tmp("synth_cfg");
    auto path = tmp.write("c.json",
                          "{\"n_users\": 100, \"n_videos\": 10, \"n_communities\": 5,\n"
                          " \"donation_volume\": 200, \"window_fraction\": 0.25}");
    SynthConfig c = load_synth_config(path);
    CHECK(c.n_users == 100);
    CHECK(c.n_videos == 10);
    CHECK(c.window_fraction == 0.25);
    CHECK(c.follower_exponent == 2.5); // default kept

    auto bad = tmp.write("bad.json", "{\"n_userz\": 5}");
    CHECK_THROWS_AS(load_synth_config(bad), ParseError);
}
