#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "hinmine/graph.hpp"

namespace hinmine {

/// Generator configuration. Defaults give the desk-scale planted dataset:
/// power-law follower counts, community-structured follows, and donations
/// biased toward each community's video subset.
struct SynthConfig {
    std::uint32_t n_users = 20000;
    std::uint32_t n_videos = 500;
    std::uint32_t n_communities = 100;
    double follower_exponent = 2.5;              // pdf exponent; CCDF slope is 1 - exponent
    double intra_community_donation_bias = 0.85; // probability a donation stays in-community
    std::uint64_t donation_volume = 16000;
    double window_fraction = 0.3; // share of donations timestamped after the cutoff
    std::uint64_t seed = 7;

    void validate() const;
};

/// Generated dataset plus the planted ground truth.
struct SynthData {
    NodeTable nodes;
    std::vector<Edge> edges;
    std::vector<std::uint32_t> user_community;  // by user kind-index
    std::vector<std::uint32_t> video_community; // by video kind-index
    std::vector<double> video_propensity;       // unnormalized donation weight
    std::int64_t cutoff = 0;
    std::int64_t horizon_days = 0;
    std::uint64_t n_snapshot_events = 0;
    std::uint64_t n_window_events = 0;
};

/// Deterministic generation: the same config always yields the same data.
SynthData generate_synth(const SynthConfig& config);

/// Emits nodes.csv / edges.csv in the ingestion formats plus manifest.json
/// with the planted ground truth.
void write_synth(const std::filesystem::path& dir, const SynthData& data,
                 const SynthConfig& config);

/// Reads a config JSON; missing fields keep their defaults.
SynthConfig load_synth_config(const std::filesystem::path& path);

} // namespace hinmine
