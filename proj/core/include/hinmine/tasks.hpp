#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hinmine/embedding.hpp"
#include "hinmine/feature_table.hpp"
#include "hinmine/forest.hpp"
#include "hinmine/graph.hpp"
#include "hinmine/mf.hpp"
#include "hinmine/walks.hpp"

namespace hinmine {

// ---------------------------------------------------------------- prediction

/// One row per video with at least one prior donation; columns
/// {views, subscriptions, danmus, donations_total, donations_prev_week},
/// tagged with their feature group. Donation columns read the cutoff-dated
/// node attributes (donations_total / donations_week).
FeatureTable build_series_features(const HinGraph& snapshot);

struct QuantileLabels {
    std::vector<std::uint8_t> labels;
    std::uint32_t threshold = 0;  // window count at the (1-q) order statistic
    bool degenerate_all_positive = false;
};

/// Positive iff count >= the (1-q)-quantile threshold; threshold ties are
/// all positive, so positives >= ceil(q * N).
QuantileLabels label_top_quantile(std::span<const std::uint32_t> counts, double q);

/// Convenience wrapper: counts looked up in the window for each video id.
QuantileLabels label_top_quantile(const LabelWindow& window,
                                  std::span<const std::uint32_t> videos, double q);

struct PredictionReport {
    struct GroupResult {
        std::string group;
        double auc = 0.0;
        std::size_t n_train = 0, n_test = 0;
    };
    std::vector<GroupResult> groups;
    std::vector<std::pair<std::string, double>> importances; // from the 'both' forest
    ForestParams forest_params;
    std::uint64_t seed = 0;
    std::size_t n_videos = 0, n_positive = 0, n_negative = 0;
};

inline const std::vector<std::string> kFeatureGroups = {"past_popularity", "past_donation",
                                                        "both"};

/// Labels via label_top_quantile(q = 0.2), balances classes, splits
/// stratified 70/30, trains one forest per feature group, reports AUC per
/// group and importances for the all-features run.
PredictionReport run_prediction(const HinGraph& snapshot, const LabelWindow& window,
                                const std::vector<std::string>& groups,
                                const ForestParams& forest_params, std::uint64_t seed);

void write_prediction_report(const std::filesystem::path& dir, const PredictionReport& report);

// ------------------------------------------------------------ pair datasets

/// Labeled Hadamard-feature table for user-video pairs: positives are the
/// window's donation pairs, negatives are uniformly sampled pairs with no
/// Donate edge in snapshot or window (collisions resampled).
FeatureTable build_pair_dataset(const HinGraph& snapshot, const LabelWindow& window,
                                const EmbeddingSet& embeddings, std::uint32_t neg_per_pos,
                                std::uint64_t seed);

/// Core builder with an explicit positive-pair list (user id, video id).
FeatureTable build_pair_dataset_from(std::span<const std::pair<std::uint32_t, std::uint32_t>> positives,
                                     const HinGraph& snapshot, const LabelWindow* window,
                                     const EmbeddingSet& embeddings, std::uint32_t neg_per_pos,
                                     std::uint64_t seed);

// ----------------------------------------------------------------- ranking

struct RankedList {
    std::uint32_t video = 0;
    std::vector<std::uint32_t> candidates; // score-descending, ties by ascending id
    std::vector<double> scores;            // aligned; empty when loaded from disk
    std::vector<std::uint32_t> truth;      // sorted; window donors within the candidates
    std::uint64_t truth_unreachable = 0;   // window donors outside the candidate set
};

RankedList rank_candidates(const std::function<double(std::uint32_t)>& scorer,
                           std::uint32_t video, std::span<const std::uint32_t> candidates);

enum class MapMode {
    Default,      // AveP = sum over relevant ranks of precision@j, / min(k, |truth|)
    PaperLiteral, // AveP = sum_{j<=k} precision@j / j
};

struct EvalRow {
    std::string method;
    std::map<int, double> map_at;
    std::map<int, double> recall_at;
    std::uint32_t n_queries = 0;
    std::uint32_t n_skipped_empty_truth = 0;
    std::uint64_t truth_unreachable = 0;
    bool failed = false;
    std::string error;
};

struct EvalReport {
    std::vector<int> ks;
    MapMode mode = MapMode::Default;
    std::vector<EvalRow> rows;
};

/// MAP and recall@k averaged over the queries with nonempty truth.
EvalRow rank_metrics(std::span<const RankedList> lists, std::span<const int> ks, MapMode mode);

// ---------------------------------------------------------- recommendation

/// Desk-scale defaults for the end-to-end recommendation pipeline. The
/// stand-alone trainer defaults stay at their published values; these
/// smaller ones keep the full multi-method comparison within a laptop
/// time budget and are echoed in every report manifest.
struct RecParams {
    std::vector<std::string> methods = {"pmf", "cmf", "metapath2vec", "hin2vec"};
    std::vector<int> ks = {5, 20, 50, 100};
    MapMode map_mode = MapMode::Default;
    std::uint32_t candidate_hops = 2;
    std::uint32_t neg_per_pos = 4;            // ranking-forest negatives per positive
    std::size_t max_train_positives = 8000;   // subsample cap for the ranking forest
    std::string metapath = "U-U-V-U-U";

    WalkParams walks{/*walks_per_node=*/4, /*walk_length=*/40};
    SgnsParams sgns{/*dim=*/48, /*window=*/4, /*negatives=*/4, /*epochs=*/3};
    Hin2vecParams hin2vec{/*dim=*/48, /*negatives=*/4, /*epochs=*/3, /*max_hops=*/4,
                          /*learning_rate=*/0.05};
    MfParams mf{/*rank=*/32, /*reg=*/0.01, /*alpha=*/0.5, /*epochs=*/30};
    ForestParams ranker{/*n_trees=*/30, /*max_depth=*/12};

    std::uint64_t seed = 0;
    std::uint32_t workers = 1;

    // optional precomputed node embeddings (e.g. from the embed stage);
    // when set the corresponding trainer is skipped
    const EmbeddingSet* pretrained_metapath2vec = nullptr;
    const EmbeddingSet* pretrained_hin2vec = nullptr;
};

/// Trains each method on the snapshot, ranks each window-active video's
/// 2-hop candidates (existing donors excluded), and reports MAP/recall@k.
/// A failed method is recorded in its row; the others proceed. When
/// `rankings_out` is given the per-method ranked lists are collected there.
EvalReport run_recommendation(const HinGraph& g, std::int64_t cutoff, std::int64_t horizon_days,
                              const RecParams& params,
                              std::map<std::string, std::vector<RankedList>>* rankings_out = nullptr);

void write_eval_report(const std::filesystem::path& path, const EvalReport& report);

/// Rankings dump: header line, then `video <TAB> truth <TAB> ranked` with
/// semicolon-separated external ids; ranked lists capped at `top_cap`.
void write_rankings(const std::filesystem::path& path, const std::string& method,
                    std::span<const RankedList> lists, const HinGraph& g, std::size_t top_cap);
std::vector<RankedList> read_rankings(const std::filesystem::path& path, const HinGraph& g,
                                      std::string* method_out = nullptr);

} // namespace hinmine
