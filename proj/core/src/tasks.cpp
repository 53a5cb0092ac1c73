#include "hinmine/tasks.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <unordered_set>

#include "hinmine/rng.hpp"

namespace hinmine {

namespace {

constexpr std::uint64_t kLabelTag = 0x54534b30ULL;
constexpr std::uint64_t kSplitTag = 0x54534b31ULL;
constexpr std::uint64_t kPairTag = 0x54534b32ULL;
constexpr std::uint64_t kMethodTag = 0x54534b33ULL;
constexpr std::uint64_t kRandomScoreTag = 0x54534b34ULL;
constexpr std::uint64_t kSubsampleTag = 0x54534b35ULL;

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

/// Videos carrying at least one prior donation, in internal-id order.
/// run_prediction relies on this order matching build_series_features.
std::vector<std::uint32_t> donation_positive_videos(const HinGraph& snapshot) {
    std::vector<std::uint32_t> out;
    for (std::uint32_t v : snapshot.members(NodeKind::Video)) {
        auto it = snapshot.node(v).attrs.find("donations_total");
        if (it == snapshot.node(v).attrs.end())
            throw SchemaError("video '" + snapshot.external_id(v) +
                              "' is missing attribute column 'donations_total'");
        if (it->second >= 1) out.push_back(v);
    }
    return out;
}

std::uint64_t pair_key(std::uint32_t u, std::uint32_t v) {
    return (static_cast<std::uint64_t>(u) << 32) | v;
}

} // namespace

FeatureTable build_series_features(const HinGraph& snapshot) {
    static const std::vector<std::pair<std::string, std::string>> kColumns = {
        {"views", "past_popularity"},
        {"subscriptions", "past_popularity"},
        {"danmus", "past_popularity"},
        {"donations_total", "past_donation"},
        {"donations_prev_week", "past_donation"},
    };

    FeatureTable t;
    for (const auto& [name, group] : kColumns) {
        t.columns.push_back(name);
        t.column_groups.push_back(group);
    }

    for (std::uint32_t v : donation_positive_videos(snapshot)) {
        const AttrMap& attrs = snapshot.node(v).attrs;
        std::vector<double> row;
        for (const auto& [name, group] : kColumns) {
            // the prev-week feature reads the cutoff-dated donations_week attribute
            const std::string& attr = name == "donations_prev_week" ? "donations_week" : name;
            auto it = attrs.find(attr);
            if (it == attrs.end())
                throw SchemaError("video '" + snapshot.external_id(v) +
                                  "' is missing attribute column '" + attr + "'");
            row.push_back(static_cast<double>(it->second));
        }
        t.add_row(snapshot.external_id(v), row);
    }
    return t;
}

QuantileLabels label_top_quantile(std::span<const std::uint32_t> counts, double q) {
    if (!(q > 0.0) || !(q < 1.0))
        throw ArgumentError("label_top_quantile: q must be in (0, 1)");
    if (counts.empty()) throw ArgumentError("label_top_quantile: empty count list");

    std::vector<std::uint32_t> sorted(counts.begin(), counts.end());
    std::sort(sorted.begin(), sorted.end(), std::greater<>());
    std::size_t k = static_cast<std::size_t>(
        std::ceil(q * static_cast<double>(counts.size())));
    k = std::max<std::size_t>(1, std::min(k, counts.size()));
    std::uint32_t threshold = sorted[k - 1];

    QuantileLabels out;
    out.threshold = threshold;
    out.labels.reserve(counts.size());
    std::size_t positives = 0;
    for (std::uint32_t c : counts) {
        bool pos = c >= threshold;
        out.labels.push_back(pos ? 1 : 0);
        positives += pos;
    }
    out.degenerate_all_positive = positives == counts.size();
    return out;
}

QuantileLabels label_top_quantile(const LabelWindow& window,
                                  std::span<const std::uint32_t> videos, double q) {
    std::vector<std::uint32_t> counts;
    counts.reserve(videos.size());
    for (std::uint32_t v : videos) {
        auto it = window.counts.find(v);
        counts.push_back(it == window.counts.end() ? 0 : it->second);
    }
    return label_top_quantile(counts, q);
}

PredictionReport run_prediction(const HinGraph& snapshot, const LabelWindow& window,
                                const std::vector<std::string>& groups,
                                const ForestParams& forest_params, std::uint64_t seed) {
    if (window.events.empty())
        throw TaskError("run_prediction: the label window is empty");
    for (const std::string& gname : groups)
        if (std::find(kFeatureGroups.begin(), kFeatureGroups.end(), gname) == kFeatureGroups.end())
            throw ArgumentError("run_prediction: unknown feature group '" + gname + "'");

    FeatureTable features = build_series_features(snapshot);
    std::vector<std::uint32_t> videos = donation_positive_videos(snapshot);
    if (features.n_rows() == 0)
        throw TaskError("run_prediction: no videos with a prior donation");

    QuantileLabels labels = label_top_quantile(window, videos, 0.2);
    features.labels = labels.labels;

    FeatureTable balanced;
    try {
        balanced = balance_classes(features, mix_seed(seed, kLabelTag));
    } catch (const ArgumentError& e) {
        throw TaskError(std::string("run_prediction: degenerate labels (") + e.what() + ")");
    }

    // stratified 70/30 split
    std::vector<std::size_t> pos, neg;
    for (std::size_t r = 0; r < balanced.n_rows(); ++r)
        (balanced.labels[r] ? pos : neg).push_back(r);
    Rng split_rng(mix_seed(seed, kSplitTag));
    split_rng.shuffle(pos);
    split_rng.shuffle(neg);
    auto take = [](const std::vector<std::size_t>& v, bool train) {
        std::size_t n_train = static_cast<std::size_t>(
            std::llround(0.7 * static_cast<double>(v.size())));
        return train ? std::vector<std::size_t>(v.begin(), v.begin() + n_train)
                     : std::vector<std::size_t>(v.begin() + n_train, v.end());
    };
    std::vector<std::size_t> train_rows = take(pos, true), test_rows = take(pos, false);
    auto neg_train = take(neg, true);
    auto neg_test = take(neg, false);
    train_rows.insert(train_rows.end(), neg_train.begin(), neg_train.end());
    test_rows.insert(test_rows.end(), neg_test.begin(), neg_test.end());
    std::sort(train_rows.begin(), train_rows.end());
    std::sort(test_rows.begin(), test_rows.end());
    if (train_rows.empty() || test_rows.empty())
        throw TaskError("run_prediction: too few balanced rows for a 70/30 split");
    FeatureTable train = balanced.select_rows(train_rows);
    FeatureTable test = balanced.select_rows(test_rows);

    auto group_columns = [&](const std::string& gname) {
        std::vector<std::string> cols;
        for (std::size_t c = 0; c < features.columns.size(); ++c)
            if (gname == "both" || features.column_groups[c] == gname)
                cols.push_back(features.columns[c]);
        return cols;
    };

    PredictionReport report;
    report.forest_params = forest_params;
    report.seed = seed;
    report.n_videos = features.n_rows();
    report.n_positive = pos.size();
    report.n_negative = neg.size();

    for (const std::string& gname : groups) {
        std::vector<std::string> cols = group_columns(gname);
        FeatureTable gtrain = train.select_columns(cols);
        FeatureTable gtest = test.select_columns(cols);
        ForestParams fp = forest_params;
        std::size_t gindex = static_cast<std::size_t>(
            std::find(kFeatureGroups.begin(), kFeatureGroups.end(), gname) -
            kFeatureGroups.begin());
        fp.seed = mix_seed(seed, kMethodTag, gindex);
        ForestModel model = train_forest(gtrain, fp);
        std::vector<double> scores = forest_predict(model, gtest);
        PredictionReport::GroupResult res;
        res.group = gname;
        res.auc = auc(scores, gtest.labels);
        res.n_train = gtrain.n_rows();
        res.n_test = gtest.n_rows();
        report.groups.push_back(res);
        if (gname == "both") report.importances = feature_importances(model);
    }
    return report;
}

void write_prediction_report(const std::filesystem::path& dir, const PredictionReport& report) {
    std::filesystem::create_directories(dir);
    {
        std::ofstream out(dir / "prediction_report.csv");
        out << "group,auc,n_train,n_test\n";
        char buf[64];
        for (const auto& g : report.groups) {
            std::snprintf(buf, sizeof(buf), "%s,%.6f,%zu,%zu\n", g.group.c_str(), g.auc,
                          g.n_train, g.n_test);
            out << buf;
        }
    }
    if (!report.importances.empty()) {
        std::ofstream out(dir / "importances.csv");
        out << "column,importance\n";
        char buf[96];
        for (const auto& [col, imp] : report.importances) {
            std::snprintf(buf, sizeof(buf), "%s,%.6f\n", col.c_str(), imp);
            out << buf;
        }
    }
}

FeatureTable build_pair_dataset(const HinGraph& snapshot, const LabelWindow& window,
                                const EmbeddingSet& embeddings, std::uint32_t neg_per_pos,
                                std::uint64_t seed) {
    if (window.events.empty()) throw TaskError("build_pair_dataset: the label window is empty");
    std::vector<std::pair<std::uint32_t, std::uint32_t>> positives;
    std::unordered_set<std::uint64_t> seen;
    for (const Edge& e : window.events)
        if (seen.insert(pair_key(e.src, e.dst)).second) positives.emplace_back(e.src, e.dst);
    return build_pair_dataset_from(positives, snapshot, &window, embeddings, neg_per_pos, seed);
}

FeatureTable build_pair_dataset_from(
    std::span<const std::pair<std::uint32_t, std::uint32_t>> positives, const HinGraph& snapshot,
    const LabelWindow* window, const EmbeddingSet& embeddings, std::uint32_t neg_per_pos,
    std::uint64_t seed) {
    if (positives.empty()) throw TaskError("build_pair_dataset: no positive pairs");
    if (neg_per_pos == 0) throw ArgumentError("build_pair_dataset: neg_per_pos must be positive");
    if (embeddings.n_nodes() != snapshot.n_nodes())
        throw ArgumentError("build_pair_dataset: embeddings do not cover the graph");

    std::unordered_set<std::uint64_t> forbidden;
    for (const auto& [u, v] : positives) forbidden.insert(pair_key(u, v));
    if (window)
        for (const Edge& e : window->events) forbidden.insert(pair_key(e.src, e.dst));

    const auto& users = snapshot.members(NodeKind::User);
    const auto& videos = snapshot.members(NodeKind::Video);
    if (users.empty() || videos.empty())
        throw ArgumentError("build_pair_dataset: graph lacks users or videos");

    FeatureTable t;
    for (std::uint32_t k = 0; k < embeddings.dim(); ++k)
        t.columns.push_back("e" + std::to_string(k));

    auto add_pair = [&](std::uint32_t u, std::uint32_t v, std::uint8_t label) {
        std::vector<double> row = edge_feature(embeddings.center(u), embeddings.center(v));
        t.add_row(snapshot.external_id(u) + "|" + snapshot.external_id(v), row, label);
    };

    for (const auto& [u, v] : positives) add_pair(u, v, 1);

    auto has_donate_edge = [&](std::uint32_t u, std::uint32_t v) {
        auto donated = snapshot.neighbors_dir(u, EdgeKind::Donate, Direction::Out);
        return std::binary_search(donated.begin(), donated.end(), v);
    };

    Rng rng(mix_seed(seed, kPairTag));
    std::uint64_t wanted = static_cast<std::uint64_t>(positives.size()) * neg_per_pos;
    std::uint64_t emitted = 0, attempts = 0;
    const std::uint64_t max_attempts = 100 * wanted + 1000;
    while (emitted < wanted && attempts < max_attempts) {
        ++attempts;
        std::uint32_t u = users[rng.bounded(users.size())];
        std::uint32_t v = videos[rng.bounded(videos.size())];
        if (forbidden.count(pair_key(u, v)) || has_donate_edge(u, v)) continue; // resample
        add_pair(u, v, 0);
        ++emitted;
    }
    if (emitted < wanted)
        throw TaskError("build_pair_dataset: could not sample enough non-edge negatives");
    return t;
}

RankedList rank_candidates(const std::function<double(std::uint32_t)>& scorer,
                           std::uint32_t video, std::span<const std::uint32_t> candidates) {
    RankedList list;
    list.video = video;
    if (candidates.empty()) return list; // empty list with warning semantics, not an error

    std::vector<std::pair<double, std::uint32_t>> scored;
    scored.reserve(candidates.size());
    for (std::uint32_t u : candidates) scored.emplace_back(scorer(u), u);
    std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
        if (a.first != b.first) return a.first > b.first;
        return a.second < b.second;
    });
    list.candidates.reserve(scored.size());
    list.scores.reserve(scored.size());
    for (const auto& [s, u] : scored) {
        list.candidates.push_back(u);
        list.scores.push_back(s);
    }
    return list;
}

EvalRow rank_metrics(std::span<const RankedList> lists, std::span<const int> ks, MapMode mode) {
    for (int k : ks)
        if (k <= 0) throw ArgumentError("rank_metrics: k must be positive");
    std::vector<int> sorted_ks(ks.begin(), ks.end());
    std::sort(sorted_ks.begin(), sorted_ks.end());

    EvalRow row;
    for (int k : sorted_ks) {
        row.map_at[k] = 0.0;
        row.recall_at[k] = 0.0;
    }

    std::uint32_t used = 0;
    for (const RankedList& list : lists) {
        row.truth_unreachable += list.truth_unreachable;
        if (list.truth.empty()) {
            ++row.n_skipped_empty_truth;
            continue;
        }
        ++used;
        std::unordered_set<std::uint32_t> truth(list.truth.begin(), list.truth.end());
        std::size_t max_k = static_cast<std::size_t>(sorted_ks.back());
        std::size_t limit = std::min(max_k, list.candidates.size());

        // prefix scan: hit count and both AveP accumulations at each depth
        std::vector<std::size_t> hits_at(limit + 1, 0);
        std::vector<double> apd_at(limit + 1, 0.0), app_at(limit + 1, 0.0);
        std::size_t hits = 0;
        double apd = 0.0, app = 0.0;
        for (std::size_t j = 1; j <= limit; ++j) {
            bool rel = truth.count(list.candidates[j - 1]) != 0;
            if (rel) ++hits;
            double prec = static_cast<double>(hits) / static_cast<double>(j);
            if (rel) apd += prec;
            app += prec / static_cast<double>(j);
            hits_at[j] = hits;
            apd_at[j] = apd;
            app_at[j] = app;
        }

        for (int k : sorted_ks) {
            std::size_t jj = std::min<std::size_t>(static_cast<std::size_t>(k), limit);
            double recall = static_cast<double>(hits_at[jj]) /
                            static_cast<double>(list.truth.size());
            double avep;
            if (mode == MapMode::Default) {
                std::size_t denom = std::min<std::size_t>(static_cast<std::size_t>(k),
                                                          list.truth.size());
                avep = apd_at[jj] / static_cast<double>(denom);
            } else {
                avep = app_at[jj];
            }
            row.recall_at[k] += recall;
            row.map_at[k] += avep;
        }
    }

    row.n_queries = used;
    for (int k : sorted_ks) {
        if (used > 0) {
            row.map_at[k] /= static_cast<double>(used);
            row.recall_at[k] /= static_cast<double>(used);
        }
    }
    return row;
}

EvalReport run_recommendation(const HinGraph& g, std::int64_t cutoff, std::int64_t horizon_days,
                              const RecParams& params,
                              std::map<std::string, std::vector<RankedList>>* rankings_out) {
    auto [snapshot, window] = g.snapshot_split(cutoff, horizon_days);
    if (window.events.empty())
        throw TaskError("run_recommendation: the label window is empty");

    // query videos and their ground truth
    std::map<std::uint32_t, std::vector<std::uint32_t>> window_donors;
    for (const Edge& e : window.events) window_donors[e.dst].push_back(e.src);

    struct Query {
        std::uint32_t video;
        std::vector<std::uint32_t> candidates;
        std::vector<std::uint32_t> truth;
        std::uint64_t truth_unreachable;
    };
    std::vector<Query> queries;
    for (auto& [video, donors] : window_donors) {
        Query q;
        q.video = video;
        q.candidates = snapshot.k_hop_candidates(video, params.candidate_hops, true);
        std::sort(donors.begin(), donors.end());
        donors.erase(std::unique(donors.begin(), donors.end()), donors.end());
        auto existing = snapshot.neighbors_dir(video, EdgeKind::Donate, Direction::In);
        std::vector<std::uint32_t> fresh;
        std::set_difference(donors.begin(), donors.end(), existing.begin(), existing.end(),
                            std::back_inserter(fresh));
        std::set_intersection(fresh.begin(), fresh.end(), q.candidates.begin(),
                              q.candidates.end(), std::back_inserter(q.truth));
        q.truth_unreachable = fresh.size() - q.truth.size();
        queries.push_back(std::move(q));
    }

    EvalReport report;
    report.ks = params.ks;
    report.mode = params.map_mode;

    // snapshot donation pairs train the embedding rankers; the window stays
    // evaluation-only
    std::vector<std::pair<std::uint32_t, std::uint32_t>> snapshot_pairs;
    for (std::uint32_t u : snapshot.members(NodeKind::User))
        for (std::uint32_t v : snapshot.neighbors_dir(u, EdgeKind::Donate, Direction::Out))
            snapshot_pairs.emplace_back(u, v);

    auto evaluate_scorer =
        [&](const std::function<double(std::uint32_t, std::uint32_t)>& score) {
            std::vector<RankedList> lists;
            lists.reserve(queries.size());
            for (const Query& q : queries) {
                RankedList list = rank_candidates(
                    [&](std::uint32_t u) { return score(q.video, u); }, q.video, q.candidates);
                list.truth = q.truth;
                list.truth_unreachable = q.truth_unreachable;
                lists.push_back(std::move(list));
            }
            return lists;
        };

    auto embedding_ranker = [&](const EmbeddingSet& emb, std::uint64_t method_seed) {
        auto positives = snapshot_pairs;
        if (positives.size() > params.max_train_positives) {
            Rng rng(mix_seed(method_seed, kSubsampleTag));
            rng.shuffle(positives);
            positives.resize(params.max_train_positives);
        }
        FeatureTable pairs = build_pair_dataset_from(positives, snapshot, &window, emb,
                                                     params.neg_per_pos, method_seed);
        ForestParams fp = params.ranker;
        fp.seed = method_seed;
        fp.workers = params.workers;
        ForestModel model = train_forest(pairs, fp);

        std::vector<RankedList> lists;
        lists.reserve(queries.size());
        for (const Query& q : queries) {
            FeatureTable rows;
            rows.columns = pairs.columns;
            for (std::uint32_t u : q.candidates)
                rows.add_row("c", edge_feature(emb.center(u), emb.center(q.video)));
            std::vector<double> scores = forest_predict(model, rows);
            std::vector<std::uint32_t> idx(q.candidates.size());
            std::iota(idx.begin(), idx.end(), 0u);
            std::sort(idx.begin(), idx.end(), [&](std::uint32_t a, std::uint32_t b) {
                if (scores[a] != scores[b]) return scores[a] > scores[b];
                return q.candidates[a] < q.candidates[b];
            });
            RankedList list;
            list.video = q.video;
            for (std::uint32_t i : idx) {
                list.candidates.push_back(q.candidates[i]);
                list.scores.push_back(scores[i]);
            }
            list.truth = q.truth;
            list.truth_unreachable = q.truth_unreachable;
            lists.push_back(std::move(list));
        }
        return lists;
    };

    for (const std::string& method : params.methods) {
        std::uint64_t method_seed = mix_seed(params.seed, kMethodTag, fnv1a(method));
        EvalRow row;
        row.method = method;
        try {
            std::vector<RankedList> lists;
            if (method == "pmf" || method == "cmf") {
                SparseMatrix m_uv = build_interaction_matrix(snapshot, EdgeKind::Donate);
                MfParams mp = params.mf;
                mp.seed = method_seed;
                Factors f = method == "pmf"
                                ? train_pmf(m_uv, mp)
                                : train_cmf(m_uv,
                                            build_interaction_matrix(snapshot, EdgeKind::Follow),
                                            mp);
                lists = evaluate_scorer([&](std::uint32_t video, std::uint32_t user) {
                    return mf_score(f, snapshot.kind_index(user), snapshot.kind_index(video));
                });
            } else if (method == "metapath2vec") {
                if (params.pretrained_metapath2vec) {
                    lists = embedding_ranker(*params.pretrained_metapath2vec, method_seed);
                } else {
                    WalkParams wp = params.walks;
                    wp.seed = method_seed;
                    wp.workers = params.workers;
                    WalkCorpus corpus =
                        generate_walks(snapshot, parse_metapath(params.metapath), wp);
                    SgnsParams sp = params.sgns;
                    sp.seed = method_seed;
                    sp.workers = params.workers;
                    EmbeddingSet emb = train_metapath2vec(snapshot, corpus, sp);
                    lists = embedding_ranker(emb, method_seed);
                }
            } else if (method == "hin2vec") {
                if (params.pretrained_hin2vec) {
                    lists = embedding_ranker(*params.pretrained_hin2vec, method_seed);
                } else {
                    WalkParams wp = params.walks;
                    wp.seed = method_seed;
                    wp.workers = params.workers;
                    MetaPath mp = parse_metapath(params.metapath);
                    WalkCorpus corpus = generate_walks(snapshot, mp, wp);
                    Hin2vecParams hp = params.hin2vec;
                    hp.seed = method_seed;
                    hp.workers = params.workers;
                    auto [emb, rels] = train_hin2vec(
                        snapshot, enumerate_sub_metapaths(mp, hp.max_hops), corpus, hp);
                    lists = embedding_ranker(emb, method_seed);
                }
            } else if (method == "random") {
                lists = evaluate_scorer([&](std::uint32_t video, std::uint32_t user) {
                    Rng r(mix_seed(mix_seed(method_seed, kRandomScoreTag, video),
                                   kRandomScoreTag, user));
                    return r.next_double();
                });
            } else {
                throw ArgumentError("unknown recommendation method '" + method + "'");
            }
            row = rank_metrics(lists, params.ks, params.map_mode);
            row.method = method;
            if (rankings_out) (*rankings_out)[method] = std::move(lists);
        } catch (const Error& e) {
            row.failed = true;
            row.error = e.what();
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

void write_eval_report(const std::filesystem::path& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write eval report " + path.string());
    out << "method";
    for (int k : report.ks) out << ",map@" << k << ",recall@" << k;
    out << '\n';
    char buf[32];
    for (const EvalRow& row : report.rows) {
        out << row.method;
        for (int k : report.ks) {
            if (row.failed) {
                out << ",nan,nan";
            } else {
                std::snprintf(buf, sizeof(buf), ",%.6f", row.map_at.at(k));
                out << buf;
                std::snprintf(buf, sizeof(buf), ",%.6f", row.recall_at.at(k));
                out << buf;
            }
        }
        out << '\n';
    }
}

void write_rankings(const std::filesystem::path& path, const std::string& method,
                    std::span<const RankedList> lists, const HinGraph& g, std::size_t top_cap) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write rankings " + path.string());
    out << "# rankings method=" << method << " top=" << top_cap << '\n';
    for (const RankedList& list : lists) {
        out << g.external_id(list.video) << '\t';
        for (std::size_t i = 0; i < list.truth.size(); ++i) {
            if (i) out << ';';
            out << g.external_id(list.truth[i]);
        }
        out << '\t';
        std::size_t limit = std::min(top_cap, list.candidates.size());
        for (std::size_t i = 0; i < limit; ++i) {
            if (i) out << ';';
            out << g.external_id(list.candidates[i]);
        }
        out << '\n';
    }
}

std::vector<RankedList> read_rankings(const std::filesystem::path& path, const HinGraph& g,
                                      std::string* method_out) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open rankings " + path.string());
    std::string line;
    if (!std::getline(in, line) || line.rfind("# rankings", 0) != 0)
        throw ParseError(path.string() + ":1: expected '# rankings' header");
    if (method_out) {
        auto pos = line.find("method=");
        if (pos != std::string::npos) {
            auto end = line.find(' ', pos);
            *method_out = line.substr(pos + 7, end == std::string::npos ? end : end - pos - 7);
        }
    }

    auto parse_ids = [&](const std::string& field, NodeKind kind, std::size_t lineno) {
        std::vector<std::uint32_t> ids;
        if (field.empty()) return ids;
        std::size_t start = 0;
        for (;;) {
            auto pos = field.find(';', start);
            std::string ext = field.substr(start, pos == std::string::npos ? pos : pos - start);
            auto id = g.find(ext, kind);
            if (!id)
                throw ReferenceError(path.string() + ":" + std::to_string(lineno) +
                                     ": unknown " + std::string(to_string(kind)) + " '" + ext +
                                     "'");
            ids.push_back(*id);
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        return ids;
    };

    std::vector<RankedList> lists;
    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        auto t1 = line.find('\t');
        auto t2 = t1 == std::string::npos ? std::string::npos : line.find('\t', t1 + 1);
        if (t2 == std::string::npos)
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": expected 'video<TAB>truth<TAB>ranked'");
        RankedList list;
        std::string vext = line.substr(0, t1);
        auto vid = g.find(vext, NodeKind::Video);
        if (!vid)
            throw ReferenceError(path.string() + ":" + std::to_string(lineno) +
                                 ": unknown Video '" + vext + "'");
        list.video = *vid;
        list.truth = parse_ids(line.substr(t1 + 1, t2 - t1 - 1), NodeKind::User, lineno);
        std::sort(list.truth.begin(), list.truth.end());
        list.candidates = parse_ids(line.substr(t2 + 1), NodeKind::User, lineno);
        lists.push_back(std::move(list));
    }
    return lists;
}

} // namespace hinmine
