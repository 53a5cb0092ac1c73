#include <chrono>
#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>
#include <json.hpp>

#include "hinmine/embedding.hpp"
#include "hinmine/forest.hpp"
#include "hinmine/graph.hpp"
#include "hinmine/metapath.hpp"
#include "hinmine/mf.hpp"
#include "hinmine/stats.hpp"
#include "hinmine/synth.hpp"
#include "hinmine/tasks.hpp"
#include "hinmine/walks.hpp"

namespace {

using hinmine::Error;

// exit codes: 0 ok, 1 usage, 2 data/schema, 3 task
constexpr int kUsageError = 1;
constexpr int kDataError = 2;
constexpr int kTaskError = 3;

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw hinmine::ParseError("cannot open input " + path.string());
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 16];
    while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    return h;
}

/// Run manifest: every subcommand writes one next to its outputs.
class ManifestWriter {
public:
    ManifestWriter(std::string command) : start_(std::chrono::steady_clock::now()) {
        manifest_["command"] = std::move(command);
        manifest_["parameters"] = nlohmann::json::object();
    }

    template <class T>
    void param(const std::string& key, const T& value) {
        manifest_["parameters"][key] = value;
    }
    void seed(std::uint64_t s) { manifest_["seed"] = s; }
    void input(const std::filesystem::path& path) {
        manifest_["inputs"][path.string()] =
            "fnv1a64:" + std::to_string(fnv1a_file(path));
    }
    void output(const std::filesystem::path& path) {
        manifest_["outputs"].push_back(path.string());
    }
    template <class T>
    void note(const std::string& key, const T& value) {
        manifest_[key] = value;
    }

    void write(const std::filesystem::path& path) {
        auto elapsed = std::chrono::steady_clock::now() - start_;
        manifest_["duration_ms"] =
            std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count();
        std::ofstream out(path);
        if (!out) throw hinmine::ParseError("cannot write manifest " + path.string());
        out << manifest_.dump(2) << '\n';
    }

private:
    nlohmann::json manifest_;
    std::chrono::steady_clock::time_point start_;
};

struct GraphInputs {
    std::string graph_dir;
    std::string nodes_path;
    std::string edges_path;

    void add_options(CLI::App* cmd) {
        cmd->add_option("--graph", graph_dir,
                        "Data directory containing nodes.csv and edges.csv");
        cmd->add_option("--nodes", nodes_path, "Node file");
        cmd->add_option("--edges", edges_path, "Edge file");
    }

    std::pair<std::filesystem::path, std::filesystem::path> resolve() const {
        if (!graph_dir.empty())
            return {std::filesystem::path(graph_dir) / "nodes.csv",
                    std::filesystem::path(graph_dir) / "edges.csv"};
        if (nodes_path.empty() || edges_path.empty())
            throw hinmine::ArgumentError("provide --graph DIR or both --nodes and --edges");
        return {nodes_path, edges_path};
    }

    hinmine::HinGraph load(ManifestWriter& mf) const {
        auto [nodes_file, edges_file] = resolve();
        mf.input(nodes_file);
        mf.input(edges_file);
        hinmine::NodeTable nodes = hinmine::ingest_nodes(nodes_file);
        std::vector<hinmine::Edge> edges = hinmine::ingest_edges(edges_file, nodes);
        return hinmine::HinGraph::build(std::move(nodes), std::move(edges));
    }
};

std::vector<int> parse_k_list(const std::string& spec) {
    std::vector<int> ks;
    std::size_t start = 0;
    while (start <= spec.size()) {
        auto pos = spec.find(',', start);
        std::string tok = spec.substr(start, pos == std::string::npos ? pos : pos - start);
        if (!tok.empty()) ks.push_back(std::stoi(tok));
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    if (ks.empty()) throw hinmine::ArgumentError("--k list is empty");
    return ks;
}

std::vector<std::string> parse_name_list(const std::string& spec) {
    std::vector<std::string> names;
    std::size_t start = 0;
    while (start <= spec.size()) {
        auto pos = spec.find(',', start);
        std::string tok = spec.substr(start, pos == std::string::npos ? pos : pos - start);
        if (!tok.empty()) names.push_back(tok);
        if (pos == std::string::npos) break;
        start = pos + 1;
    }
    return names;
}

hinmine::MapMode parse_map_mode(const std::string& mode) {
    if (mode == "default") return hinmine::MapMode::Default;
    if (mode == "paper") return hinmine::MapMode::PaperLiteral;
    throw hinmine::ArgumentError("--map-mode must be 'default' or 'paper'");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"hinmine: donation mining on heterogeneous user/video graphs"};
    app.require_subcommand(1);

    // ---------------------------------------------------------------- synth
    auto* synth = app.add_subcommand("synth", "Generate a deterministic synthetic dataset");
    std::string synth_config, synth_out;
    std::uint64_t synth_seed = 0;
    synth->add_option("--config", synth_config, "Config JSON (missing fields keep defaults)");
    synth->add_option("--seed", synth_seed, "Generator seed")->required();
    synth->add_option("--out", synth_out, "Output directory")->required();

    // --------------------------------------------------------------- ingest
    auto* ingest = app.add_subcommand("ingest", "Validate input files and write a summary");
    GraphInputs ingest_in;
    std::string ingest_out;
    ingest_in.add_options(ingest);
    ingest->add_option("--out", ingest_out, "Output directory")->required();

    // ---------------------------------------------------------------- stats
    auto* stats = app.add_subcommand("stats", "Write the characterization report");
    GraphInputs stats_in;
    std::string stats_out;
    stats_in.add_options(stats);
    stats->add_option("--out", stats_out, "Output directory")->required();

    // ----------------------------------------------------------------- walk
    auto* walk = app.add_subcommand("walk", "Generate a meta-path random walk corpus");
    GraphInputs walk_in;
    std::string walk_metapath = "U-U-V-U-U", walk_out;
    hinmine::WalkParams walk_params;
    std::uint64_t walk_seed = 0;
    walk_in.add_options(walk);
    walk->add_option("--metapath", walk_metapath, "Meta-path, e.g. U-U-V-U-U");
    walk->add_option("--walks-per-node", walk_params.walks_per_node, "Walks per start node");
    walk->add_option("--walk-length", walk_params.walk_length, "Nodes per walk");
    walk->add_option("--workers", walk_params.workers, "Worker threads");
    walk->add_option("--seed", walk_seed, "Walk seed")->required();
    walk->add_option("--out", walk_out, "Corpus output file")->required();

    // ---------------------------------------------------------------- embed
    auto* embed = app.add_subcommand("embed", "Train node embeddings from a walk corpus");
    GraphInputs embed_in;
    std::string embed_model = "metapath2vec", embed_corpus, embed_out, embed_mp_out;
    std::string embed_metapath = "U-U-V-U-U";
    hinmine::SgnsParams sgns_params;
    hinmine::Hin2vecParams h2v_params;
    hinmine::WalkParams embed_walk_params;
    std::uint64_t embed_seed = 0;
    std::uint32_t embed_workers = 1;
    embed_in.add_options(embed);
    embed->add_option("--model", embed_model, "metapath2vec or hin2vec");
    embed->add_option("--corpus", embed_corpus,
                      "Walk corpus file (generated internally when omitted)");
    embed->add_option("--metapath", embed_metapath, "Meta-path for internal walk generation");
    embed->add_option("--walks-per-node", embed_walk_params.walks_per_node, "Walks per node");
    embed->add_option("--walk-length", embed_walk_params.walk_length, "Nodes per walk");
    embed->add_option("--dim", sgns_params.dim, "Embedding dimension");
    embed->add_option("--window", sgns_params.window, "Skip-gram window");
    embed->add_option("--negatives", sgns_params.negatives, "Negative samples per pair");
    embed->add_option("--epochs", sgns_params.epochs, "Training epochs");
    embed->add_option("--lr", sgns_params.learning_rate, "Initial learning rate");
    embed->add_option("--max-hops", h2v_params.max_hops, "hin2vec relation hop limit");
    embed->add_option("--workers", embed_workers, "Worker threads");
    embed->add_option("--seed", embed_seed, "Training seed")->required();
    embed->add_option("--out", embed_out, "Embeddings output file")->required();
    embed->add_option("--metapath-vectors-out", embed_mp_out,
                      "hin2vec meta-path vector output file");

    // ------------------------------------------------------------------- mf
    auto* mf = app.add_subcommand("mf", "Train a matrix factorization baseline");
    GraphInputs mf_in;
    std::string mf_model = "pmf", mf_out;
    hinmine::MfParams mf_params;
    std::int64_t mf_cutoff = -1;
    std::uint64_t mf_seed = 0;
    mf_in.add_options(mf);
    mf->add_option("--model", mf_model, "pmf or cmf");
    mf->add_option("--rank", mf_params.rank, "Factor rank");
    mf->add_option("--reg", mf_params.reg, "L2 regularization");
    mf->add_option("--alpha", mf_params.alpha, "CMF donation-loss weight");
    mf->add_option("--epochs", mf_params.epochs, "SGD epochs");
    mf->add_option("--lr", mf_params.learning_rate, "Learning rate");
    mf->add_option("--neg-ratio", mf_params.neg_ratio, "Sampled zeros per positive");
    mf->add_option("--cutoff", mf_cutoff, "Train on the snapshot at this timestamp");
    mf->add_option("--seed", mf_seed, "Training seed")->required();
    mf->add_option("--out", mf_out, "Factors output file")->required();

    // -------------------------------------------------------------- predict
    auto* predict = app.add_subcommand("predict", "Run the donation prediction experiment");
    GraphInputs predict_in;
    std::string predict_groups = "past_popularity,past_donation,both";
    std::string predict_out, predict_model_out;
    hinmine::ForestParams predict_forest;
    std::int64_t predict_cutoff = 0, predict_horizon = 7;
    std::uint64_t predict_seed = 0;
    predict_in.add_options(predict);
    predict->add_option("--cutoff", predict_cutoff, "Snapshot cutoff timestamp")->required();
    predict->add_option("--horizon", predict_horizon, "Label window length in days");
    predict->add_option("--groups", predict_groups, "Comma-separated feature groups");
    predict->add_option("--trees", predict_forest.n_trees, "Forest size");
    predict->add_option("--max-depth", predict_forest.max_depth, "Tree depth cap (-1 unlimited)");
    predict->add_option("--mtry", predict_forest.mtry, "Columns per split (0 = sqrt)");
    predict->add_option("--min-leaf", predict_forest.min_leaf, "Minimum rows per leaf");
    predict->add_option("--workers", predict_forest.workers, "Worker threads");
    predict->add_option("--seed", predict_seed, "Experiment seed")->required();
    predict->add_option("--out", predict_out, "Output directory")->required();
    predict->add_option("--save-model", predict_model_out, "Save the all-features forest");

    // ------------------------------------------------------------ recommend
    auto* recommend = app.add_subcommand("recommend", "Run the donation recommendation experiment");
    GraphInputs rec_in;
    hinmine::RecParams rec_params;
    std::string rec_methods = "pmf,cmf,metapath2vec,hin2vec";
    std::string rec_k = "5,20,50,100", rec_map_mode = "default", rec_out;
    std::string rec_emb_m2v, rec_emb_h2v;
    std::int64_t rec_cutoff = 0, rec_horizon = 7;
    rec_in.add_options(recommend);
    recommend->add_option("--methods", rec_methods,
                          "Comma-separated subset of pmf,cmf,metapath2vec,hin2vec,random");
    recommend->add_option("--cutoff", rec_cutoff, "Snapshot cutoff timestamp")->required();
    recommend->add_option("--horizon", rec_horizon, "Label window length in days");
    recommend->add_option("--k", rec_k, "Comma-separated recall/MAP depths");
    recommend->add_option("--map-mode", rec_map_mode, "default or paper");
    recommend->add_option("--metapath", rec_params.metapath, "Walk meta-path");
    recommend->add_option("--walks-per-node", rec_params.walks.walks_per_node, "Walks per node");
    recommend->add_option("--walk-length", rec_params.walks.walk_length, "Nodes per walk");
    recommend->add_option("--dim", rec_params.sgns.dim, "Embedding dimension (both NRL models)");
    recommend->add_option("--window", rec_params.sgns.window, "Skip-gram window");
    recommend->add_option("--negatives", rec_params.sgns.negatives, "SGNS negatives");
    recommend->add_option("--epochs", rec_params.sgns.epochs, "SGNS epochs");
    recommend->add_option("--h2v-epochs", rec_params.hin2vec.epochs, "hin2vec epochs");
    recommend->add_option("--h2v-negatives", rec_params.hin2vec.negatives, "hin2vec negatives");
    recommend->add_option("--max-hops", rec_params.hin2vec.max_hops, "hin2vec hop limit");
    recommend->add_option("--rank", rec_params.mf.rank, "MF rank");
    recommend->add_option("--mf-epochs", rec_params.mf.epochs, "MF epochs");
    recommend->add_option("--alpha", rec_params.mf.alpha, "CMF donation-loss weight");
    recommend->add_option("--trees", rec_params.ranker.n_trees, "Ranking forest size");
    recommend->add_option("--ranker-depth", rec_params.ranker.max_depth, "Ranking forest depth");
    recommend->add_option("--neg-per-pos", rec_params.neg_per_pos, "Ranking negatives per positive");
    recommend->add_option("--max-train-positives", rec_params.max_train_positives,
                          "Ranking forest positive-pair cap");
    recommend->add_option("--hops", rec_params.candidate_hops, "Candidate neighborhood radius");
    recommend->add_option("--embeddings-m2v", rec_emb_m2v, "Reuse metapath2vec embeddings");
    recommend->add_option("--embeddings-h2v", rec_emb_h2v, "Reuse hin2vec embeddings");
    recommend->add_option("--workers", rec_params.workers, "Worker threads");
    recommend->add_option("--seed", rec_params.seed, "Experiment seed")->required();
    recommend->add_option("--out", rec_out, "Output directory")->required();

    // ----------------------------------------------------------------- eval
    auto* eval = app.add_subcommand("eval", "Compute MAP/recall@k from ranking dumps");
    GraphInputs eval_in;
    std::vector<std::string> eval_rankings;
    std::string eval_k = "5,20,50,100", eval_map_mode = "default", eval_out;
    eval_in.add_options(eval);
    eval->add_option("--rankings", eval_rankings, "Ranking dump files")->required();
    eval->add_option("--k", eval_k, "Comma-separated recall/MAP depths");
    eval->add_option("--map-mode", eval_map_mode, "default or paper");
    eval->add_option("--out", eval_out, "Output directory")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : kUsageError;
    }

    try {
        if (synth->parsed()) {
            ManifestWriter mf_out_w("synth");
            hinmine::SynthConfig config;
            if (!synth_config.empty()) {
                mf_out_w.input(synth_config);
                config = hinmine::load_synth_config(synth_config);
            }
            config.seed = synth_seed;
            mf_out_w.seed(synth_seed);
            mf_out_w.param("n_users", config.n_users);
            mf_out_w.param("n_videos", config.n_videos);
            mf_out_w.param("n_communities", config.n_communities);
            mf_out_w.param("follower_exponent", config.follower_exponent);
            mf_out_w.param("intra_community_donation_bias", config.intra_community_donation_bias);
            mf_out_w.param("donation_volume", config.donation_volume);
            mf_out_w.param("window_fraction", config.window_fraction);
            hinmine::SynthData data = hinmine::generate_synth(config);
            hinmine::write_synth(synth_out, data, config);
            mf_out_w.output(std::filesystem::path(synth_out) / "nodes.csv");
            mf_out_w.output(std::filesystem::path(synth_out) / "edges.csv");
            mf_out_w.output(std::filesystem::path(synth_out) / "manifest.json");
            mf_out_w.note("cutoff", data.cutoff);
            mf_out_w.note("horizon_days", data.horizon_days);
            mf_out_w.write(std::filesystem::path(synth_out) / "run_manifest.json");
            std::cout << "synth: " << data.nodes.size() << " nodes, " << data.edges.size()
                      << " edges -> " << synth_out << "\n";
        } else if (ingest->parsed()) {
            ManifestWriter mfw("ingest");
            hinmine::HinGraph g = ingest_in.load(mfw);
            std::filesystem::create_directories(ingest_out);
            nlohmann::json summary;
            summary["users"] = g.n_of_kind(hinmine::NodeKind::User);
            summary["videos"] = g.n_of_kind(hinmine::NodeKind::Video);
            summary["follow_edges"] = g.edge_count(hinmine::EdgeKind::Follow);
            summary["donate_edges"] = g.edge_count(hinmine::EdgeKind::Donate);
            std::ofstream out(std::filesystem::path(ingest_out) / "summary.json");
            out << summary.dump(2) << '\n';
            mfw.output(std::filesystem::path(ingest_out) / "summary.json");
            mfw.write(std::filesystem::path(ingest_out) / "run_manifest.json");
            std::cout << summary.dump(2) << "\n";
        } else if (stats->parsed()) {
            ManifestWriter mfw("stats");
            hinmine::HinGraph g = stats_in.load(mfw);
            hinmine::CharacterizationReport report = hinmine::characterization_report(g);
            hinmine::write_characterization_report(stats_out, report);
            mfw.output(std::filesystem::path(stats_out) / "srcc.csv");
            mfw.write(std::filesystem::path(stats_out) / "run_manifest.json");
            std::cout << "stats: " << report.curves.size() << " curves, " << report.srcc.size()
                      << " SRCC cells -> " << stats_out << "\n";
        } else if (walk->parsed()) {
            ManifestWriter mfw("walk");
            hinmine::HinGraph g = walk_in.load(mfw);
            walk_params.seed = walk_seed;
            mfw.seed(walk_seed);
            mfw.param("metapath", walk_metapath);
            mfw.param("walks_per_node", walk_params.walks_per_node);
            mfw.param("walk_length", walk_params.walk_length);
            hinmine::MetaPath mp = hinmine::parse_metapath(walk_metapath);
            hinmine::WalkCorpus corpus = hinmine::generate_walks(g, mp, walk_params);
            if (corpus.no_start_nodes)
                std::cerr << "warning: no node matches the start of " << walk_metapath << "\n";
            hinmine::write_corpus(walk_out, corpus, g);
            mfw.output(walk_out);
            auto parent = std::filesystem::path(walk_out).parent_path();
            mfw.write((parent.empty() ? std::filesystem::path(".") : parent) /
                      "run_manifest.json");
            std::cout << "walk: " << corpus.walks.size() << " walks -> " << walk_out << "\n";
        } else if (embed->parsed()) {
            ManifestWriter mfw("embed");
            hinmine::HinGraph g = embed_in.load(mfw);
            mfw.seed(embed_seed);
            mfw.param("model", embed_model);
            mfw.param("dim", sgns_params.dim);
            mfw.param("epochs", sgns_params.epochs);
            mfw.param("negatives", sgns_params.negatives);
            mfw.param("lr", sgns_params.learning_rate);

            hinmine::WalkCorpus corpus;
            if (!embed_corpus.empty()) {
                mfw.input(embed_corpus);
                corpus = hinmine::read_corpus(embed_corpus, g);
            } else {
                embed_walk_params.seed = embed_seed;
                embed_walk_params.workers = embed_workers;
                corpus = hinmine::generate_walks(g, hinmine::parse_metapath(embed_metapath),
                                                 embed_walk_params);
            }

            if (embed_model == "metapath2vec") {
                sgns_params.seed = embed_seed;
                sgns_params.workers = embed_workers;
                mfw.param("window", sgns_params.window);
                hinmine::EmbeddingSet emb = hinmine::train_metapath2vec(g, corpus, sgns_params);
                hinmine::write_embeddings(embed_out, emb, g);
            } else if (embed_model == "hin2vec") {
                h2v_params.dim = sgns_params.dim;
                h2v_params.negatives = sgns_params.negatives;
                h2v_params.epochs = sgns_params.epochs;
                h2v_params.learning_rate = sgns_params.learning_rate;
                h2v_params.seed = embed_seed;
                h2v_params.workers = embed_workers;
                mfw.param("max_hops", h2v_params.max_hops);
                auto registry =
                    hinmine::enumerate_sub_metapaths(corpus.metapath, h2v_params.max_hops);
                auto [emb, rels] = hinmine::train_hin2vec(g, registry, corpus, h2v_params);
                hinmine::write_embeddings(embed_out, emb, g);
                if (!embed_mp_out.empty()) {
                    hinmine::write_metapath_embeddings(embed_mp_out, rels);
                    mfw.output(embed_mp_out);
                }
            } else {
                throw hinmine::ArgumentError("--model must be metapath2vec or hin2vec");
            }
            mfw.output(embed_out);
            auto parent = std::filesystem::path(embed_out).parent_path();
            mfw.write((parent.empty() ? std::filesystem::path(".") : parent) /
                      "run_manifest.json");
            std::cout << "embed: " << embed_model << " -> " << embed_out << "\n";
        } else if (mf->parsed()) {
            ManifestWriter mfw("mf");
            hinmine::HinGraph g = mf_in.load(mfw);
            mf_params.seed = mf_seed;
            mfw.seed(mf_seed);
            mfw.param("model", mf_model);
            mfw.param("rank", mf_params.rank);
            mfw.param("epochs", mf_params.epochs);
            hinmine::HinGraph snapshot = g;
            if (mf_cutoff >= 0) {
                auto [snap, window] = g.snapshot_split(mf_cutoff, 1);
                snapshot = std::move(snap);
                mfw.param("cutoff", mf_cutoff);
            }
            hinmine::SparseMatrix m_uv =
                hinmine::build_interaction_matrix(snapshot, hinmine::EdgeKind::Donate);
            hinmine::Factors factors;
            if (mf_model == "pmf") {
                factors = hinmine::train_pmf(m_uv, mf_params);
            } else if (mf_model == "cmf") {
                hinmine::SparseMatrix m_uu =
                    hinmine::build_interaction_matrix(snapshot, hinmine::EdgeKind::Follow);
                factors = hinmine::train_cmf(m_uv, m_uu, mf_params);
            } else {
                throw hinmine::ArgumentError("--model must be pmf or cmf");
            }
            hinmine::write_factors(mf_out, factors, snapshot, hinmine::NodeKind::User,
                                   hinmine::NodeKind::Video);
            mfw.output(mf_out);
            auto parent = std::filesystem::path(mf_out).parent_path();
            mfw.write((parent.empty() ? std::filesystem::path(".") : parent) /
                      "run_manifest.json");
            std::cout << "mf: " << mf_model << " rank " << mf_params.rank << " -> " << mf_out
                      << "\n";
        } else if (predict->parsed()) {
            ManifestWriter mfw("predict");
            hinmine::HinGraph g = predict_in.load(mfw);
            predict_forest.seed = predict_seed;
            mfw.seed(predict_seed);
            mfw.param("cutoff", predict_cutoff);
            mfw.param("horizon", predict_horizon);
            mfw.param("groups", predict_groups);
            mfw.param("trees", predict_forest.n_trees);
            mfw.param("max_depth", predict_forest.max_depth);
            mfw.param("mtry", predict_forest.mtry);
            mfw.param("min_leaf", predict_forest.min_leaf);
            auto [snapshot, window] = g.snapshot_split(predict_cutoff, predict_horizon);
            hinmine::PredictionReport report = hinmine::run_prediction(
                snapshot, window, parse_name_list(predict_groups), predict_forest, predict_seed);
            hinmine::write_prediction_report(predict_out, report);
            mfw.output(std::filesystem::path(predict_out) / "prediction_report.csv");
            mfw.note("n_videos", report.n_videos);
            mfw.note("n_positive", report.n_positive);
            mfw.note("n_negative", report.n_negative);
            mfw.write(std::filesystem::path(predict_out) / "run_manifest.json");
            for (const auto& gres : report.groups)
                std::cout << "predict: " << gres.group << " AUC " << gres.auc << "\n";
        } else if (recommend->parsed()) {
            ManifestWriter mfw("recommend");
            hinmine::HinGraph g = rec_in.load(mfw);
            rec_params.methods = parse_name_list(rec_methods);
            rec_params.ks = parse_k_list(rec_k);
            rec_params.map_mode = parse_map_mode(rec_map_mode);
            mfw.seed(rec_params.seed);
            mfw.param("methods", rec_methods);
            mfw.param("cutoff", rec_cutoff);
            mfw.param("horizon", rec_horizon);
            mfw.param("k", rec_k);
            mfw.param("map_mode", rec_map_mode);
            mfw.param("metapath", rec_params.metapath);
            mfw.param("dim", rec_params.sgns.dim);
            mfw.param("walks_per_node", rec_params.walks.walks_per_node);
            mfw.param("walk_length", rec_params.walks.walk_length);
            mfw.param("sgns_epochs", rec_params.sgns.epochs);
            mfw.param("hin2vec_epochs", rec_params.hin2vec.epochs);
            mfw.param("mf_rank", rec_params.mf.rank);
            mfw.param("mf_epochs", rec_params.mf.epochs);
            mfw.param("ranker_trees", rec_params.ranker.n_trees);
            mfw.param("ranker_depth", rec_params.ranker.max_depth);
            mfw.param("neg_per_pos", rec_params.neg_per_pos);
            mfw.param("candidate_hops", rec_params.candidate_hops);

            hinmine::EmbeddingSet pre_m2v, pre_h2v;
            if (!rec_emb_m2v.empty()) {
                mfw.input(rec_emb_m2v);
                pre_m2v = hinmine::read_embeddings(rec_emb_m2v, g);
                rec_params.pretrained_metapath2vec = &pre_m2v;
            }
            if (!rec_emb_h2v.empty()) {
                mfw.input(rec_emb_h2v);
                pre_h2v = hinmine::read_embeddings(rec_emb_h2v, g);
                rec_params.pretrained_hin2vec = &pre_h2v;
            }

            std::map<std::string, std::vector<hinmine::RankedList>> rankings;
            hinmine::EvalReport report =
                hinmine::run_recommendation(g, rec_cutoff, rec_horizon, rec_params, &rankings);

            std::filesystem::create_directories(rec_out);
            hinmine::write_eval_report(std::filesystem::path(rec_out) / "eval_report.csv",
                                       report);
            mfw.output(std::filesystem::path(rec_out) / "eval_report.csv");
            std::size_t top_cap = static_cast<std::size_t>(
                *std::max_element(rec_params.ks.begin(), rec_params.ks.end()));
            for (const auto& [method, lists] : rankings) {
                auto path = std::filesystem::path(rec_out) / ("rankings_" + method + ".tsv");
                hinmine::write_rankings(path, method, lists, g, top_cap);
                mfw.output(path);
            }
            for (const auto& row : report.rows) {
                mfw.note("n_queries", row.n_queries);
                if (row.failed) mfw.note("error_" + row.method, row.error);
            }
            mfw.write(std::filesystem::path(rec_out) / "run_manifest.json");
            for (const auto& row : report.rows) {
                std::cout << "recommend: " << row.method;
                if (row.failed) {
                    std::cout << " FAILED: " << row.error;
                } else {
                    for (int k : report.ks)
                        std::cout << " recall@" << k << "=" << row.recall_at.at(k);
                }
                std::cout << "\n";
            }
        } else if (eval->parsed()) {
            ManifestWriter mfw("eval");
            hinmine::HinGraph g = eval_in.load(mfw);
            hinmine::EvalReport report;
            report.ks = parse_k_list(eval_k);
            report.mode = parse_map_mode(eval_map_mode);
            mfw.param("k", eval_k);
            mfw.param("map_mode", eval_map_mode);
            for (const std::string& path : eval_rankings) {
                mfw.input(path);
                std::string method;
                std::vector<hinmine::RankedList> lists =
                    hinmine::read_rankings(path, g, &method);
                hinmine::EvalRow row = hinmine::rank_metrics(lists, report.ks, report.mode);
                row.method = method.empty() ? path : method;
                report.rows.push_back(std::move(row));
            }
            std::filesystem::create_directories(eval_out);
            hinmine::write_eval_report(std::filesystem::path(eval_out) / "metrics.csv", report);
            mfw.output(std::filesystem::path(eval_out) / "metrics.csv");
            mfw.write(std::filesystem::path(eval_out) / "run_manifest.json");
            std::cout << "eval: " << report.rows.size() << " methods -> " << eval_out << "\n";
        }
    } catch (const hinmine::ArgumentError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kUsageError;
    } catch (const hinmine::TaskError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kTaskError;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDataError;
    }
    return 0;
}
