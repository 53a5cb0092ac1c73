#include <doctest.h>

#include <cstdlib>
#include <string>

#include "support/tmpdir.hpp"

using testsup::TmpDir;
using testsup::slurp;

namespace {

int run_cli(const std::string& args, const std::filesystem::path& log) {
    std::string cmd = std::string(HINMINE_CLI_PATH) + " " + args + " > " + log.string() +
                      " 2>&1";
    int rc = std::system(cmd.c_str());
    return WEXITSTATUS(rc);
}

std::string small_config_json() {
    return "{\"n_users\": 500, \"n_videos\": 40, \"n_communities\": 8,\n"
           " \"donation_volume\": 1400, \"window_fraction\": 0.3}";
}

} // namespace

TEST_CASE("cli: synth writes the dataset and is byte-deterministic") {
    TmpDir tmp("cli_synth");
    auto cfg = tmp.write("c.json", small_config_json());
    int rc = run_cli("synth --config " + cfg.string() + " --seed 7 --out " +
                         (tmp.path() / "a").string(),
                     tmp.file("log_a.txt"));
    REQUIRE(rc == 0);
    CHECK(std::filesystem::exists(tmp.path() / "a" / "nodes.csv"));
    CHECK(std::filesystem::exists(tmp.path() / "a" / "edges.csv"));
    CHECK(std::filesystem::exists(tmp.path() / "a" / "manifest.json"));
    CHECK(std::filesystem::exists(tmp.path() / "a" / "run_manifest.json"));

    rc = run_cli("synth --config " + cfg.string() + " --seed 7 --out " +
                     (tmp.path() / "b").string(),
                 tmp.file("log_b.txt"));
    REQUIRE(rc == 0);
    CHECK(slurp(tmp.path() / "a" / "nodes.csv") == slurp(tmp.path() / "b" / "nodes.csv"));
    CHECK(slurp(tmp.path() / "a" / "edges.csv") == slurp(tmp.path() / "b" / "edges.csv"));
    CHECK(slurp(tmp.path() / "a" / "manifest.json") == slurp(tmp.path() / "b" / "manifest.json"));
}

TEST_CASE("cli: usage errors exit 1") {
    TmpDir tmp("cli_usage");
    CHECK(run_cli("frobnicate", tmp.file("log1.txt")) == 1);
    CHECK(run_cli("synth --out " + tmp.path().string(), tmp.file("log2.txt")) == 1); // no seed
    std::string log = slurp(tmp.file("log1.txt"));
    CHECK(log.find("subcommand") != std::string::npos);
}

TEST_CASE("cli: data errors exit 2, task errors exit 3") {
    TmpDir tmp("cli_err");
    auto nodes = tmp.write("nodes.csv", "u1,User,{}\nu1,User,{}\n"); // duplicate
    auto edges = tmp.write("edges.csv", "");
    int rc = run_cli("ingest --nodes " + nodes.string() + " --edges " + edges.string() +
                         " --out " + (tmp.path() / "out").string(),
                     tmp.file("log.txt"));
    CHECK(rc == 2);
    std::string log = slurp(tmp.file("log.txt"));
    CHECK(log.find(":2") != std::string::npos); // the offending line

    // an empty window makes recommend a task error
    auto n2 = tmp.write("n2.csv", "u1,User,{}\nv1,Video,{}\n");
    auto e2 = tmp.write("e2.csv", "u1,v1,Donate,1,5\n");
    rc = run_cli("recommend --nodes " + n2.string() + " --edges " + e2.string() +
                     " --methods random --cutoff 100 --horizon 7 --seed 1 --out " +
                     (tmp.path() / "rec").string(),
                 tmp.file("log3.txt"));
    CHECK(rc == 3);
}

TEST_CASE("cli: ingest summary counts") {
    TmpDir tmp("cli_ingest");
    auto cfg = tmp.write("c.json", small_config_json());
    REQUIRE(run_cli("synth --config " + cfg.string() + " --seed 3 --out " +
                        (tmp.path() / "data").string(),
                    tmp.file("log.txt")) == 0);
    int rc = run_cli("ingest --graph " + (tmp.path() / "data").string() + " --out " +
                         (tmp.path() / "sum").string(),
                     tmp.file("log2.txt"));
    REQUIRE(rc == 0);
    std::string summary = slurp(tmp.path() / "sum" / "summary.json");
    CHECK(summary.find("\"users\": 500") != std::string::npos);
    CHECK(summary.find("\"videos\": 40") != std::string::npos);
}

TEST_CASE("cli: stats emits curves and the SRCC matrix") {
    TmpDir tmp("cli_stats");
    auto cfg = tmp.write("c.json", small_config_json());
    REQUIRE(run_cli("synth --config " + cfg.string() + " --seed 5 --out " +
                        (tmp.path() / "data").string(),
                    tmp.file("log.txt")) == 0);
    int rc = run_cli("stats --graph " + (tmp.path() / "data").string() + " --out " +
                         (tmp.path() / "rep").string(),
                     tmp.file("log2.txt"));
    REQUIRE(rc == 0);
    CHECK(std::filesystem::exists(tmp.path() / "rep" / "srcc.csv"));
    CHECK(std::filesystem::exists(tmp.path() / "rep" / "curve_video_views_cdf.csv"));
    std::string srcc = slurp(tmp.path() / "rep" / "srcc.csv");
    CHECK(srcc.find("srcc,views,subscriptions,danmus,age") == 0);
}

TEST_CASE("cli: walk then embed on the corpus") {
    TmpDir tmp("cli_walk");
    auto cfg = tmp.write("c.json", small_config_json());
    REQUIRE(run_cli("synth --config " + cfg.string() + " --seed 2 --out " +
                        (tmp.path() / "data").string(),
                    tmp.file("log.txt")) == 0);
    std::string data = (tmp.path() / "data").string();
    int rc = run_cli("walk --graph " + data +
                         " --metapath U-U-V-U-U --walks-per-node 2 --walk-length 12"
                         " --seed 4 --out " +
                         (tmp.path() / "walks.txt").string(),
                     tmp.file("log2.txt"));
    REQUIRE(rc == 0);
    std::string corpus = slurp(tmp.path() / "walks.txt");
    CHECK(corpus.rfind("# metapath=U-U-V-U-U", 0) == 0);

    rc = run_cli("embed --graph " + data + " --corpus " + (tmp.path() / "walks.txt").string() +
                     " --model metapath2vec --dim 12 --epochs 2 --seed 4 --out " +
                     (tmp.path() / "emb.txt").string(),
                 tmp.file("log3.txt"));
    REQUIRE(rc == 0);
    std::string emb = slurp(tmp.path() / "emb.txt");
    CHECK(emb.rfind("540 12", 0) == 0); // 500 users + 40 videos

    rc = run_cli("embed --graph " + data + " --corpus " + (tmp.path() / "walks.txt").string() +
                     " --model hin2vec --dim 8 --epochs 1 --seed 4 --out " +
                     (tmp.path() / "emb_h.txt").string() + " --metapath-vectors-out " +
                     (tmp.path() / "rels.txt").string(),
                 tmp.file("log4.txt"));
    REQUIRE(rc == 0);
    CHECK(std::filesystem::exists(tmp.path() / "rels.txt"));
}

TEST_CASE("cli: mf trains and writes factors") {
    TmpDir tmp("cli_mf");
    auto cfg = tmp.write("c.json", small_config_json());
    REQUIRE(run_cli("synth --config " + cfg.string() + " --seed 6 --out " +
                        (tmp.path() / "data").string(),
                    tmp.file("log.txt")) == 0);
    int rc = run_cli("mf --graph " + (tmp.path() / "data").string() +
                         " --model cmf --rank 8 --epochs 3 --cutoff 360 --seed 6 --out " +
                         (tmp.path() / "factors.txt").string(),
                     tmp.file("log2.txt"));
    REQUIRE(rc == 0);
    std::string factors = slurp(tmp.path() / "factors.txt");
    CHECK(factors.rfind("role row 500 8", 0) == 0);
    CHECK(factors.find("role col 40 8") != std::string::npos);
    CHECK(factors.find("role context 500 8") != std::string::npos);
}

TEST_CASE("cli: predict writes the report and reruns byte-identically") {
    TmpDir tmp("cli_predict");
    auto cfg = tmp.write("c.json", small_config_json());
    REQUIRE(run_cli("synth --config " + cfg.string() + " --seed 9 --out " +
                        (tmp.path() / "data").string(),
                    tmp.file("log.txt")) == 0);
    std::string base = "predict --graph " + (tmp.path() / "data").string() +
                       " --cutoff 360 --horizon 7 --trees 40 --seed 9 --out ";
    REQUIRE(run_cli(base + (tmp.path() / "p1").string(), tmp.file("log2.txt")) == 0);
    REQUIRE(run_cli(base + (tmp.path() / "p2").string(), tmp.file("log3.txt")) == 0);
    std::string r1 = slurp(tmp.path() / "p1" / "prediction_report.csv");
    CHECK(r1.find("group,auc,n_train,n_test") == 0);
    CHECK(r1 == slurp(tmp.path() / "p2" / "prediction_report.csv"));
    CHECK(slurp(tmp.path() / "p1" / "importances.csv") ==
          slurp(tmp.path() / "p2" / "importances.csv"));
}

TEST_CASE("cli: recommend then eval round-trips the metrics") {
    TmpDir tmp("cli_rec");
    auto cfg = tmp.write("c.json", small_config_json());
    REQUIRE(run_cli("synth --config " + cfg.string() + " --seed 12 --out " +
                        (tmp.path() / "data").string(),
                    tmp.file("log.txt")) == 0);
    std::string data = (tmp.path() / "data").string();
    std::string rec = "recommend --graph " + data +
                      " --methods pmf,random --cutoff 360 --horizon 7 --k 5,20,50,100"
                      " --dim 12 --walks-per-node 2 --walk-length 12 --epochs 1"
                      " --mf-epochs 5 --trees 10 --seed 12 --out ";
    REQUIRE(run_cli(rec + (tmp.path() / "r1").string(), tmp.file("log2.txt")) == 0);
    REQUIRE(run_cli(rec + (tmp.path() / "r2").string(), tmp.file("log3.txt")) == 0);

    std::string report = slurp(tmp.path() / "r1" / "eval_report.csv");
    CHECK(report.find("method,map@5,recall@5,map@20,recall@20,map@50,recall@50,"
                      "map@100,recall@100") == 0);
    CHECK(report.find("pmf,") != std::string::npos);
    CHECK(report == slurp(tmp.path() / "r2" / "eval_report.csv"));
    CHECK(slurp(tmp.path() / "r1" / "rankings_pmf.tsv") ==
          slurp(tmp.path() / "r2" / "rankings_pmf.tsv"));

    int rc = run_cli("eval --graph " + data + " --rankings " +
                         (tmp.path() / "r1" / "rankings_pmf.tsv").string() +
                         " --k 5,20,50,100 --out " + (tmp.path() / "ev").string(),
                     tmp.file("log4.txt"));
    REQUIRE(rc == 0);
    std::string metrics = slurp(tmp.path() / "ev" / "metrics.csv");
    // the pmf row recomputed from the dump equals the recommend report row
    auto pmf_row = [](const std::string& csv) {
        auto pos = csv.find("pmf,");
        auto end = csv.find('\n', pos);
        return csv.substr(pos, end - pos);
    };
    CHECK(pmf_row(metrics) == pmf_row(report));
}
