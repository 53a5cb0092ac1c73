#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>

#include "hinmine/forest.hpp"
#include "hinmine/rng.hpp"
#include "support/oracles.hpp"
#include "support/tmpdir.hpp"

using namespace hinmine;

namespace {

FeatureTable make_table(const std::vector<std::string>& cols,
                        const std::vector<std::vector<double>>& rows,
                        const std::vector<std::uint8_t>& labels) {
    FeatureTable t;
    t.columns = cols;
    for (std::size_t i = 0; i < rows.size(); ++i)
        t.add_row("r" + std::to_string(i), rows[i], labels[i]);
    return t;
}

} // namespace

TEST_CASE("balance_classes: downsampling the majority") {
    Rng rng(1);
    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 10; ++i) {
        rows.push_back({static_cast<double>(i)});
        labels.push_back(1);
    }
    for (int i = 0; i < 30; ++i) {
        rows.push_back({static_cast<double>(100 + i)});
        labels.push_back(0);
    }
    FeatureTable t = make_table({"x"}, rows, labels);
    FeatureTable b = balance_classes(t, 7);
    CHECK(b.n_rows() == 20);
    std::size_t pos = 0;
    for (auto l : b.labels) pos += l;
    CHECK(pos == 10);
    // deterministic
    FeatureTable b2 = balance_classes(t, 7);
    CHECK(b.row_ids == b2.row_ids);
    FeatureTable b3 = balance_classes(t, 8);
    CHECK(b.row_ids != b3.row_ids); // overwhelmingly likely under a new seed
}

TEST_CASE("balance_classes: already balanced is unchanged") {
    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 10; ++i) {
        rows.push_back({static_cast<double>(i)});
        labels.push_back(i < 5 ? 1 : 0);
    }
    FeatureTable t = make_table({"x"}, rows, labels);
    FeatureTable b = balance_classes(t, 3);
    CHECK(b.row_ids == t.row_ids);
    CHECK(b.data == t.data);
}

TEST_CASE("balance_classes: extreme imbalance and empty class") {
    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> labels;
    rows.push_back({0.0});
    labels.push_back(1);
    for (int i = 0; i < 100; ++i) {
        rows.push_back({static_cast<double>(i)});
        labels.push_back(0);
    }
    FeatureTable t = make_table({"x"}, rows, labels);
    FeatureTable b = balance_classes(t, 5);
    CHECK(b.n_rows() == 2);

    FeatureTable all_pos = make_table({"x"}, {{1.0}, {2.0}}, {1, 1});
    CHECK_THROWS_AS(balance_classes(all_pos, 1), ArgumentError);
}

TEST_CASE("train_forest: pure labels give pure leaves") {
    FeatureTable t = make_table({"x"}, {{1}, {2}, {3}}, {1, 1, 1});
    ForestParams p{.n_trees = 5, .seed = 2};
    ForestModel m = train_forest(t, p);
    std::vector<double> scores = forest_predict(m, t);
    for (double s : scores) CHECK(s == 1.0);
}

TEST_CASE("train_forest: single threshold separates 1D data") {
    FeatureTable t = make_table({"x"}, {{-2}, {-1}, {-0.5}, {0.5}, {1}, {2}},
                                {0, 0, 0, 1, 1, 1});
    ForestParams p{.n_trees = 1, .max_depth = 1, .mtry = 1, .min_leaf = 1, .bootstrap = false,
                   .seed = 4};
    ForestModel m = train_forest(t, p);
    std::vector<double> scores = forest_predict(m, t);
    for (std::size_t i = 0; i < scores.size(); ++i)
        CHECK((scores[i] >= 0.5) == (t.labels[i] == 1));
}

TEST_CASE("train_forest: XOR dataset reaches training accuracy over 0.95") {
    Rng rng(77);
    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 200; ++i) {
        double a = rng.next_double() * 2.0 - 1.0;
        double b = rng.next_double() * 2.0 - 1.0;
        rows.push_back({a, b});
        labels.push_back((a > 0) != (b > 0) ? 1 : 0);
    }
    FeatureTable t = make_table({"a", "b"}, rows, labels);
    ForestParams p{.n_trees = 50, .max_depth = 4, .mtry = 2, .seed = 10};
    ForestModel m = train_forest(t, p);
    std::vector<double> scores = forest_predict(m, t);
    int correct = 0;
    for (std::size_t i = 0; i < scores.size(); ++i)
        correct += (scores[i] >= 0.5) == (t.labels[i] == 1);
    CHECK(static_cast<double>(correct) / 200.0 > 0.95);
}

TEST_CASE("train_forest: consistent data memorized without bootstrap") {
    Rng rng(123);
    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 80; ++i) {
        rows.push_back({static_cast<double>(rng.bounded(40)),
                        static_cast<double>(rng.bounded(40)), rng.next_double()});
        labels.push_back(static_cast<std::uint8_t>(rng.bounded(2)));
    }
    // deduplicate conflicting feature rows to keep the data consistent
    std::map<std::pair<double, double>, std::uint8_t> first;
    std::vector<std::vector<double>> crows;
    std::vector<std::uint8_t> clabels;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        auto key = std::pair(rows[i][0], rows[i][1]);
        if (first.count(key)) continue;
        first[key] = labels[i];
        crows.push_back(rows[i]);
        clabels.push_back(labels[i]);
    }
    FeatureTable t = make_table({"a", "b", "c"}, crows, clabels);
    ForestParams p{.n_trees = 1, .max_depth = -1, .mtry = 3, .min_leaf = 1, .bootstrap = false,
                   .seed = 5};
    ForestModel m = train_forest(t, p);
    std::vector<double> scores = forest_predict(m, t);
    for (std::size_t i = 0; i < scores.size(); ++i)
        CHECK(scores[i] == (t.labels[i] ? 1.0 : 0.0));
}

TEST_CASE("train_forest: argument validation") {
    FeatureTable t = make_table({"x"}, {{1}, {2}}, {0, 1});
    ForestParams too_many_cols{.mtry = 2};
    too_many_cols.mtry = 5;
    CHECK_THROWS_AS(train_forest(t, too_many_cols), ArgumentError);
    FeatureTable unlabeled;
    unlabeled.columns = {"x"};
    unlabeled.add_row("r", std::vector<double>{1.0});
    CHECK_THROWS_AS(train_forest(unlabeled, ForestParams{}), ArgumentError);
}

TEST_CASE("forest_predict: mean of per-tree leaf fractions") {
    // two manual trees voting 1.0 and 0.0
    ForestModel m;
    m.columns = {"x"};
    Tree t1, t2;
    t1.nodes.push_back(TreeNode{true, -1, 0.0, 0, 0, 1.0, 0.0});
    t2.nodes.push_back(TreeNode{true, -1, 0.0, 0, 0, 0.0, 0.0});
    m.trees = {t1, t2};
    FeatureTable t;
    t.columns = {"x"};
    t.add_row("r", std::vector<double>{3.0});
    std::vector<double> scores = forest_predict(m, t);
    REQUIRE(scores.size() == 1);
    CHECK(scores[0] == 0.5);

    FeatureTable wrong;
    wrong.columns = {"y"};
    wrong.add_row("r", std::vector<double>{3.0});
    CHECK_THROWS_AS(forest_predict(m, wrong), SchemaError);
}

TEST_CASE("forest_predict: scores equal the mean of per-tree outputs") {
    Rng rng(31);
    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 60; ++i) {
        rows.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
        labels.push_back(rows.back()[0] + rows.back()[1] > 1.0 ? 1 : 0);
    }
    FeatureTable t = make_table({"a", "b", "c"}, rows, labels);
    ForestParams p{.n_trees = 9, .max_depth = 5, .seed = 8};
    ForestModel m = train_forest(t, p);
    std::vector<double> scores = forest_predict(m, t);
    for (int trial = 0; trial < 20; ++trial) {
        std::size_t r = rng.bounded(t.n_rows());
        double sum = 0.0;
        for (const Tree& tree : m.trees) {
            std::uint32_t i = 0;
            while (!tree.nodes[i].is_leaf) {
                const TreeNode& n = tree.nodes[i];
                i = t.at(r, static_cast<std::size_t>(n.feature)) < n.threshold ? n.left
                                                                               : n.right;
            }
            sum += tree.nodes[i].leaf_fraction;
        }
        CHECK(scores[r] == doctest::Approx(sum / 9.0).epsilon(1e-12));
    }
}

TEST_CASE("auc: hand examples") {
    std::vector<double> sep = {0.1, 0.2, 0.8, 0.9};
    std::vector<std::uint8_t> lab = {0, 0, 1, 1};
    CHECK(auc(sep, lab) == 1.0);

    std::vector<double> flat = {0.5, 0.5, 0.5, 0.5};
    CHECK(auc(flat, lab) == 0.5);

    std::vector<double> mixed = {0.1, 0.4, 0.35, 0.8};
    std::vector<std::uint8_t> lab2 = {0, 0, 1, 1};
    CHECK(auc(mixed, lab2) == 0.75); // concordant 3 of 4 pairs, no ties

    std::vector<std::uint8_t> single = {1, 1};
    std::vector<double> s2 = {0.1, 0.2};
    CHECK_THROWS_AS(auc(s2, single), UndefinedMetricError);
}

TEST_CASE("auc: invariant under strictly increasing transforms") {
    Rng rng(41);
    std::vector<double> scores;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 300; ++i) {
        scores.push_back(static_cast<double>(rng.bounded(50)));
        labels.push_back(static_cast<std::uint8_t>(rng.bounded(2)));
    }
    double base = auc(scores, labels);
    std::vector<double> squashed;
    for (double s : scores) squashed.push_back(1.0 / (1.0 + std::exp(-s / 10.0)));
    CHECK(auc(squashed, labels) == base); // exact: pair counting sees the same order
}

TEST_CASE("auc: matches the O(n^2) oracle exactly on tied instances") {
    Rng rng(53);
    for (int trial = 0; trial < 120; ++trial) {
        std::size_t n = 2 + rng.bounded(499);
        std::vector<double> scores;
        std::vector<std::uint8_t> labels;
        bool has_pos = false, has_neg = false;
        for (std::size_t i = 0; i < n; ++i) {
            scores.push_back(static_cast<double>(rng.bounded(trial % 2 ? 7 : 1000)));
            labels.push_back(static_cast<std::uint8_t>(rng.bounded(2)));
            (labels.back() ? has_pos : has_neg) = true;
        }
        if (!has_pos || !has_neg) continue;
        CHECK(auc(scores, labels) == testsup::auc_oracle(scores, labels));
    }
}

TEST_CASE("feature_importances: perfect separator takes importance 1") {
    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 40; ++i) {
        double x = i < 20 ? 0.0 : 1.0;
        rows.push_back({x, 5.0}); // second column constant
        labels.push_back(x > 0.5 ? 1 : 0);
    }
    FeatureTable t = make_table({"signal", "noise"}, rows, labels);
    ForestParams p{.n_trees = 20, .mtry = 2, .seed = 3};
    ForestModel m = train_forest(t, p);
    auto imp = feature_importances(m);
    REQUIRE(imp.size() == 2);
    CHECK(imp[0].first == "signal");
    CHECK(imp[0].second == doctest::Approx(1.0));
    CHECK(imp[1].second == doctest::Approx(0.0));
}

TEST_CASE("feature_importances: zero-split forest has zero importances") {
    FeatureTable t = make_table({"x"}, {{1}, {2}}, {0, 1});
    ForestParams p{.n_trees = 3, .max_depth = 0, .seed = 6};
    ForestModel m = train_forest(t, p);
    for (const auto& [col, imp] : feature_importances(m)) CHECK(imp == 0.0);
}

TEST_CASE("feature_importances: normalized to 1 when any split exists") {
    Rng rng(19);
    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 100; ++i) {
        rows.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
        labels.push_back(rows.back()[1] > 0.5 ? 1 : 0);
    }
    FeatureTable t = make_table({"a", "b", "c"}, rows, labels);
    ForestParams p{.n_trees = 10, .seed = 12};
    ForestModel m = train_forest(t, p);
    double sum = 0.0;
    for (const auto& [col, imp] : feature_importances(m)) sum += imp;
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("train_forest: deterministic and worker-count independent") {
    Rng rng(61);
    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 120; ++i) {
        rows.push_back({rng.next_double(), rng.next_double(), rng.next_double(),
                        rng.next_double()});
        labels.push_back(rows.back()[0] > rows.back()[2] ? 1 : 0);
    }
    FeatureTable t = make_table({"a", "b", "c", "d"}, rows, labels);
    ForestParams p{.n_trees = 16, .max_depth = 6, .seed = 14};
    ForestModel m1 = train_forest(t, p);
    ForestParams p4 = p;
    p4.workers = 4;
    ForestModel m4 = train_forest(t, p4);
    REQUIRE(m1.trees.size() == m4.trees.size());
    std::vector<double> s1 = forest_predict(m1, t);
    std::vector<double> s4 = forest_predict(m4, t);
    CHECK(s1 == s4);
    auto i1 = feature_importances(m1);
    auto i4 = feature_importances(m4);
    CHECK(i1 == i4);
}

TEST_CASE("forest serialization round-trip") {
    testsup::TmpDir tmp("forest");
    Rng rng(71);
    std::vector<std::vector<double>> rows;
    std::vector<std::uint8_t> labels;
    for (int i = 0; i < 50; ++i) {
        rows.push_back({rng.next_double(), rng.next_double()});
        labels.push_back(rows.back()[0] > 0.4 ? 1 : 0);
    }
    FeatureTable t = make_table({"a", "b"}, rows, labels);
    ForestParams p{.n_trees = 7, .max_depth = 4, .seed = 2};
    ForestModel m = train_forest(t, p);
    write_forest(tmp.file("model.txt"), m);
    ForestModel loaded = read_forest(tmp.file("model.txt"));
    CHECK(loaded.columns == m.columns);
    CHECK(forest_predict(loaded, t) == forest_predict(m, t));
    CHECK(feature_importances(loaded) == feature_importances(m));
}
