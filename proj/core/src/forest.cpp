#include "hinmine/forest.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <thread>

#include "hinmine/rng.hpp"

namespace hinmine {

namespace {

constexpr std::uint64_t kTreeTag = 0x54524545ULL;
constexpr std::uint64_t kBalanceTag = 0x42414c41ULL;

double gini(std::size_t pos, std::size_t n) {
    if (n == 0) return 0.0;
    double p = static_cast<double>(pos) / static_cast<double>(n);
    return 1.0 - p * p - (1.0 - p) * (1.0 - p);
}

struct SplitChoice {
    bool found = false;
    std::size_t column = 0;
    double threshold = 0.0;
    double weighted_gini = 0.0;
    double decrease = 0.0; // parent impurity minus weighted child impurity
};

class TreeBuilder {
public:
    TreeBuilder(const FeatureTable& t, const ForestParams& p, std::uint64_t tree_seed)
        : t_(t), p_(p), rng_(tree_seed) {}

    Tree build() {
        std::vector<std::uint32_t> rows(t_.n_rows());
        if (p_.bootstrap) {
            for (auto& r : rows)
                r = static_cast<std::uint32_t>(rng_.bounded(t_.n_rows()));
        } else {
            std::iota(rows.begin(), rows.end(), 0u);
        }
        total_rows_ = rows.size();
        Tree tree;
        grow(tree, rows, 0);
        return tree;
    }

private:
    std::uint32_t grow(Tree& tree, std::vector<std::uint32_t>& rows, std::int32_t depth) {
        std::uint32_t index = static_cast<std::uint32_t>(tree.nodes.size());
        tree.nodes.emplace_back();

        std::size_t pos = 0;
        for (std::uint32_t r : rows) pos += t_.labels[r];
        double fraction = static_cast<double>(pos) / static_cast<double>(rows.size());

        bool stop = pos == 0 || pos == rows.size() || rows.size() < 2 * p_.min_leaf ||
                    (p_.max_depth >= 0 && depth >= p_.max_depth);
        SplitChoice split;
        if (!stop) split = find_split(rows, pos);
        if (stop || !split.found) {
            tree.nodes[index].is_leaf = true;
            tree.nodes[index].leaf_fraction = fraction;
            return index;
        }

        std::vector<std::uint32_t> left, right;
        left.reserve(rows.size());
        right.reserve(rows.size());
        for (std::uint32_t r : rows) {
            if (t_.at(r, split.column) < split.threshold) left.push_back(r);
            else right.push_back(r);
        }
        rows.clear();
        rows.shrink_to_fit();

        TreeNode& node = tree.nodes[index];
        node.is_leaf = false;
        node.feature = static_cast<std::int32_t>(split.column);
        node.threshold = split.threshold;
        node.leaf_fraction = fraction;
        // weighted by this node's share of the tree's sample
        node.importance_contrib = split.decrease *
                                  static_cast<double>(left.size() + right.size()) /
                                  static_cast<double>(total_rows_);

        std::uint32_t li = grow(tree, left, depth + 1);
        tree.nodes[index].left = li;
        std::uint32_t ri = grow(tree, right, depth + 1);
        tree.nodes[index].right = ri;
        return index;
    }

    SplitChoice find_split(const std::vector<std::uint32_t>& rows, std::size_t pos_total) {
        std::size_t n_cols = t_.n_cols();
        std::uint32_t mtry = p_.mtry == 0
                                 ? static_cast<std::uint32_t>(
                                       std::ceil(std::sqrt(static_cast<double>(n_cols))))
                                 : p_.mtry;
        mtry = std::min<std::uint32_t>(mtry, static_cast<std::uint32_t>(n_cols));

        // sample mtry columns without replacement, then evaluate in
        // ascending order so ties resolve to the lowest column index
        std::vector<std::size_t> cols(n_cols);
        std::iota(cols.begin(), cols.end(), 0);
        for (std::uint32_t i = 0; i < mtry; ++i) {
            std::size_t j = i + static_cast<std::size_t>(rng_.bounded(n_cols - i));
            std::swap(cols[i], cols[j]);
        }
        cols.resize(mtry);
        std::sort(cols.begin(), cols.end());

        const double parent = gini(pos_total, rows.size());
        SplitChoice best;
        std::vector<std::pair<double, std::uint8_t>> vals;
        vals.reserve(rows.size());
        for (std::size_t col : cols) {
            vals.clear();
            for (std::uint32_t r : rows) vals.emplace_back(t_.at(r, col), t_.labels[r]);
            std::sort(vals.begin(), vals.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });

            std::size_t left_n = 0, left_pos = 0;
            for (std::size_t i = 0; i + 1 < vals.size(); ++i) {
                ++left_n;
                left_pos += vals[i].second;
                if (vals[i].first == vals[i + 1].first) continue; // not a boundary
                std::size_t right_n = vals.size() - left_n;
                if (left_n < p_.min_leaf || right_n < p_.min_leaf) continue;
                std::size_t right_pos = pos_total - left_pos;
                double w = (static_cast<double>(left_n) * gini(left_pos, left_n) +
                            static_cast<double>(right_n) * gini(right_pos, right_n)) /
                           static_cast<double>(vals.size());
                double threshold = vals[i].first + 0.5 * (vals[i + 1].first - vals[i].first);
                if (!best.found || w < best.weighted_gini) {
                    best = {true, col, threshold, w, parent - w};
                }
                // ties fall through: first-seen wins, and the scan order is
                // ascending column then ascending threshold
            }
        }
        return best;
    }

    const FeatureTable& t_;
    const ForestParams& p_;
    Rng rng_;
    std::size_t total_rows_ = 0;
};

} // namespace

FeatureTable balance_classes(const FeatureTable& t, std::uint64_t seed) {
    if (!t.has_labels()) throw ArgumentError("balance_classes requires labels");
    std::vector<std::size_t> pos, neg;
    for (std::size_t r = 0; r < t.n_rows(); ++r)
        (t.labels[r] ? pos : neg).push_back(r);
    if (pos.empty() || neg.empty())
        throw ArgumentError("balance_classes: both classes must be nonempty (have " +
                            std::to_string(pos.size()) + " positive, " +
                            std::to_string(neg.size()) + " negative)");

    std::vector<std::size_t>& majority = pos.size() > neg.size() ? pos : neg;
    std::size_t target = std::min(pos.size(), neg.size());
    Rng rng(mix_seed(seed, kBalanceTag));
    rng.shuffle(majority);
    majority.resize(target);

    std::vector<std::size_t> keep;
    keep.reserve(2 * target);
    keep.insert(keep.end(), pos.begin(), pos.end());
    keep.insert(keep.end(), neg.begin(), neg.end());
    std::sort(keep.begin(), keep.end());
    return t.select_rows(keep);
}

ForestModel train_forest(const FeatureTable& t, const ForestParams& params) {
    if (!t.has_labels()) throw ArgumentError("train_forest requires labels");
    if (t.n_rows() < 2) throw ArgumentError("train_forest requires at least 2 rows");
    if (t.n_cols() == 0) throw ArgumentError("train_forest requires at least 1 column");
    if (params.mtry > t.n_cols())
        throw ArgumentError("mtry " + std::to_string(params.mtry) + " exceeds column count " +
                            std::to_string(t.n_cols()));
    if (params.n_trees == 0) throw ArgumentError("train_forest requires n_trees >= 1");
    if (params.min_leaf == 0) throw ArgumentError("train_forest requires min_leaf >= 1");
    t.validate();

    ForestModel model;
    model.columns = t.columns;
    model.params = params;
    model.trees.resize(params.n_trees);

    auto build_one = [&](std::uint32_t i) {
        TreeBuilder builder(t, params, mix_seed(params.seed, kTreeTag, i));
        model.trees[i] = builder.build();
    };

    std::uint32_t workers = std::max<std::uint32_t>(1, params.workers);
    if (workers == 1 || params.n_trees == 1) {
        for (std::uint32_t i = 0; i < params.n_trees; ++i) build_one(i);
    } else {
        std::atomic<std::uint32_t> next{0};
        std::vector<std::thread> pool;
        for (std::uint32_t w = 0; w < std::min(workers, params.n_trees); ++w) {
            pool.emplace_back([&] {
                for (;;) {
                    std::uint32_t i = next.fetch_add(1);
                    if (i >= params.n_trees) return;
                    build_one(i);
                }
            });
        }
        for (auto& th : pool) th.join();
    }
    return model;
}

double ForestModel::score_row(std::span<const double> row) const {
    double sum = 0.0;
    for (const Tree& tree : trees) {
        std::uint32_t i = 0;
        while (!tree.nodes[i].is_leaf) {
            const TreeNode& n = tree.nodes[i];
            i = row[static_cast<std::size_t>(n.feature)] < n.threshold ? n.left : n.right;
        }
        sum += tree.nodes[i].leaf_fraction;
    }
    return sum / static_cast<double>(trees.size());
}

std::vector<double> forest_predict(const ForestModel& m, const FeatureTable& t) {
    if (t.columns != m.columns)
        throw SchemaError("forest_predict: column names do not match the training table");
    std::vector<double> scores(t.n_rows());
    for (std::size_t r = 0; r < t.n_rows(); ++r) scores[r] = m.score_row(t.row(r));
    return scores;
}

double auc(std::span<const double> scores, std::span<const std::uint8_t> labels) {
    if (scores.size() != labels.size())
        throw ArgumentError("auc: scores and labels must have equal length");
    std::uint64_t n_pos = 0;
    for (std::uint8_t l : labels) n_pos += l ? 1 : 0;
    std::uint64_t n_neg = labels.size() - n_pos;
    if (n_pos == 0 || n_neg == 0)
        throw UndefinedMetricError("auc undefined: both classes must be present");

    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    // ascending scan: every positive in a tie group is concordant with all
    // strictly-lower negatives and tied with the group's negatives
    std::uint64_t concordant = 0, tied = 0, neg_below = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        std::uint64_t grp_pos = 0, grp_neg = 0;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) {
            if (labels[order[j]]) ++grp_pos;
            else ++grp_neg;
            ++j;
        }
        concordant += grp_pos * neg_below;
        tied += grp_pos * grp_neg;
        neg_below += grp_neg;
        i = j;
    }
    return (static_cast<double>(concordant) + 0.5 * static_cast<double>(tied)) /
           (static_cast<double>(n_pos) * static_cast<double>(n_neg));
}

std::vector<std::pair<std::string, double>> feature_importances(const ForestModel& m) {
    std::vector<double> totals(m.columns.size(), 0.0);
    for (const Tree& tree : m.trees)
        for (const TreeNode& n : tree.nodes)
            if (!n.is_leaf) totals[static_cast<std::size_t>(n.feature)] += n.importance_contrib;

    double sum = std::accumulate(totals.begin(), totals.end(), 0.0);
    std::vector<std::pair<std::string, double>> out;
    std::vector<std::size_t> order(totals.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t a, std::size_t b) { return totals[a] > totals[b]; });
    for (std::size_t i : order)
        out.emplace_back(m.columns[i], sum > 0.0 ? totals[i] / sum : 0.0);
    return out;
}

void write_forest(const std::filesystem::path& path, const ForestModel& m) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write forest model " + path.string());
    out << "forest n_trees=" << m.trees.size() << " max_depth=" << m.params.max_depth
        << " mtry=" << m.params.mtry << " min_leaf=" << m.params.min_leaf
        << " bootstrap=" << (m.params.bootstrap ? 1 : 0) << " seed=" << m.params.seed << '\n';
    out << "columns";
    for (const std::string& c : m.columns) out << ' ' << c;
    out << '\n';
    char buf[96];
    for (std::size_t t = 0; t < m.trees.size(); ++t) {
        out << "tree " << t << " nodes=" << m.trees[t].nodes.size() << '\n';
        for (const TreeNode& n : m.trees[t].nodes) {
            if (n.is_leaf) {
                std::snprintf(buf, sizeof(buf), "leaf %.17g\n", n.leaf_fraction);
            } else {
                std::snprintf(buf, sizeof(buf), "split %d %.17g %u %u %.17g\n", n.feature,
                              n.threshold, n.left, n.right, n.importance_contrib);
            }
            out << buf;
        }
    }
}

ForestModel read_forest(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open forest model " + path.string());
    ForestModel m;
    std::string line;
    if (!std::getline(in, line) || line.rfind("forest ", 0) != 0)
        throw ParseError(path.string() + ":1: expected 'forest' header");
    {
        std::istringstream hdr(line.substr(7));
        std::string field;
        while (hdr >> field) {
            auto eq = field.find('=');
            if (eq == std::string::npos) continue;
            std::string key = field.substr(0, eq), val = field.substr(eq + 1);
            if (key == "max_depth") m.params.max_depth = std::stoi(val);
            else if (key == "mtry") m.params.mtry = std::stoul(val);
            else if (key == "min_leaf") m.params.min_leaf = std::stoul(val);
            else if (key == "bootstrap") m.params.bootstrap = val == "1";
            else if (key == "seed") m.params.seed = std::stoull(val);
            else if (key == "n_trees") m.params.n_trees = std::stoul(val);
        }
    }
    if (!std::getline(in, line) || line.rfind("columns", 0) != 0)
        throw ParseError(path.string() + ":2: expected 'columns' line");
    {
        std::istringstream cols(line.substr(7));
        std::string c;
        while (cols >> c) m.columns.push_back(c);
    }

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string tok;
        ss >> tok;
        if (tok == "tree") {
            m.trees.emplace_back();
        } else if (tok == "leaf") {
            if (m.trees.empty()) throw ParseError(path.string() + ": node before tree header");
            TreeNode n;
            n.is_leaf = true;
            ss >> n.leaf_fraction;
            m.trees.back().nodes.push_back(n);
        } else if (tok == "split") {
            if (m.trees.empty()) throw ParseError(path.string() + ": node before tree header");
            TreeNode n;
            n.is_leaf = false;
            ss >> n.feature >> n.threshold >> n.left >> n.right >> n.importance_contrib;
            if (!ss) throw ParseError(path.string() + ": malformed split node");
            m.trees.back().nodes.push_back(n);
        } else {
            throw ParseError(path.string() + ": unknown model line '" + tok + "'");
        }
    }
    if (m.trees.empty()) throw ParseError(path.string() + ": model has no trees");
    return m;
}

} // namespace hinmine
