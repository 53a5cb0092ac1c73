#include "hinmine/stats.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <numeric>

namespace hinmine {

namespace {

void require_finite(std::span<const double> v, const char* what) {
    for (double x : v)
        if (!std::isfinite(x)) throw ArgumentError(std::string(what) + " contains a non-finite value");
}

/// Average (fractional) ranks, 1-based.
std::vector<double> average_ranks(std::span<const double> v) {
    std::vector<std::size_t> order(v.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return v[a] < v[b]; });
    std::vector<double> ranks(v.size());
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j + 1 < order.size() && v[order[j + 1]] == v[order[i]]) ++j;
        double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

double pearson(std::span<const double> x, std::span<const double> y) {
    std::size_t n = x.size();
    double mx = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    double my = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        double dx = x[i] - mx, dy = y[i] - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if (sxx == 0.0 || syy == 0.0)
        throw UndefinedMetricError("correlation undefined: zero rank variance");
    return sxy / std::sqrt(sxx * syy);
}

std::vector<double> video_attr_column(const HinGraph& g, const std::string& attr) {
    std::vector<double> col;
    col.reserve(g.n_of_kind(NodeKind::Video));
    for (std::uint32_t id : g.members(NodeKind::Video)) {
        const AttrMap& attrs = g.node(id).attrs;
        auto it = attrs.find(attr);
        if (it == attrs.end())
            throw SchemaError("video '" + g.external_id(id) + "' is missing attribute column '" +
                              attr + "'");
        col.push_back(static_cast<double>(it->second));
    }
    return col;
}

} // namespace

DistributionCurve distribution_curve(std::span<const double> values, CurveMode mode) {
    if (values.empty()) throw ArgumentError("distribution_curve: empty input");
    require_finite(values, "distribution_curve input");

    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    const double n = static_cast<double>(sorted.size());

    DistributionCurve curve;
    curve.mode = mode;
    std::size_t i = 0;
    while (i < sorted.size()) {
        std::size_t j = i;
        while (j + 1 < sorted.size() && sorted[j + 1] == sorted[i]) ++j;
        double fraction = mode == CurveMode::CDF
                              ? static_cast<double>(j + 1) / n            // P[X <= v]
                              : static_cast<double>(sorted.size() - i) / n; // P[X >= v]
        curve.points.emplace_back(sorted[i], fraction);
        i = j + 1;
    }
    return curve;
}

double spearman_rcc(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size())
        throw ArgumentError("spearman_rcc: length mismatch (" + std::to_string(x.size()) +
                            " vs " + std::to_string(y.size()) + ")");
    if (x.size() < 2) throw ArgumentError("spearman_rcc: need at least 2 samples");
    require_finite(x, "spearman_rcc x");
    require_finite(y, "spearman_rcc y");
    std::vector<double> rx = average_ranks(x);
    std::vector<double> ry = average_ranks(y);
    return pearson(rx, ry);
}

double tail_slope(const DistributionCurve& curve, double xmin) {
    if (curve.mode != CurveMode::CCDF)
        throw ArgumentError("tail_slope expects a CCDF curve");
    std::vector<double> lx, ly;
    for (auto [value, fraction] : curve.points) {
        if (value >= xmin && value > 0.0 && fraction > 0.0) {
            lx.push_back(std::log10(value));
            ly.push_back(std::log10(fraction));
        }
    }
    if (lx.size() < 3)
        throw ArgumentError("tail_slope: need at least 3 tail points with value >= xmin");
    double n = static_cast<double>(lx.size());
    double mx = std::accumulate(lx.begin(), lx.end(), 0.0) / n;
    double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    if (sxx == 0.0) throw ArgumentError("tail_slope: degenerate tail (single value)");
    return sxy / sxx;
}

CharacterizationReport characterization_report(const HinGraph& g) {
    static const std::vector<std::string> kVideoAttrs = {
        "views", "subscriptions", "danmus", "donations_total", "donations_week", "age_days"};

    CharacterizationReport report;

    for (const std::string& attr : kVideoAttrs) {
        std::vector<double> col = video_attr_column(g, attr);
        if (col.empty()) throw SchemaError("graph has no videos");
        report.curves["video_" + attr + "_cdf"] = distribution_curve(col, CurveMode::CDF);
        report.curves["video_" + attr + "_ccdf"] = distribution_curve(col, CurveMode::CCDF);
    }

    std::vector<double> followers, followees;
    for (std::uint32_t id : g.members(NodeKind::User)) {
        followers.push_back(static_cast<double>(g.degree(id, EdgeKind::Follow, Direction::In)));
        followees.push_back(static_cast<double>(g.degree(id, EdgeKind::Follow, Direction::Out)));
    }
    if (!followers.empty()) {
        report.curves["user_followers_cdf"] = distribution_curve(followers, CurveMode::CDF);
        report.curves["user_followers_ccdf"] = distribution_curve(followers, CurveMode::CCDF);
        report.curves["user_followees_cdf"] = distribution_curve(followees, CurveMode::CDF);
        report.curves["user_followees_ccdf"] = distribution_curve(followees, CurveMode::CCDF);
    }

    static const std::vector<std::pair<std::string, std::string>> kAgainst = {
        {"views", "views"},
        {"subscriptions", "subscriptions"},
        {"danmus", "danmus"},
        {"age", "age_days"}};
    static const std::vector<std::string> kDonationCols = {"donations_total", "donations_week"};

    for (const std::string& don : kDonationCols) {
        std::vector<double> dcol = video_attr_column(g, don);
        for (const auto& [label, attr] : kAgainst) {
            std::vector<double> acol = video_attr_column(g, attr);
            CorrelationCell cell;
            cell.metric = don;
            cell.against = label;
            cell.n = dcol.size();
            try {
                cell.srcc = spearman_rcc(dcol, acol);
            } catch (const UndefinedMetricError&) {
                cell.defined = false;
                cell.srcc = std::numeric_limits<double>::quiet_NaN();
            }
            report.srcc.push_back(std::move(cell));
        }
    }
    return report;
}

void write_characterization_report(const std::filesystem::path& dir,
                                   const CharacterizationReport& report) {
    std::filesystem::create_directories(dir);
    for (const auto& [name, curve] : report.curves) {
        std::ofstream out(dir / ("curve_" + name + ".csv"));
        out << "value,fraction\n";
        char buf[64];
        for (auto [value, fraction] : curve.points) {
            std::snprintf(buf, sizeof(buf), "%.10g,%.10g\n", value, fraction);
            out << buf;
        }
    }

    std::ofstream out(dir / "srcc.csv");
    out << "srcc,views,subscriptions,danmus,age\n";
    for (const char* row : {"donations_total", "donations_week"}) {
        out << row;
        for (const char* col : {"views", "subscriptions", "danmus", "age"}) {
            for (const CorrelationCell& cell : report.srcc) {
                if (cell.metric == row && cell.against == col) {
                    char buf[32];
                    if (cell.defined)
                        std::snprintf(buf, sizeof(buf), ",%.4f", cell.srcc);
                    else
                        std::snprintf(buf, sizeof(buf), ",nan");
                    out << buf;
                }
            }
        }
        out << '\n';
    }
}

} // namespace hinmine
