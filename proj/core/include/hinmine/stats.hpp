#pragma once

#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "hinmine/graph.hpp"

namespace hinmine {

enum class CurveMode { CDF, CCDF };

/// Empirical distribution curve. Values are strictly increasing; CDF
/// fractions are P[X <= v] (ending at 1), CCDF fractions are P[X >= v].
struct DistributionCurve {
    CurveMode mode = CurveMode::CDF;
    std::vector<std::pair<double, double>> points;
};

DistributionCurve distribution_curve(std::span<const double> values, CurveMode mode);

/// Spearman rank correlation with average ranks for ties.
double spearman_rcc(std::span<const double> x, std::span<const double> y);

/// Least-squares slope of log10(fraction) vs log10(value) over the CCDF
/// tail value >= xmin. Needs at least 3 tail points with positive fraction.
double tail_slope(const DistributionCurve& curve, double xmin);

struct CorrelationCell {
    std::string metric;   // row: donation column
    std::string against;  // col: popularity/age metric
    double srcc = 0.0;
    std::size_t n = 0;
    bool defined = true;  // false when rank variance is zero
};

struct CharacterizationReport {
    // curve name -> curve; names are stable and file-safe
    std::map<std::string, DistributionCurve> curves;
    std::vector<CorrelationCell> srcc;
};

/// Builds the descriptive report: CDF/CCDF curves for the video attribute
/// columns and user follow degrees, plus the SRCC matrix between
/// {views, subscriptions, danmus, age} and {donations_total, donations_week}.
CharacterizationReport characterization_report(const HinGraph& g);

/// Writes one curve_<name>.csv per curve plus srcc.csv into `dir`.
void write_characterization_report(const std::filesystem::path& dir,
                                   const CharacterizationReport& report);

} // namespace hinmine
