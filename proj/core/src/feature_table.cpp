#include "hinmine/feature_table.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace hinmine {

void FeatureTable::add_row(std::string id, std::span<const double> values) {
    if (values.size() != n_cols())
        throw ArgumentError("feature row width " + std::to_string(values.size()) +
                            " does not match column count " + std::to_string(n_cols()));
    row_ids.push_back(std::move(id));
    data.insert(data.end(), values.begin(), values.end());
}

void FeatureTable::add_row(std::string id, std::span<const double> values, std::uint8_t label) {
    add_row(std::move(id), values);
    labels.push_back(label != 0 ? 1 : 0);
}

FeatureTable FeatureTable::select_columns(std::span<const std::string> names) const {
    std::vector<std::size_t> idx;
    for (const std::string& name : names) {
        auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw NotFoundError("unknown feature column '" + name + "'");
        idx.push_back(static_cast<std::size_t>(it - columns.begin()));
    }
    FeatureTable out;
    for (std::size_t i : idx) {
        out.columns.push_back(columns[i]);
        if (!column_groups.empty()) out.column_groups.push_back(column_groups[i]);
    }
    out.row_ids = row_ids;
    out.labels = labels;
    out.data.reserve(n_rows() * idx.size());
    for (std::size_t r = 0; r < n_rows(); ++r)
        for (std::size_t i : idx) out.data.push_back(at(r, i));
    return out;
}

FeatureTable FeatureTable::select_rows(std::span<const std::size_t> rows) const {
    FeatureTable out;
    out.columns = columns;
    out.column_groups = column_groups;
    for (std::size_t r : rows) {
        if (r >= n_rows()) throw ArgumentError("row index out of range");
        out.row_ids.push_back(row_ids[r]);
        auto rv = row(r);
        out.data.insert(out.data.end(), rv.begin(), rv.end());
        if (has_labels()) out.labels.push_back(labels[r]);
    }
    return out;
}

void FeatureTable::validate() const {
    if (data.size() != n_rows() * n_cols())
        throw ArgumentError("feature table storage size mismatch");
    if (!labels.empty() && labels.size() != n_rows())
        throw ArgumentError("label count does not match row count");
    if (!column_groups.empty() && column_groups.size() != columns.size())
        throw ArgumentError("column group count does not match column count");
    for (double v : data)
        if (!std::isfinite(v)) throw ArgumentError("feature table contains a non-finite value");
}

void write_feature_table(const std::filesystem::path& path, const FeatureTable& t) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write feature table " + path.string());
    out << "id";
    for (const std::string& c : t.columns) out << ',' << c;
    if (t.has_labels()) out << ",label";
    out << '\n';
    char buf[48];
    for (std::size_t r = 0; r < t.n_rows(); ++r) {
        out << t.row_ids[r];
        for (std::size_t c = 0; c < t.n_cols(); ++c) {
            std::snprintf(buf, sizeof(buf), ",%.10g", t.at(r, c));
            out << buf;
        }
        if (t.has_labels()) out << ',' << static_cast<int>(t.labels[r]);
        out << '\n';
    }
}

FeatureTable read_feature_table(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open feature table " + path.string());

    auto split = [](const std::string& line) {
        std::vector<std::string> out;
        std::size_t start = 0;
        for (;;) {
            auto pos = line.find(',', start);
            out.push_back(line.substr(start, pos == std::string::npos ? pos : pos - start));
            if (pos == std::string::npos) break;
            start = pos + 1;
        }
        return out;
    };

    std::string line;
    if (!std::getline(in, line)) throw ParseError(path.string() + ": empty feature table");
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<std::string> header = split(line);
    if (header.empty() || header[0] != "id")
        throw ParseError(path.string() + ":1: header must start with 'id'");
    bool labeled = !header.empty() && header.back() == "label";

    FeatureTable t;
    t.columns.assign(header.begin() + 1, header.end() - (labeled ? 1 : 0));

    std::size_t lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = split(line);
        if (fields.size() != header.size())
            throw ParseError(path.string() + ":" + std::to_string(lineno) +
                             ": expected " + std::to_string(header.size()) + " fields");
        std::vector<double> values;
        for (std::size_t c = 1; c <= t.columns.size(); ++c) {
            try {
                values.push_back(std::stod(fields[c]));
            } catch (const std::exception&) {
                throw ParseError(path.string() + ":" + std::to_string(lineno) +
                                 ": malformed number '" + fields[c] + "'");
            }
        }
        if (labeled) {
            const std::string& l = fields.back();
            if (l != "0" && l != "1")
                throw ParseError(path.string() + ":" + std::to_string(lineno) +
                                 ": label must be 0 or 1");
            t.add_row(fields[0], values, l == "1" ? 1 : 0);
        } else {
            t.add_row(fields[0], values);
        }
    }
    t.validate();
    return t;
}

} // namespace hinmine
