#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "hinmine/errors.hpp"

namespace hinmine {

/// Row-per-entity numeric feature matrix with named columns and optional
/// binary labels. Row-major storage.
struct FeatureTable {
    std::vector<std::string> columns;
    std::vector<std::string> column_groups; // parallel to columns; may be empty
    std::vector<std::string> row_ids;
    std::vector<double> data;
    std::vector<std::uint8_t> labels; // empty when absent

    std::size_t n_rows() const { return row_ids.size(); }
    std::size_t n_cols() const { return columns.size(); }
    bool has_labels() const { return !labels.empty(); }

    double at(std::size_t row, std::size_t col) const { return data[row * n_cols() + col]; }
    std::span<const double> row(std::size_t r) const {
        return {data.data() + r * n_cols(), n_cols()};
    }

    void add_row(std::string id, std::span<const double> values);
    void add_row(std::string id, std::span<const double> values, std::uint8_t label);

    /// Copy of the table restricted to the named columns, in the given order.
    FeatureTable select_columns(std::span<const std::string> names) const;

    /// Copy of the table restricted to the given row indices, in order.
    FeatureTable select_rows(std::span<const std::size_t> rows) const;

    void validate() const;
};

/// CSV with header `id,<columns...>[,label]`.
void write_feature_table(const std::filesystem::path& path, const FeatureTable& t);
FeatureTable read_feature_table(const std::filesystem::path& path);

} // namespace hinmine
