#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "splitgates/csv.hpp"

namespace splitgates {

// A randomized-experiment sample: outcome y, binary treatment d, and the
// n x p pre-treatment covariate matrix z. Immutable after construction and
// safe to share across threads.
struct ExperimentDataset {
    Eigen::VectorXd y;
    Eigen::VectorXi d;
    Eigen::MatrixXd z;
    std::vector<std::int64_t> unit_ids;

    Eigen::Index n() const { return y.size(); }
    Eigen::Index p() const { return z.cols(); }

    Eigen::Index n_treated() const { return (d.array() == 1).count(); }
    Eigen::Index n_control() const { return (d.array() == 0).count(); }

    // Row-gather. Fold subsets may legitimately be single-arm (e.g. the
    // per-arm training sets), so no arm check here; callers that need both
    // arms enforce it themselves.
    ExperimentDataset subset(const std::vector<int>& rows) const {
        ExperimentDataset out;
        const auto m = static_cast<Eigen::Index>(rows.size());
        out.y.resize(m);
        out.d.resize(m);
        out.z.resize(m, z.cols());
        out.unit_ids.reserve(rows.size());
        for (Eigen::Index i = 0; i < m; ++i) {
            const int r = rows[static_cast<std::size_t>(i)];
            out.y(i) = y(r);
            out.d(i) = d(r);
            out.z.row(i) = z.row(r);
            out.unit_ids.push_back(unit_ids[static_cast<std::size_t>(r)]);
        }
        return out;
    }

    std::vector<int> arm_rows(int arm) const {
        std::vector<int> rows;
        for (Eigen::Index i = 0; i < d.size(); ++i)
            if (d(i) == arm) rows.push_back(static_cast<int>(i));
        return rows;
    }
};

inline void validate_dataset(const ExperimentDataset& data) {
    const Eigen::Index n = data.y.size();
    if (n < 2)
        throw std::invalid_argument("dataset must have at least 2 rows");
    if (data.d.size() != n || data.z.rows() != n ||
        data.unit_ids.size() != static_cast<std::size_t>(n))
        throw std::invalid_argument("dataset fields have inconsistent row counts");
    bool any_treated = false, any_control = false;
    for (Eigen::Index i = 0; i < n; ++i) {
        if (data.d(i) == 1)
            any_treated = true;
        else if (data.d(i) == 0)
            any_control = true;
        else
            throw std::invalid_argument("treatment not binary");
        if (!std::isfinite(data.y(i)))
            throw std::invalid_argument("non-finite outcome value");
    }
    if (!any_treated || !any_control)
        throw std::invalid_argument("single-arm dataset");
    if (!data.z.allFinite())
        throw std::invalid_argument("non-finite covariate value");
}

namespace detail {

inline double parse_numeric_cell(const std::string& cell, const std::string& col,
                                 std::size_t row) {
    if (cell.empty())
        throw std::invalid_argument("missing value in column '" + col + "', row " +
                                    std::to_string(row + 1));
    std::size_t pos = 0;
    double v;
    try {
        v = std::stod(cell, &pos);
    } catch (const std::exception&) {
        throw std::invalid_argument("non-numeric cell '" + cell + "' in column '" +
                                    col + "', row " + std::to_string(row + 1));
    }
    while (pos < cell.size() && (cell[pos] == ' ' || cell[pos] == '\t')) ++pos;
    if (pos != cell.size())
        throw std::invalid_argument("non-numeric cell '" + cell + "' in column '" +
                                    col + "', row " + std::to_string(row + 1));
    return v;
}

inline std::string trim(const std::string& s) {
    std::size_t b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return "";
    std::size_t e = s.find_last_not_of(" \t");
    return s.substr(b, e - b + 1);
}

} // namespace detail

// Loads an RFC 4180 CSV with a header row. The named outcome and treatment
// columns are extracted; every remaining column must be numeric and becomes a
// covariate, in file order. Treatment cells must be the literal 0 or 1.
// Rows keep file order; unit_ids are 0..n-1.
inline ExperimentDataset load_csv(const std::string& path,
                                  const std::string& outcome_col,
                                  const std::string& treatment_col) {
    const csv::Table table = csv::read_file(path);

    int y_idx = -1, d_idx = -1;
    std::vector<int> z_idx;
    for (std::size_t j = 0; j < table.header.size(); ++j) {
        const std::string name = detail::trim(table.header[j]);
        if (name == outcome_col)
            y_idx = static_cast<int>(j);
        else if (name == treatment_col)
            d_idx = static_cast<int>(j);
        else
            z_idx.push_back(static_cast<int>(j));
    }
    if (y_idx < 0)
        throw std::invalid_argument("missing column '" + outcome_col + "'");
    if (d_idx < 0)
        throw std::invalid_argument("missing column '" + treatment_col + "'");

    const std::size_t n = table.rows.size();
    ExperimentDataset data;
    data.y.resize(static_cast<Eigen::Index>(n));
    data.d.resize(static_cast<Eigen::Index>(n));
    data.z.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(z_idx.size()));
    data.unit_ids.reserve(n);

    for (std::size_t i = 0; i < n; ++i) {
        const auto& row = table.rows[i];
        data.y(static_cast<Eigen::Index>(i)) =
            detail::parse_numeric_cell(row[static_cast<std::size_t>(y_idx)], outcome_col, i);
        const std::string d_cell = detail::trim(row[static_cast<std::size_t>(d_idx)]);
        if (d_cell == "0")
            data.d(static_cast<Eigen::Index>(i)) = 0;
        else if (d_cell == "1")
            data.d(static_cast<Eigen::Index>(i)) = 1;
        else
            throw std::invalid_argument("treatment not binary: '" + d_cell + "' in row " +
                                        std::to_string(i + 1));
        for (std::size_t c = 0; c < z_idx.size(); ++c) {
            data.z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) =
                detail::parse_numeric_cell(row[static_cast<std::size_t>(z_idx[c])],
                                           table.header[static_cast<std::size_t>(z_idx[c])], i);
        }
        data.unit_ids.push_back(static_cast<std::int64_t>(i));
    }

    validate_dataset(data);
    return data;
}

} // namespace splitgates
