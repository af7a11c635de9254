#pragma once

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "riskpipe/matrix.hpp"
#include "riskpipe/rng.hpp"

namespace riskpipe {

/// Column layout of a risk table: feature columns, the label column, and
/// identifier columns that get dropped on load.
struct Schema {
    std::vector<std::string> feature_names;
    std::string label_name;
    std::vector<std::string> id_names;

    void validate() const {
        std::unordered_set<std::string> seen;
        for (const auto& f : feature_names) {
            if (!seen.insert(f).second) throw SchemaError("duplicate feature name: " + f);
        }
        if (seen.count(label_name)) throw SchemaError("label duplicates a feature name");
    }
};

/// The 28-feature layout used by the bundled synthetic data: five concrete
/// retail statistics plus generic filler columns.
inline Schema default_schema() {
    Schema s;
    s.feature_names = {
        "Department Sales Item Count",
        "Department Refunds Item Count",
        "Number of Sales Per Day",
        "Number of Item Voids",
        "Department Sales Total Amount",
    };
    for (int i = 6; i <= 28; ++i) {
        char buf[16];
        std::snprintf(buf, sizeof(buf), "feature_%02d", i);
        s.feature_names.emplace_back(buf);
    }
    s.label_name = "risk_factor";
    s.id_names = {"store_id", "cashier_id"};
    return s;
}

struct Dataset {
    Matrix x;
    Vector y;
    Schema schema;

    std::size_t n() const { return x.rows(); }
};

struct ScalerParams {
    Vector means;
    Vector stds;  ///< population convention; zero-variance columns recorded below and set to 1
    std::vector<std::size_t> zero_variance;
};

struct Split {
    Dataset train;
    Dataset test;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            fields.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    fields.push_back(cur);
    return fields;
}

inline double parse_cell(std::string_view s, std::size_t row1, std::size_t col1) {
    const char* first = s.data();
    const char* last = s.data() + s.size();
    while (first < last && (*first == ' ' || *first == '\t')) ++first;
    while (last > first && (*(last - 1) == ' ' || *(last - 1) == '\t')) --last;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || ptr != last || first == last || !std::isfinite(v)) {
        throw ParseError("non-numeric cell at row " + std::to_string(row1) + ", column " +
                         std::to_string(col1) + ": '" + std::string(s) + "'");
    }
    return v;
}

inline std::string format_double(double v) {
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    (void)ec;
    return std::string(buf, ptr);
}

}  // namespace detail

/// Read a comma-separated table, drop id columns, split the label column off
/// into y, and order the remaining features per the schema.
inline Dataset load_csv(const std::filesystem::path& path, const Schema& schema) {
    schema.validate();
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path.string());

    std::string header;
    if (!std::getline(in, header)) throw EmptyInputError("empty file: " + path.string());

    const auto columns = detail::split_csv_line(header);
    auto find_col = [&](const std::string& name) -> std::size_t {
        const auto it = std::find(columns.begin(), columns.end(), name);
        if (it == columns.end()) throw SchemaError("missing column '" + name + "' in " + path.string());
        return static_cast<std::size_t>(it - columns.begin());
    };

    std::vector<std::size_t> feature_cols;
    feature_cols.reserve(schema.feature_names.size());
    for (const auto& f : schema.feature_names) feature_cols.push_back(find_col(f));
    const std::size_t label_col = find_col(schema.label_name);
    for (const auto& id : schema.id_names) find_col(id);  // required present, then dropped

    Vector values;
    Vector labels;
    std::string line;
    std::size_t row1 = 1;  // header was row 1
    while (std::getline(in, line)) {
        ++row1;
        if (line.empty()) continue;
        const auto fields = detail::split_csv_line(line);
        if (fields.size() != columns.size()) {
            throw ParseError("row " + std::to_string(row1) + " has " +
                             std::to_string(fields.size()) + " fields, expected " +
                             std::to_string(columns.size()));
        }
        for (std::size_t c : feature_cols) values.push_back(detail::parse_cell(fields[c], row1, c + 1));
        labels.push_back(detail::parse_cell(fields[label_col], row1, label_col + 1));
    }
    if (labels.empty()) throw EmptyInputError("no data rows in " + path.string());

    Dataset d;
    d.x = Matrix(labels.size(), schema.feature_names.size(), std::move(values));
    d.y = std::move(labels);
    d.schema = schema;
    return d;
}

/// Write a dataset as CSV: id columns (deterministic counters), features in
/// schema order, label last. Numbers use shortest round-trip formatting, so
/// load_csv(write_csv(d)) reproduces d exactly.
inline void write_csv(const Dataset& d, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write " + path.string());
    std::string header;
    for (const auto& id : d.schema.id_names) header += id + ",";
    for (const auto& f : d.schema.feature_names) header += f + ",";
    header += d.schema.label_name;
    out << header << "\n";
    for (std::size_t i = 0; i < d.n(); ++i) {
        std::string line;
        for (std::size_t k = 0; k < d.schema.id_names.size(); ++k) {
            // store blocks of 100, cashier ids sequential
            line += std::to_string(k == 0 ? 100 + i / 100 : 7000 + i) + ",";
        }
        for (std::size_t j = 0; j < d.x.cols(); ++j) line += detail::format_double(d.x(i, j)) + ",";
        line += detail::format_double(d.y[i]);
        out << line << "\n";
    }
    if (!out) throw IoError("write failed: " + path.string());
}

/// Columnwise transform to zero mean and unit variance (population std).
/// Zero-variance columns become all-zero with std recorded as 1.
inline std::pair<Dataset, ScalerParams> standardize(const Dataset& d) {
    const std::size_t n = d.n();
    if (n < 2) throw InsufficientDataError("standardize requires at least 2 rows");
    const std::size_t p = d.x.cols();

    ScalerParams params;
    params.means.resize(p);
    params.stds.resize(p);
    Dataset out = d;
    for (std::size_t j = 0; j < p; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += d.x(i, j);
        mean /= static_cast<double>(n);
        double var = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double c = d.x(i, j) - mean;
            var += c * c;
        }
        var /= static_cast<double>(n);
        double std_ = std::sqrt(var);
        if (std_ < 1e-12) {
            std_ = 1.0;
            params.zero_variance.push_back(j);
        }
        params.means[j] = mean;
        params.stds[j] = std_;
        for (std::size_t i = 0; i < n; ++i) out.x(i, j) = (d.x(i, j) - mean) / std_;
    }
    return {std::move(out), std::move(params)};
}

/// Apply previously fitted scaler parameters: (x - means) / stds columnwise.
inline Matrix apply_scaler(const Matrix& x, const ScalerParams& p) {
    if (x.cols() != p.means.size()) {
        throw ShapeError("apply_scaler: " + std::to_string(x.cols()) + " columns vs " +
                         std::to_string(p.means.size()) + " scaler entries");
    }
    Matrix out = x;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j)
            out(i, j) = (x(i, j) - p.means[j]) / p.stds[j];
    return out;
}

/// Inverse of apply_scaler.
inline Matrix invert_scaler(const Matrix& x, const ScalerParams& p) {
    if (x.cols() != p.means.size()) throw ShapeError("invert_scaler: dimension mismatch");
    Matrix out = x;
    for (std::size_t i = 0; i < x.rows(); ++i)
        for (std::size_t j = 0; j < x.cols(); ++j)
            out(i, j) = x(i, j) * p.stds[j] + p.means[j];
    return out;
}

/// Deterministic split: a seeded Fisher-Yates shuffle of row indices; the
/// first round(N * test_fraction) (clamped to [1, N-1]) become the test set.
inline Split train_test_split(const Dataset& d, double test_fraction, std::uint64_t seed) {
    if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
        throw ArgumentError("test_fraction must lie in (0, 1)");
    }
    const std::size_t n = d.n();
    if (n < 2) throw InsufficientDataError("train_test_split requires at least 2 rows");

    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    Rng rng(seed);
    rng.shuffle(idx);

    std::size_t test_n = static_cast<std::size_t>(std::llround(static_cast<double>(n) * test_fraction));
    test_n = std::clamp<std::size_t>(test_n, 1, n - 1);

    auto take = [&](std::size_t from, std::size_t count) {
        Dataset part;
        part.schema = d.schema;
        part.x = Matrix(count, d.x.cols());
        part.y.resize(count);
        for (std::size_t r = 0; r < count; ++r) {
            const std::size_t src = idx[from + r];
            for (std::size_t j = 0; j < d.x.cols(); ++j) part.x(r, j) = d.x(src, j);
            part.y[r] = d.y[src];
        }
        return part;
    };

    Split s;
    s.test = take(0, test_n);
    s.train = take(test_n, n - test_n);
    s.seed = seed;
    return s;
}

/// Designated feature indices driving the synthetic label.
inline const std::vector<std::size_t>& synthetic_signal_features() {
    static const std::vector<std::size_t> k = {0, 1, 2, 3, 4, 5};
    return k;
}

/// Stand-in for the proprietary retail table: n rows x 28 features.
///
/// Feature j is standard normal; rows additionally belong to one of two
/// latent modes (p = 0.5) and mode 1 shifts features {4, 8..14} by +2.4,
/// which gives the clustering/embedding stages recoverable structure.
/// The label is a fixed nonlinear function of features 0..5,
///   raw = 1.8*sin(1.4*z0) + 1.4*|z1| + 1.2*z2*z3 + 0.9*z4 + 0.8*cos(z5) + e,
/// with e ~ N(0, 0.8^2), mapped affinely and clamped into [4, 16]:
///   y = clamp(10 + 1.05*(raw - 2.6), 4, 16).
inline Dataset generate_synthetic(std::size_t n, std::uint64_t seed) {
    if (n < 10) throw ArgumentError("generate_synthetic requires n >= 10");
    static const std::vector<std::size_t> kOffsetFeatures = {4, 8, 9, 10, 11, 12, 13, 14};
    constexpr double kOffset = 2.4;

    Dataset d;
    d.schema = default_schema();
    const std::size_t p = d.schema.feature_names.size();
    d.x = Matrix(n, p);
    d.y.resize(n);

    Rng rng(seed);
    for (std::size_t i = 0; i < n; ++i) {
        const bool mode = rng.uniform() >= 0.5;
        for (std::size_t j = 0; j < p; ++j) d.x(i, j) = rng.normal();
        if (mode) {
            for (std::size_t j : kOffsetFeatures) d.x(i, j) += kOffset;
        }
        const double z0 = d.x(i, 0), z1 = d.x(i, 1), z2 = d.x(i, 2);
        const double z3 = d.x(i, 3), z4 = d.x(i, 4), z5 = d.x(i, 5);
        const double raw = 1.8 * std::sin(1.4 * z0) + 1.4 * std::abs(z1) + 1.2 * z2 * z3 +
                           0.9 * z4 + 0.8 * std::cos(z5) + 0.8 * rng.normal();
        d.y[i] = std::clamp(10.0 + 1.05 * (raw - 2.6), 4.0, 16.0);
    }
    return d;
}

}  // namespace riskpipe
