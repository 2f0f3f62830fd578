#pragma once

// CSV ingestion and emission. Rows are series, columns are timestamps; an
// optional header row carries timestamp labels and an optional first column
// carries series identifiers.

#include <charconv>
#include <cmath>
#include <cstddef>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include "nmfcast/errors.hpp"
#include "nmfcast/masking.hpp"
#include "nmfcast/matrix_core.hpp"

namespace nmfcast {

struct CsvOptions {
    char delimiter = ',';
    std::optional<bool> header;     ///< nullopt: detect
    std::optional<bool> id_column;  ///< nullopt: detect
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

inline std::vector<std::string_view> split_fields(std::string_view line, char delim) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const std::size_t pos = line.find(delim, start);
        if (pos == std::string_view::npos) {
            out.push_back(trim(line.substr(start)));
            return out;
        }
        out.push_back(trim(line.substr(start, pos - start)));
        start = pos + 1;
    }
}

/// Locale-independent parse of the whole field.
inline std::optional<double> parse_number(std::string_view s) {
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    if (s.empty()) return std::nullopt;
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

inline std::string format_number(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

}  // namespace detail

/// Parses CSV text. Throws IngestionError (1-based line/column) on malformed
/// or negative cells and ragged rows.
inline SeriesMatrix parse_dataset(std::istream& in, const CsvOptions& opts = {}) {
    std::vector<std::string> lines;
    std::vector<std::size_t> line_no;
    std::string line;
    for (std::size_t n = 1; std::getline(in, line); ++n) {
        if (!detail::trim(line).empty()) {
            lines.push_back(line);
            line_no.push_back(n);
        }
    }
    if (lines.empty()) {
        throw IngestionError("no data", 1, 1);
    }

    auto all_numeric = [&](const std::vector<std::string_view>& f, std::size_t from) {
        for (std::size_t i = from; i < f.size(); ++i) {
            if (!detail::parse_number(f[i])) return false;
        }
        return true;
    };
    const std::vector<std::string_view> first = detail::split_fields(lines.front(), opts.delimiter);
    bool header = opts.header.value_or(false);
    if (!opts.header) {
        // A header row is one whose value cells are not all numbers.
        header = lines.size() > 1 && !all_numeric(first, 1);
    }
    bool ids = opts.id_column.value_or(false);
    if (!opts.id_column) {
        ids = false;
        for (std::size_t r = header ? 1 : 0; r < lines.size(); ++r) {
            const auto f = detail::split_fields(lines[r], opts.delimiter);
            if (!f.empty() && !detail::parse_number(f.front())) {
                ids = true;
                break;
            }
        }
        if (header && !ids && !first.empty() && first.front().empty()) {
            ids = true;  // blank corner cell above an id column
        }
    }

    SeriesMatrix out;
    const std::size_t first_data = header ? 1 : 0;
    const std::size_t skip = ids ? 1 : 0;
    if (header) {
        for (std::size_t i = skip; i < first.size(); ++i) {
            out.timestamp_labels.emplace_back(first[i]);
        }
    }
    const std::size_t n_rows = lines.size() - first_data;
    std::size_t width = 0;
    std::vector<double> values;
    for (std::size_t r = first_data; r < lines.size(); ++r) {
        const auto f = detail::split_fields(lines[r], opts.delimiter);
        const std::size_t cells = f.size() > skip ? f.size() - skip : 0;
        if (r == first_data) {
            width = cells;
            if (width == 0) {
                throw IngestionError("row has no values", line_no[r], 1);
            }
        } else if (cells != width) {
            throw IngestionError("row has " + std::to_string(cells) + " values, expected " + std::to_string(width),
                                 line_no[r], f.size() + 1);
        }
        if (ids) {
            out.series_ids.emplace_back(f.front());
        }
        for (std::size_t c = skip; c < f.size(); ++c) {
            const auto v = detail::parse_number(f[c]);
            if (!v || !std::isfinite(*v)) {
                throw IngestionError("cannot parse '" + std::string(f[c]) + "' as a number", line_no[r], c + 1);
            }
            if (*v < 0.0) {
                throw IngestionError("negative value " + std::string(f[c]), line_no[r], c + 1);
            }
            values.push_back(*v);
        }
    }
    if (header && out.timestamp_labels.size() != width) {
        throw IngestionError("header has " + std::to_string(out.timestamp_labels.size()) + " labels, rows have " +
                                 std::to_string(width) + " values",
                             line_no.front(), 1);
    }
    out.values.resize(static_cast<Index>(n_rows), static_cast<Index>(width));
    for (std::size_t r = 0; r < n_rows; ++r) {
        for (std::size_t c = 0; c < width; ++c) {
            out.values(static_cast<Index>(r), static_cast<Index>(c)) = values[r * width + c];
        }
    }
    return out;
}

inline SeriesMatrix load_dataset(const std::string& path, const CsvOptions& opts = {}) {
    std::ifstream in(path);
    if (!in) {
        throw Error("cannot open '" + path + "'");
    }
    return parse_dataset(in, opts);
}

/// Writes `values` with the optional labels, printing each number in its
/// shortest round-trip form.
inline void write_matrix_csv(std::ostream& out, const Matrix& values, const std::vector<std::string>& series_ids = {},
                             const std::vector<std::string>& labels = {}, char delimiter = ',') {
    const bool ids = !series_ids.empty();
    if (ids && series_ids.size() != static_cast<std::size_t>(values.rows())) {
        throw DimensionError("write_matrix_csv: one id per row is required");
    }
    if (!labels.empty() && labels.size() != static_cast<std::size_t>(values.cols())) {
        throw DimensionError("write_matrix_csv: one label per column is required");
    }
    if (!labels.empty()) {
        if (ids) out << "id" << delimiter;
        for (std::size_t c = 0; c < labels.size(); ++c) {
            out << (c ? std::string(1, delimiter) : std::string()) << labels[c];
        }
        out << '\n';
    }
    for (Index r = 0; r < values.rows(); ++r) {
        if (ids) out << series_ids[static_cast<std::size_t>(r)] << delimiter;
        for (Index c = 0; c < values.cols(); ++c) {
            if (c) out << delimiter;
            out << detail::format_number(values(r, c));
        }
        out << '\n';
    }
}

inline void save_matrix_csv(const std::string& path, const Matrix& values, const std::vector<std::string>& series_ids = {},
                            const std::vector<std::string>& labels = {}) {
    std::ofstream out(path);
    if (!out) {
        throw Error("cannot write '" + path + "'");
    }
    write_matrix_csv(out, values, series_ids, labels);
    if (!out) {
        throw Error("write to '" + path + "' failed");
    }
}

inline void save_dataset(const std::string& path, const SeriesMatrix& m) {
    save_matrix_csv(path, m.values, m.series_ids, m.timestamp_labels);
}

/// Forecast CSV: one row per series (ids preserved), one column per future
/// timestamp.
inline void save_forecast(const std::string& path, const Matrix& forecast, const std::vector<std::string>& series_ids = {},
                          const std::vector<std::string>& labels = {}) {
    save_matrix_csv(path, forecast, series_ids, labels);
}

}  // namespace nmfcast
