#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace nmfcast {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
public:
    using Error::Error;
};

/// Sliding/mask geometry cannot be realized for the given data.
class GeometryError : public Error {
public:
    using Error::Error;
};

/// Invalid solver or pipeline configuration.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// An iterate or objective became non-finite.
class DivergenceError : public Error {
public:
    using Error::Error;
};

/// A metric is undefined for the given inputs (e.g. all-zero reference).
class MetricError : public Error {
public:
    using Error::Error;
};

/// Dataset parse failure; row and column are 1-based positions in the file.
class IngestionError : public Error {
public:
    IngestionError(const std::string& what, std::size_t row, std::size_t col)
        : Error("line " + std::to_string(row) + ", column " + std::to_string(col) + ": " + what),
          row_(row), col_(col) {}

    std::size_t row() const noexcept { return row_; }
    std::size_t col() const noexcept { return col_; }

private:
    std::size_t row_;
    std::size_t col_;
};

}  // namespace nmfcast
