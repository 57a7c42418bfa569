// SPDX-License-Identifier: Apache-2.0
// Copyright 2026 The fairpac Authors

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fairpac {

/// Precondition violated by a caller-supplied value.
class InvalidInput : public std::invalid_argument {
public:
    explicit InvalidInput(const std::string& what) : std::invalid_argument(what) {}
};

/// Input document does not have the expected columns or keys.
class SchemaError : public std::runtime_error {
public:
    explicit SchemaError(const std::string& what) : std::runtime_error(what) {}
};

/// A field could not be parsed. `row()` is 1-based and counts the header line.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, std::size_t row)
        : std::runtime_error(what + " (row " + std::to_string(row) + ")"), row_(row) {}

    std::size_t row() const noexcept { return row_; }

private:
    std::size_t row_;
};

}  // namespace fairpac
