#pragma once

#include <stdexcept>
#include <string>

namespace streetcrime {

// Base for every diagnostic the library raises. The CLI maps any of these to a
// nonzero exit code.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// A value violates a type invariant (coordinate range, ring closure, ...).
class ValidationError : public Error {
public:
    using Error::Error;
};

// Missing mandatory configuration: columns, keys, population entries, API key.
class ConfigError : public Error {
public:
    using Error::Error;
};

// Malformed input file. `where` names the file and row or feature.
class ParseError : public Error {
public:
    ParseError(const std::string& where, const std::string& what)
        : Error(where + ": " + what), where_(where) {}

    const std::string& where() const noexcept { return where_; }

private:
    std::string where_;
};

// Header of a feature CSV does not match the class schema.
class SchemaMismatchError : public Error {
public:
    using Error::Error;
};

// Feature count passed to predict differs from the fitted model.
class DimensionError : public Error {
public:
    using Error::Error;
};

// Operation not defined for this model kind (importance on a linear model).
class UnsupportedModelError : public Error {
public:
    using Error::Error;
};

// A fit failed inside a cross-validation fold.
class FoldError : public Error {
public:
    FoldError(std::size_t fold, const std::string& what)
        : Error("fold " + std::to_string(fold) + ": " + what), fold_(fold) {}

    std::size_t fold() const noexcept { return fold_; }

private:
    std::size_t fold_;
};

} // namespace streetcrime
