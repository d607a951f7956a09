#pragma once

#include <stdexcept>
#include <string>

namespace dire {

/// Malformed input: wrong JSON shape, missing keys, bad types, truncated files.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Input is well-formed but violates a documented invariant. `field()` names
/// the offending field so callers can surface it verbatim.
class InvariantError : public std::invalid_argument {
public:
    InvariantError(std::string field, const std::string& what)
        : std::invalid_argument(field + ": " + what), field_(std::move(field)) {}

    const std::string& field() const noexcept { return field_; }

private:
    std::string field_;
};

/// Valid input for which the requested quantity does not exist
/// (nothing extractable, hash family too weak, ...).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

}  // namespace dire
