#pragma once

#include <stdexcept>
#include <string>

namespace nlheat {

/// Invalid or inconsistent configuration input (CLI exit code 1).
struct config_error : std::runtime_error {
    explicit config_error(const std::string& what) : std::runtime_error(what) {}
};

/// Operation invoked outside its parameter regime or precondition (CLI exit code 2).
struct regime_error : std::runtime_error {
    explicit regime_error(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical failure: divergence, non-convergence, broken bracket (CLI exit code 3).
struct numerical_error : std::runtime_error {
    explicit numerical_error(const std::string& what) : std::runtime_error(what) {}
};

struct degenerate_field_error : regime_error {
    explicit degenerate_field_error(const std::string& what) : regime_error(what) {}
};

struct bad_bracket_error : regime_error {
    explicit bad_bracket_error(const std::string& what) : regime_error(what) {}
};

} // namespace nlheat
