#pragma once

#include <stdexcept>
#include <string>

namespace slocc {

// Input state (or pencil) has a rank-deficient single-party reduced state.
class not_fully_entangled : public std::runtime_error {
public:
    explicit not_fully_entangled(const std::string& what)
        : std::runtime_error(what) {}
};

// A numerical rank decision sits too close to its threshold to be trusted.
class ill_conditioned : public std::runtime_error {
public:
    explicit ill_conditioned(const std::string& what)
        : std::runtime_error(what) {}
};

// An operation was called outside its documented domain.
class precondition_violated : public std::invalid_argument {
public:
    explicit precondition_violated(const std::string& what)
        : std::invalid_argument(what) {}
};

class dimension_mismatch : public std::invalid_argument {
public:
    explicit dimension_mismatch(const std::string& what)
        : std::invalid_argument(what) {}
};

// Parse failure with the byte offset of the offending token.
class parse_error : public std::runtime_error {
public:
    parse_error(std::size_t offset, const std::string& expected)
        : std::runtime_error("parse error at byte " + std::to_string(offset) +
                             ": expected " + expected),
          offset(offset), expected(expected) {}

    std::size_t offset;
    std::string expected;
};

}  // namespace slocc
