#pragma once

#include <stdexcept>
#include <string>

namespace bcones {

/// Malformed or inconsistent caller input (dimensions, signs, ranges).
class InputError : public std::invalid_argument {
public:
    explicit InputError(const std::string& what) : std::invalid_argument(what) {}
};

/// An exact combinatorial search was asked to run beyond its configured size cap.
class CapabilityError : public std::runtime_error {
public:
    explicit CapabilityError(const std::string& what) : std::runtime_error(what) {}
};

namespace detail {

inline void require(bool cond, const std::string& msg)
{
    if (!cond) throw InputError(msg);
}

} // namespace detail
} // namespace bcones
