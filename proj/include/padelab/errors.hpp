#pragma once

#include <stdexcept>
#include <string>

namespace padelab {

struct Error : std::runtime_error {
    explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

/// Node doubling hit its cap without the two last estimates agreeing.
struct QuadratureError : Error {
    std::string last, previous;
    QuadratureError(const std::string &msg, std::string last_, std::string prev_)
        : Error(msg + " (last=" + last_ + ", previous=" + prev_ + ")"),
          last(std::move(last_)),
          previous(std::move(prev_)) {}
};

struct ConvergenceError : Error {
    explicit ConvergenceError(const std::string &msg) : Error(msg) {}
};

struct SingularJacobianError : Error {
    explicit SingularJacobianError(const std::string &msg) : Error(msg) {}
};

/// Homogeneous system with kernel dimension greater than one.
struct DegenerateSystemError : Error {
    explicit DegenerateSystemError(const std::string &msg) : Error(msg) {}
};

struct BranchError : Error {
    explicit BranchError(const std::string &msg) : Error(msg) {}
};

struct GeometryError : Error {
    explicit GeometryError(const std::string &msg) : Error(msg) {}
};

struct DomainError : Error {
    explicit DomainError(const std::string &msg) : Error(msg) {}
};

struct PathError : Error {
    explicit PathError(const std::string &msg) : Error(msg) {}
};

struct ClassViolationError : Error {
    explicit ClassViolationError(const std::string &msg) : Error(msg) {}
};

}  // namespace padelab
