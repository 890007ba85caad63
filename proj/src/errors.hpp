#pragma once

#include <stdexcept>
#include <string>

namespace hg {

// Status codes shared between the C API and the CLI exit-code contract:
// 0 all checks pass, 1 check failure, 2 invalid input, 3 numeric domain error.
enum class Status : int {
    ok = 0,
    check_failure = 1,
    invalid_input = 2,
    domain = 3,
    internal = 4,
};

struct Error : std::runtime_error {
    Error(Status s, const std::string& msg) : std::runtime_error(msg), status(s) {}
    Status status;
};

struct ParseError : Error {
    ParseError(std::size_t off, const std::string& msg)
        : Error(Status::invalid_input, msg), offset(off) {}
    std::size_t offset;
};

struct ValidationError : Error {
    explicit ValidationError(const std::string& msg) : Error(Status::invalid_input, msg) {}
};

// Evaluation left the domain of a function (log of a non-positive value,
// division by zero, ...). `subexpr` is the offending subexpression, printed.
struct DomainError : Error {
    DomainError(const std::string& msg, std::string subexpr_)
        : Error(Status::domain, msg), subexpr(std::move(subexpr_)) {}
    std::string subexpr;
};

struct SingularMetricError : Error {
    SingularMetricError(double det_, const std::string& msg)
        : Error(Status::domain, msg), det(det_) {}
    double det;
};

struct NotPositiveDefiniteError : Error {
    explicit NotPositiveDefiniteError(const std::string& msg) : Error(Status::domain, msg) {}
};

}  // namespace hg
