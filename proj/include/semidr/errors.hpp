#pragma once

#include <stdexcept>
#include <string>

namespace semidr {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DimensionMismatch : public Error {
public:
    using Error::Error;
};

/// A linear or power link produced r(x; theta) <= 0.
class NonpositiveRatio : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

class InvalidAlpha : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class InvalidLevel : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class InvalidDof : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class SingularJacobian : public Error {
public:
    SingularJacobian(const std::string& what, double condition)
        : Error(what), condition_(condition) {}
    double condition() const noexcept { return condition_; }

private:
    double condition_;
};

class SingularCovariance : public Error {
public:
    using Error::Error;
};

class NotConverged : public Error {
public:
    using Error::Error;
};

class RejectionSamplingStall : public Error {
public:
    using Error::Error;
};

class ConfigError : public Error {
public:
    using Error::Error;
};

class MalformedCsv : public Error {
public:
    MalformedCsv(const std::string& what, std::size_t row, std::size_t column)
        : Error(what), row_(row), column_(column) {}
    std::size_t row() const noexcept { return row_; }
    std::size_t column() const noexcept { return column_; }

private:
    std::size_t row_;
    std::size_t column_;
};

}  // namespace semidr
