#pragma once

#include <stdexcept>
#include <string>

namespace stx {

/// Input outside an operation's domain (singular point, unsupported dimension, bad parameter).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

/// A quadrature did not reach its tolerance. Refining the rule is the remedy, not ignoring it.
class QuadratureError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Ill-conditioned or underdetermined least-squares fit.
class FitError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Malformed configuration; the message carries the offending key path.
class ConfigError : public std::runtime_error {
public:
    ConfigError(const std::string& path, const std::string& what)
        : std::runtime_error(path + ": " + what), path_(path) {}
    const std::string& path() const { return path_; }

private:
    std::string path_;
};

}  // namespace stx
