#pragma once

#include <stdexcept>
#include <string>

namespace dockerdoctor {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for arguments outside an operation's domain (bad dates, empty
/// image names, impossible sample requests and the like).
class DomainError : public Error {
public:
    using Error::Error;
};

class EmptyImageName : public DomainError {
public:
    EmptyImageName() : DomainError("empty image name in FROM") {}
};

class TooFewSegments : public DomainError {
public:
    explicit TooFewSegments(const std::string& version)
        : DomainError("version '" + version + "' has too few dot segments") {}
};

class InsufficientPopulation : public DomainError {
public:
    using DomainError::DomainError;
};

class EmptyField : public DomainError {
public:
    explicit EmptyField(const std::string& field)
        : DomainError("field '" + field + "' must not be empty") {}
};

class FindingNotPresent : public Error {
public:
    using Error::Error;
};

class UnparseableSnapshot : public Error {
public:
    using Error::Error;
};

class IoError : public Error {
public:
    using Error::Error;
};

} // namespace dockerdoctor
