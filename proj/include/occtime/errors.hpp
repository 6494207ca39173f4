#pragma once

#include <stdexcept>
#include <string>

namespace occtime {

/// Input that violates a model or parameter invariant.
class ValidationError : public std::invalid_argument {
public:
    explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

/// Base for failures of the numerical engine (roots, residues, inversion).
class NumericalError : public std::runtime_error {
public:
    explicit NumericalError(const std::string& what) : std::runtime_error(what) {}
};

/// Two roots of psi(s) = q closer than the separation threshold.
class NearMultipleRoots : public NumericalError {
public:
    explicit NearMultipleRoots(const std::string& what) : NumericalError(what) {}
};

/// A root at p+q collides with a root at q, so the residue expansion is singular.
class DegenerateConfiguration : public NumericalError {
public:
    explicit DegenerateConfiguration(const std::string& what) : NumericalError(what) {}
};

/// Laplace inversion asked for an abscissa outside the transform's domain.
class InversionDomainError : public NumericalError {
public:
    explicit InversionDomainError(const std::string& what) : NumericalError(what) {}
};

class IoError : public std::runtime_error {
public:
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace occtime
