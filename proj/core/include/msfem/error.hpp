#pragma once

#include <stdexcept>
#include <string>

namespace msfem {

/// Base class of every error raised by the library.
class Error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Mesh sizes that do not produce a nested periodic lattice.
class InvalidDiscretization : public Error
{
public:
    using Error::Error;
};

/// Malformed arguments: dimension mismatches, bad sequences, wrong sizes.
class InvalidInput : public Error
{
public:
    using Error::Error;
};

/// A constrained energy minimisation whose KKT matrix failed to factorize.
class IllPosedBasis : public Error
{
public:
    using Error::Error;
};

/// Reduced mass matrix is not positive definite.
class ReductionError : public Error
{
public:
    using Error::Error;
};

class DecompositionError : public Error
{
public:
    using Error::Error;
};

/// Sparse factorization or time stepping failure in the fine reference solver.
class SolverError : public Error
{
public:
    using Error::Error;
};

/// Relative error requested against a reference of zero norm.
class UndefinedError : public Error
{
public:
    using Error::Error;
};

class ConfigError : public Error
{
public:
    using Error::Error;
};

} // namespace msfem
