#pragma once

#include <stdexcept>
#include <string>

namespace thermopt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument outside the domain of a model or coordinate map.
class DomainError : public Error {
public:
    using Error::Error;
};

/// Floating point range exceeded (overflow of an exponential sum).
class RangeError : public Error {
public:
    using Error::Error;
};

/// Moment target outside the interior of the convex hull of the sample values.
class InfeasibleError : public Error {
public:
    using Error::Error;
};

/// Iterative solver ran out of iterations.
class ConvergenceError : public Error {
public:
    using Error::Error;
};

/// A quantity that is non-negative in exact arithmetic came out negative.
class NumericalInconsistencyError : public Error {
public:
    using Error::Error;
};

/// Point does not lie on the requested invariant manifold.
class OffManifoldError : public Error {
public:
    using Error::Error;
};

/// Evaluation left the chart of the angle coordinates.
class ChartError : public Error {
public:
    using Error::Error;
};

/// Integral levels with a multiple root of the discriminant.
class DegenerateLevelsError : public Error {
public:
    using Error::Error;
};

/// Hamiltonian too close to zero for the virial corrections.
class NearSingularError : public Error {
public:
    using Error::Error;
};

/// Boundary problem for which no costate reaches the endpoint.
class UnreachableEndpointError : public Error {
public:
    using Error::Error;
};

/// Input too short for the requested quadrature.
class InsufficientSamplesError : public Error {
public:
    using Error::Error;
};

/// Formula-based and root-counting component counts disagree.
class InternalConsistencyError : public Error {
public:
    using Error::Error;
};

/// Malformed or incomplete scenario / JSON document.
class ValidationError : public Error {
public:
    using Error::Error;
};

} // namespace thermopt
