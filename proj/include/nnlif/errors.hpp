#pragma once

#include <stdexcept>
#include <string>

namespace nnlif {

/// Base class for all library errors.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

/// Diffusion coefficient evaluated to a value <= 0.
class NonpositiveDiffusion : public Error {
public:
    using Error::Error;
};

/// Initial profile with vanishing mass, or a reconstruction request that
/// cannot be normalised.
class DegenerateProfile : public Error {
public:
    using Error::Error;
};

/// Extracted firing rate below the clamp window.
class NegativeRate : public Error {
public:
    using Error::Error;
};

/// CFL time step fell below the configured floor.
class TimestepCollapse : public Error {
public:
    using Error::Error;
};

/// A runtime invariant (mass conservation, positivity, ...) was violated.
class InvariantViolation : public Error {
public:
    using Error::Error;
};

/// Adaptive quadrature could not reach the requested tolerance.
class QuadratureFailure : public Error {
public:
    using Error::Error;
};

/// Root bracketing exceeded its expansion cap without a sign change.
class BracketFailure : public Error {
public:
    using Error::Error;
};

/// Asymptotic limit requested for a parameter set outside the covered cases.
class UndefinedLimit : public Error {
public:
    using Error::Error;
};

/// Entropy reference loses too much of the current state's mass below the
/// support floor.
class ReferenceDegenerate : public Error {
public:
    using Error::Error;
};

/// No monotone decay window long enough to fit a rate.
class InsufficientDecay : public Error {
public:
    using Error::Error;
};

/// Config text could not be parsed.  Carries a 1-based line number.
class ParseError : public Error {
public:
    ParseError(const std::string& msg, int line)
        : Error("parse error at line " + std::to_string(line) + ": " + msg), line_(line) {}
    int line() const { return line_; }

private:
    int line_ = 0;
};

/// Config parsed but violates a documented invariant.
class ValidationError : public Error {
public:
    using Error::Error;
};

/// Preset name not in the built-in table.
class UnknownPreset : public Error {
public:
    using Error::Error;
};

/// Filesystem failure while emitting artifacts.
class IoError : public Error {
public:
    using Error::Error;
};

} // namespace nnlif
