#pragma once

#include <stdexcept>
#include <string>

namespace ckstab {

/// Base class of every numeric failure raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Argument sits on a pole of Gamma (0, -1, -2, ...).
class PoleError : public Error {
public:
    using Error::Error;
};

/// Argument outside the domain of an operator (e.g. s >= t for a kernel).
class DomainError : public Error {
public:
    using Error::Error;
};

/// Iterative evaluation did not reach its tolerance. `achieved` carries the
/// best error estimate that was reached.
class ConvergenceError : public Error {
public:
    ConvergenceError(const std::string& what, double achieved)
        : Error(what), achieved_(achieved) {}
    double achieved() const noexcept { return achieved_; }

private:
    double achieved_;
};

/// Eigenvalue outside the sector |arg(lambda)| > alpha*pi/2.
class SectorError : public Error {
public:
    using Error::Error;
};

/// Sampling grid is empty, too short or not uniform in the transformed time.
class GridError : public Error {
public:
    using Error::Error;
};

/// Fractional order outside its admissible range.
class OrderError : public Error {
public:
    using Error::Error;
};

/// Eigenvector matrix too ill-conditioned to diagonalize without a Jordan hint.
class DefectiveMatrixError : public Error {
public:
    using Error::Error;
};

/// Spectrum fails (or sits on the boundary of) the sector condition.
class UnstableSpectrumError : public Error {
public:
    UnstableSpectrumError(const std::string& what, bool inconclusive)
        : Error(what), inconclusive_(inconclusive) {}
    bool inconclusive() const noexcept { return inconclusive_; }

private:
    bool inconclusive_;
};

/// Configuration file violates the documented schema.
class ConfigError : public Error {
public:
    using Error::Error;
};

}  // namespace ckstab
