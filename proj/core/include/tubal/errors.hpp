#pragma once

#include <stdexcept>
#include <string>

namespace tubal {

// Base class for everything this library throws on purpose.
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ShapeMismatch : public Error {
public:
    using Error::Error;
};

class InvalidDims : public Error {
public:
    using Error::Error;
};

class IndexOutOfRange : public Error {
public:
    using Error::Error;
};

// Inverse DFT asked to produce a real tensor from slices that are not
// conjugate-symmetric within tolerance.
class SymmetryViolation : public Error {
public:
    using Error::Error;
};

class NotOrthonormal : public Error {
public:
    using Error::Error;
};

class SingularInput : public Error {
public:
    using Error::Error;
};

class NumericalFailure : public Error {
public:
    using Error::Error;
};

class InvalidRank : public Error {
public:
    using Error::Error;
};

class DivisionByZero : public Error {
public:
    using Error::Error;
};

// The per-slice signal factor V_X^T * U lost rank; carries slice and value.
class RankDeficientSignal : public Error {
public:
    RankDeficientSignal(const std::string& what, int slice, double sigma_r)
        : Error(what), slice_(slice), sigma_r_(sigma_r) {}
    int slice() const { return slice_; }
    double sigma_r() const { return sigma_r_; }

private:
    int slice_;
    double sigma_r_;
};

class Divergence : public Error {
public:
    Divergence(const std::string& what, long iteration)
        : Error(what), iteration_(iteration) {}
    long iteration() const { return iteration_; }

private:
    long iteration_;
};

class ParseError : public Error {
public:
    using Error::Error;
};

class ValidationError : public Error {
public:
    using Error::Error;
};

class FormatError : public Error {
public:
    using Error::Error;
};

class NonPositiveOnLogAxis : public Error {
public:
    using Error::Error;
};

}  // namespace tubal
