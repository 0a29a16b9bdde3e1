#pragma once

#include <stdexcept>
#include <string>

namespace stabgain {

/// Base class for all analysis failures raised by this library.
struct AnalysisError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ZeroPolynomialError : AnalysisError {
    ZeroPolynomialError() : AnalysisError("operation requires a nonzero polynomial") {}
};

struct NonMinimalError : AnalysisError {
    NonMinimalError() : AnalysisError("system is not minimal (controllable and observable)") {}
};

struct NotControllableError : AnalysisError {
    NotControllableError() : AnalysisError("system is not controllable") {}
};

struct ComplexTargetsError : AnalysisError {
    ComplexTargetsError() : AnalysisError("target root multiset is not closed under conjugation") {}
};

struct DegenerateNumeratorError : AnalysisError {
    DegenerateNumeratorError() : AnalysisError("numerator polynomial is identically zero") {}
};

struct NotOddError : AnalysisError {
    NotOddError() : AnalysisError("polynomial has non-negligible even-degree coefficients") {}
};

/// The boundary-crossing polynomial vanished identically; the caller is
/// expected to fall back to grid classification.
struct BoundaryPolyZeroError : AnalysisError {
    using AnalysisError::AnalysisError;
};

/// Denominator and numerator share a root on the stability boundary, so the
/// boundary root persists for every gain and the stabilizing set is empty.
struct EmptyStabilizingSetError : AnalysisError {
    EmptyStabilizingSetError()
        : AnalysisError("denominator and numerator share a stability-boundary root; "
                        "the stabilizing set is empty") {}
};

struct MultiplicityMismatchError : AnalysisError {
    MultiplicityMismatchError(int expected, int found)
        : AnalysisError("root multiplicity mismatch: expected " + std::to_string(expected) +
                        ", found " + std::to_string(found)) {}
};

}  // namespace stabgain
