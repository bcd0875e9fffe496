#pragma once

#include <stdexcept>
#include <string>

namespace manakov {

// Three families, mirrored by the CLI exit codes (2, 3, 4).
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class DomainError : public Error {
public:
    using Error::Error;
};

class NumericError : public Error {
public:
    using Error::Error;
};

class RecoveryError : public Error {
public:
    using Error::Error;
};

#define MANAKOV_ERROR(Name, Base)                                             \
    class Name : public Base {                                                \
    public:                                                                   \
        explicit Name(const std::string& what) : Base(#Name ": " + what) {}   \
    }

MANAKOV_ERROR(DuplicateModulus, DomainError);
MANAKOV_ERROR(IndexOutOfRange, DomainError);

MANAKOV_ERROR(NonFiniteState, NumericError);
MANAKOV_ERROR(BranchDiscontinuity, NumericError);
MANAKOV_ERROR(DegenerateLevel, NumericError);
MANAKOV_ERROR(RepeatedRoot, NumericError);
MANAKOV_ERROR(BranchSelectionFailed, NumericError);
MANAKOV_ERROR(VanishingDelta, NumericError);
MANAKOV_ERROR(InconsistentModulus, NumericError);
MANAKOV_ERROR(FitResidualTooLarge, NumericError);
MANAKOV_ERROR(BranchPointCollision, NumericError);
MANAKOV_ERROR(QuadratureFailure, NumericError);
MANAKOV_ERROR(PathNearBranchPoint, NumericError);
MANAKOV_ERROR(CalibrationSpreadTooLarge, NumericError);
MANAKOV_ERROR(ThetaZeroDenominator, NumericError);

MANAKOV_ERROR(DiagonalDivisor, RecoveryError);
MANAKOV_ERROR(NoConvergence, RecoveryError);
MANAKOV_ERROR(AmbiguousSolution, RecoveryError);

#undef MANAKOV_ERROR

}  // namespace manakov
