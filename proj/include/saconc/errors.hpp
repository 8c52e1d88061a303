#pragma once

#include <stdexcept>
#include <string>

namespace saconc {

// Error taxonomy used across the library. All are runtime_error subclasses so
// callers can catch saconc failures uniformly or by specific cause.
#define SACONC_ERROR(Name)                                   \
  struct Name : std::runtime_error {                         \
    explicit Name(const std::string& what)                   \
        : std::runtime_error(std::string(#Name ": ") + what) {} \
  }

SACONC_ERROR(NotErgodic);
SACONC_ERROR(SingularSystem);
SACONC_ERROR(NotHurwitz);
SACONC_ERROR(UnsupportedModel);
SACONC_ERROR(InvalidGamma);
SACONC_ERROR(GridTooSmall);
SACONC_ERROR(MissingLipschitz);
SACONC_ERROR(NoConvergence);
SACONC_ERROR(Infeasible);
SACONC_ERROR(ConditionViolated);
SACONC_ERROR(SolverStall);
SACONC_ERROR(DegenerateStart);
SACONC_ERROR(RegimeUnsupported);
SACONC_ERROR(HorizonExceeded);
SACONC_ERROR(BadParams);
SACONC_ERROR(NonFinite);
SACONC_ERROR(LedgerMissing);
SACONC_ERROR(BadConfig);

#undef SACONC_ERROR

}  // namespace saconc
