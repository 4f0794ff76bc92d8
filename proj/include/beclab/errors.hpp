#pragma once

#include <stdexcept>
#include <string>

namespace beclab {

/// Base class for all typed solver failures.
struct SolverError : std::runtime_error {
    explicit SolverError(const std::string& what) : std::runtime_error(what) {}
};

#define BECLAB_DEFINE_ERROR(Name)                                              \
    struct Name : SolverError {                                                \
        explicit Name(const std::string& what) : SolverError(#Name ": " + what) {} \
    }

// scattering_core
BECLAB_DEFINE_ERROR(NonPositiveMu);
BECLAB_DEFINE_ERROR(StepTooCoarse);
BECLAB_DEFINE_ERROR(InvalidPotential);
BECLAB_DEFINE_ERROR(GridMismatch);
BECLAB_DEFINE_ERROR(NegativeResult);
BECLAB_DEFINE_ERROR(BracketFailure);
BECLAB_DEFINE_ERROR(NodeDetected);
BECLAB_DEFINE_ERROR(NonMonotoneEta);

// gp_solver
BECLAB_DEFINE_ERROR(UnresolvedKernel);
BECLAB_DEFINE_ERROR(StabilityViolation);
BECLAB_DEFINE_ERROR(NaNDetected);
BECLAB_DEFINE_ERROR(InsufficientSnapshots);

// euler_solver
BECLAB_DEFINE_ERROR(CFLViolation);

// eikonal_solver
BECLAB_DEFINE_ERROR(PastCaustic);
BECLAB_DEFINE_ERROR(NewtonDivergence);

// limit_diagnostics
BECLAB_DEFINE_ERROR(DesyncedTrajectories);

// pair_excitation
BECLAB_DEFINE_ERROR(UnresolvedSupport);
BECLAB_DEFINE_ERROR(QuadratureSingular);

// cli_harness
BECLAB_DEFINE_ERROR(ConfigInvalid);

#undef BECLAB_DEFINE_ERROR

} // namespace beclab
