#pragma once

#include <stdexcept>
#include <string>

namespace tdlab {

// Numerical failures map to exit code 2, configuration problems to 1.
struct NumericalError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

#define TDLAB_ERROR(Name, Base)                 \
    struct Name : Base {                        \
        explicit Name(const std::string& what)  \
            : Base(#Name ": " + what) {}        \
    };

TDLAB_ERROR(NonFinite, NumericalError)
TDLAB_ERROR(NoConvergence, NumericalError)
TDLAB_ERROR(BranchInstability, NumericalError)
TDLAB_ERROR(DegenerateDenominator, NumericalError)
TDLAB_ERROR(ExtrapolationUnstable, NumericalError)
TDLAB_ERROR(NegativeRadicand, NumericalError)
TDLAB_ERROR(Divergent, NumericalError)
TDLAB_ERROR(DegenerateMoments, NumericalError)
TDLAB_ERROR(SingularKernel, NumericalError)
TDLAB_ERROR(Diverged, NumericalError)

TDLAB_ERROR(UnknownActivation, ConfigError)
TDLAB_ERROR(ZeroSw2, ConfigError)
TDLAB_ERROR(InvalidParams, ConfigError)
TDLAB_ERROR(MissingColumn, ConfigError)

#undef TDLAB_ERROR

}  // namespace tdlab
