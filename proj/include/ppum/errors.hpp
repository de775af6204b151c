#ifndef PPUM_ERRORS_HPP
#define PPUM_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace ppum {

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define PPUM_ERROR_TYPE(Name)                    \
    class Name : public Error {                  \
    public:                                      \
        using Error::Error;                      \
    }

PPUM_ERROR_TYPE(NonConforming);
PPUM_ERROR_TYPE(DegenerateSimplex);
PPUM_ERROR_TYPE(DanglingVertex);
PPUM_ERROR_TYPE(OutsideDomain);
PPUM_ERROR_TYPE(IncompatibleGenealogy);
PPUM_ERROR_TYPE(QuadratureFailure);
PPUM_ERROR_TYPE(NotSpd);
PPUM_ERROR_TYPE(LineSearchFailure);
PPUM_ERROR_TYPE(MaxIterations);
PPUM_ERROR_TYPE(InfeasibleIterate);
PPUM_ERROR_TYPE(SupportViolation);
PPUM_ERROR_TYPE(TooFewSimplices);
PPUM_ERROR_TYPE(EigenNoConvergence);
PPUM_ERROR_TYPE(UnknownDomain);
PPUM_ERROR_TYPE(UnknownProblem);
PPUM_ERROR_TYPE(ConfigError);
PPUM_ERROR_TYPE(IoError);

#undef PPUM_ERROR_TYPE

} // namespace ppum

#endif // PPUM_ERRORS_HPP
