#pragma once

#include <stdexcept>
#include <string>

namespace cmw {

#define CMW_DEFINE_ERROR(Name)                                   \
    class Name : public std::runtime_error {                     \
    public:                                                      \
        explicit Name(const std::string& what)                   \
            : std::runtime_error(#Name ": " + what) {}           \
    };

CMW_DEFINE_ERROR(AdmissibilityError)
CMW_DEFINE_ERROR(JacobiError)
CMW_DEFINE_ERROR(DegreeError)
CMW_DEFINE_ERROR(SolveError)
CMW_DEFINE_ERROR(NotRealError)
CMW_DEFINE_ERROR(TorsionError)
CMW_DEFINE_ERROR(BackendMismatch)
CMW_DEFINE_ERROR(NotASolution)
CMW_DEFINE_ERROR(PreconditionError)
CMW_DEFINE_ERROR(WrongModel)
CMW_DEFINE_ERROR(ConfigError)
CMW_DEFINE_ERROR(ParseError)

#undef CMW_DEFINE_ERROR

}  // namespace cmw
