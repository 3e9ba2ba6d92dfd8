#ifndef HAMFLEX_ERRORS_HPP
#define HAMFLEX_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace hamflex {

/// Base class for all hamflex errors. Carries a stable tag usable in
/// CLI exit-code mapping and JSON reports.
class Error : public std::runtime_error {
public:
    Error(std::string tag, const std::string& msg)
        : std::runtime_error(tag + ": " + msg), tag_(std::move(tag)) {}
    const std::string& tag() const { return tag_; }

private:
    std::string tag_;
};

#define HAMFLEX_DEFINE_ERROR(Name)                       \
    class Name : public Error {                          \
    public:                                              \
        explicit Name(const std::string& msg)            \
            : Error(#Name, msg) {}                       \
    }

HAMFLEX_DEFINE_ERROR(SpecMismatch);
HAMFLEX_DEFINE_ERROR(EtaTooSmall);
HAMFLEX_DEFINE_ERROR(RegionOverlap);
HAMFLEX_DEFINE_ERROR(BudgetExceeded);
HAMFLEX_DEFINE_ERROR(EpsTooSmallForGrid);
HAMFLEX_DEFINE_ERROR(Disconnected);
HAMFLEX_DEFINE_ERROR(ScaleTooLarge);
HAMFLEX_DEFINE_ERROR(UnhostedCube);
HAMFLEX_DEFINE_ERROR(CubeTooLarge);
HAMFLEX_DEFINE_ERROR(CubesOverlap);
HAMFLEX_DEFINE_ERROR(NoFreeSlot);
HAMFLEX_DEFINE_ERROR(BlockedRoute);
HAMFLEX_DEFINE_ERROR(CFLViolation);
HAMFLEX_DEFINE_ERROR(CorridorBlocked);
HAMFLEX_DEFINE_ERROR(IdentityMismatch);
HAMFLEX_DEFINE_ERROR(VolumeTooSmall);
HAMFLEX_DEFINE_ERROR(TimeGridTooCoarse);
HAMFLEX_DEFINE_ERROR(CannotMeetTolerance);
HAMFLEX_DEFINE_ERROR(NoWindow);
HAMFLEX_DEFINE_ERROR(RegionTooSmall);
HAMFLEX_DEFINE_ERROR(GridExhausted);
HAMFLEX_DEFINE_ERROR(HypothesisViolated);
HAMFLEX_DEFINE_ERROR(InequalityViolated);
HAMFLEX_DEFINE_ERROR(TamperDetected);
HAMFLEX_DEFINE_ERROR(IoError);

#undef HAMFLEX_DEFINE_ERROR

} // namespace hamflex

#endif
