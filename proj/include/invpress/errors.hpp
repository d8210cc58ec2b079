#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace invpress {

// Exit-code family used by the command line front end.
enum class ErrorFamily { Spec = 1, Precondition = 2, Budget = 3 };

class Error : public std::runtime_error {
public:
    Error(std::string kind, const std::string& what, ErrorFamily family = ErrorFamily::Precondition)
        : std::runtime_error(what), kind_(std::move(kind)), family_(family) {}

    const std::string& kind() const noexcept { return kind_; }
    ErrorFamily family() const noexcept { return family_; }

private:
    std::string kind_;
    ErrorFamily family_;
};

#define INVPRESS_DEFINE_ERROR(Name, Family)                                      \
    class Name : public Error {                                                  \
    public:                                                                      \
        explicit Name(const std::string& what) : Error(#Name, what, Family) {}   \
    }

INVPRESS_DEFINE_ERROR(DimensionMismatch, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(DimensionUnsupported, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(DegenerateIntersection, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(CycleLimit, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(SingularMatrix, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(IllConditionedSplit, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(ControlOutOfRange, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(InvalidSystem, ErrorFamily::Spec);
INVPRESS_DEFINE_ERROR(NotControllable, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(NotHyperbolic, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(SingularShift, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(PreconditionViolated, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(DomainError, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(SteeringOutOfRange, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(CubeNotInD, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(UnspannableGrid, ErrorFamily::Precondition);
INVPRESS_DEFINE_ERROR(BudgetExceeded, ErrorFamily::Budget);

#undef INVPRESS_DEFINE_ERROR

/// Malformed potential source. `offset` is a byte offset into the source.
class ParseError : public Error {
public:
    ParseError(const std::string& what, std::size_t offset, std::vector<std::string> expected)
        : Error("ParseError", what, ErrorFamily::Spec), offset_(offset), expected_(std::move(expected)) {}

    std::size_t offset() const noexcept { return offset_; }
    const std::vector<std::string>& expected() const noexcept { return expected_; }

private:
    std::size_t offset_;
    std::vector<std::string> expected_;
};

class UnknownIdentifier : public Error {
public:
    UnknownIdentifier(const std::string& what, std::size_t offset)
        : Error("UnknownIdentifier", what, ErrorFamily::Spec), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

class ArityError : public Error {
public:
    ArityError(const std::string& what, std::size_t offset)
        : Error("ArityError", what, ErrorFamily::Spec), offset_(offset) {}
    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Invalid system or polytope description; `pointer` is a JSON pointer to the field.
class SpecError : public Error {
public:
    SpecError(const std::string& what, std::string pointer)
        : Error("SpecError", what, ErrorFamily::Spec), pointer_(std::move(pointer)) {}
    const std::string& pointer() const noexcept { return pointer_; }

private:
    std::string pointer_;
};

}  // namespace invpress
