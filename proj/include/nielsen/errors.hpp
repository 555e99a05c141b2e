#pragma once

#include <stdexcept>
#include <string>

namespace nielsen {

class NielsenError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

#define NIELSEN_DECLARE_ERROR(Name)                                         \
    class Name : public NielsenError {                                      \
    public:                                                                 \
        explicit Name(const std::string& what) : NielsenError(#Name ": " + what) {} \
    }

NIELSEN_DECLARE_ERROR(InvalidGlide);
NIELSEN_DECLARE_ERROR(InvalidHomomorphism);
NIELSEN_DECLARE_ERROR(NotEquivariant);
NIELSEN_DECLARE_ERROR(InvalidRegion);
NIELSEN_DECLARE_ERROR(UnsupportedGroupPair);
NIELSEN_DECLARE_ERROR(SingularPair);
NIELSEN_DECLARE_ERROR(NonRegularPoint);
NIELSEN_DECLARE_ERROR(ToleranceNotMet);
NIELSEN_DECLARE_ERROR(PerturbationTooLarge);
NIELSEN_DECLARE_ERROR(RegularizationFailed);
NIELSEN_DECLARE_ERROR(NotAdmissible);
NIELSEN_DECLARE_ERROR(NotOrientationTrue);
NIELSEN_DECLARE_ERROR(SingularJacobian);
NIELSEN_DECLARE_ERROR(NotRegular);
NIELSEN_DECLARE_ERROR(DomainMismatch);

#undef NIELSEN_DECLARE_ERROR

/// Configuration problems carry the offending line and field path.
class ConfigError : public NielsenError {
public:
    ConfigError(int line, std::string field, const std::string& message)
        : NielsenError(format(line, field, message)), line_(line), field_(std::move(field)) {}

    int line() const { return line_; }
    const std::string& field() const { return field_; }

private:
    static std::string format(int line, const std::string& field, const std::string& message) {
        std::string out = "ConfigError: ";
        if (line > 0) out += "line " + std::to_string(line) + ": ";
        if (!field.empty()) out += field + ": ";
        return out + message;
    }

    int line_;
    std::string field_;
};

} // namespace nielsen
