// error.hpp: exception types shared by every kerrloss module.
//
// Each error carries a stable machine-readable code (used in CLI error
// records and run manifests) next to the human-readable message.

#pragma once

#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace kerrloss {

class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& what)
        : std::runtime_error(what), code_(std::move(code)) {}

    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

#define KERRLOSS_DEFINE_ERROR(Name)                                        \
    class Name : public Error {                                            \
    public:                                                                \
        explicit Name(const std::string& what) : Error(#Name, what) {}     \
    }

KERRLOSS_DEFINE_ERROR(TruncationError);
KERRLOSS_DEFINE_ERROR(DimensionMismatch);
KERRLOSS_DEFINE_ERROR(InvalidArgument);
KERRLOSS_DEFINE_ERROR(UncorrelatedOnlyError);
KERRLOSS_DEFINE_ERROR(RateDecompositionError);
KERRLOSS_DEFINE_ERROR(ZeroCoupling);
KERRLOSS_DEFINE_ERROR(StepSizeUnderflow);
KERRLOSS_DEFINE_ERROR(DephasingUnsupported);
KERRLOSS_DEFINE_ERROR(NotFullyCorrelated);
KERRLOSS_DEFINE_ERROR(SubspaceViolation);
KERRLOSS_DEFINE_ERROR(GridCoverageError);
KERRLOSS_DEFINE_ERROR(DegenerateDetuning);

#undef KERRLOSS_DEFINE_ERROR

// Aggregates every violation found while checking a configuration, so callers
// see the complete list instead of the first failure.
class ConfigError : public Error {
public:
    explicit ConfigError(std::vector<std::string> violations)
        : Error("ConfigError", join(violations)), violations_(std::move(violations)) {}

    const std::vector<std::string>& violations() const noexcept { return violations_; }

private:
    static std::string join(const std::vector<std::string>& v) {
        std::string out = "invalid configuration:";
        for (const auto& s : v) out += "\n  - " + s;
        return out;
    }

    std::vector<std::string> violations_;
};

}  // namespace kerrloss
