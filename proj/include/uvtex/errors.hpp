#pragma once

#include <stdexcept>
#include <string>

namespace uvtex {

enum class Err {
    MissingUVs,
    OverlappingCharts,
    BadIndex,
    BadBarycentric,
    MismatchedResolution,
    DegenerateCamera,
    ResolutionMismatch,
    ShapeMismatch,
    BadTimestep,
    BadClass,
    BadConfig,
    BadRange,
    EmptyDataset,
    IoError,
    ModelMissing,
    TooSmall,
    BadArgument,
};

const char* err_name(Err code);

class Error : public std::runtime_error {
public:
    Error(Err code, const std::string& msg)
        : std::runtime_error(std::string(err_name(code)) + ": " + msg), code(code) {}
    Err code;
};

[[noreturn]] inline void fail(Err code, const std::string& msg) {
    throw Error(code, msg);
}

inline void check(bool cond, Err code, const std::string& msg) {
    if (!cond) fail(code, msg);
}

} // namespace uvtex
