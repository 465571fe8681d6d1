#include "uvtex/errors.hpp"

namespace uvtex {

const char* err_name(Err code) {
    switch (code) {
        case Err::MissingUVs: return "MissingUVs";
        case Err::OverlappingCharts: return "OverlappingCharts";
        case Err::BadIndex: return "BadIndex";
        case Err::BadBarycentric: return "BadBarycentric";
        case Err::MismatchedResolution: return "MismatchedResolution";
        case Err::DegenerateCamera: return "DegenerateCamera";
        case Err::ResolutionMismatch: return "ResolutionMismatch";
        case Err::ShapeMismatch: return "ShapeMismatch";
        case Err::BadTimestep: return "BadTimestep";
        case Err::BadClass: return "BadClass";
        case Err::BadConfig: return "BadConfig";
        case Err::BadRange: return "BadRange";
        case Err::EmptyDataset: return "EmptyDataset";
        case Err::IoError: return "IoError";
        case Err::ModelMissing: return "ModelMissing";
        case Err::TooSmall: return "TooSmall";
        case Err::BadArgument: return "BadArgument";
    }
    return "UnknownError";
}

} // namespace uvtex
