#include "nldep/error.hpp"

namespace nldep {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::invalid_argument: return "InvalidArgumentError";
        case ErrorCode::degenerate_sample: return "DegenerateSampleError";
        case ErrorCode::tie: return "TieError";
        case ErrorCode::lag: return "LagError";
        case ErrorCode::region_too_small: return "RegionTooSmallError";
        case ErrorCode::shape: return "ShapeError";
        case ErrorCode::alpha: return "AlphaError";
        case ErrorCode::kernel: return "KernelError";
        case ErrorCode::bandwidth: return "BandwidthError";
        case ErrorCode::gamma_range: return "GammaRangeError";
        case ErrorCode::sample_too_small: return "SampleTooSmallError";
        case ErrorCode::param: return "ParamError";
        case ErrorCode::subset: return "SubsetError";
        case ErrorCode::param_domain: return "ParamDomainError";
        case ErrorCode::convergence: return "ConvergenceError";
        case ErrorCode::support: return "SupportError";
        case ErrorCode::missing_column: return "MissingColumnError";
        case ErrorCode::parse: return "ParseError";
        case ErrorCode::io: return "IoError";
        case ErrorCode::domain: return "DomainError";
    }
    return "Error";
}

}  // namespace nldep
