#pragma once

#include <stdexcept>
#include <string>

namespace nldep {

enum class ErrorCode {
    invalid_argument = 1,
    degenerate_sample,
    tie,
    lag,
    region_too_small,
    shape,
    alpha,
    kernel,
    bandwidth,
    gamma_range,
    sample_too_small,
    param,
    subset,
    param_domain,
    convergence,
    support,
    missing_column,
    parse,
    io,
    domain,
};

const char* error_code_name(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what) : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

template <ErrorCode C>
class CodedError : public Error {
public:
    explicit CodedError(const std::string& what) : Error(C, what) {}
};

using InvalidArgumentError = CodedError<ErrorCode::invalid_argument>;
using DegenerateSampleError = CodedError<ErrorCode::degenerate_sample>;
using TieError = CodedError<ErrorCode::tie>;
using LagError = CodedError<ErrorCode::lag>;
using RegionTooSmallError = CodedError<ErrorCode::region_too_small>;
using ShapeError = CodedError<ErrorCode::shape>;
using AlphaError = CodedError<ErrorCode::alpha>;
using KernelError = CodedError<ErrorCode::kernel>;
using BandwidthError = CodedError<ErrorCode::bandwidth>;
using GammaRangeError = CodedError<ErrorCode::gamma_range>;
using SampleTooSmallError = CodedError<ErrorCode::sample_too_small>;
using ParamError = CodedError<ErrorCode::param>;
using SubsetError = CodedError<ErrorCode::subset>;
using ParamDomainError = CodedError<ErrorCode::param_domain>;
using ConvergenceError = CodedError<ErrorCode::convergence>;
using SupportError = CodedError<ErrorCode::support>;
using MissingColumnError = CodedError<ErrorCode::missing_column>;
using ParseError = CodedError<ErrorCode::parse>;
using IoError = CodedError<ErrorCode::io>;
using DomainError = CodedError<ErrorCode::domain>;

}  // namespace nldep
