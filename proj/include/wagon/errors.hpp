#pragma once

#include <stdexcept>
#include <string>

namespace wagon {

enum class ErrorCode {
    MalformedGraph,
    ShapeMismatch,
    UnsupportedLayerKind,
    DimensionMismatch,
    MagnitudeOverflow,
    PolicyMismatch,
    SelectionOutOfRange,
    NoBottleneckTag,
    CalibrationInfeasible,
    EmptyBatch,
    UnsupportedLayer,
    WidthOverflow,
    InputScaleMismatch,
    HintOverflow,
    LengthMismatch,
    UnsatisfiedWitness,
    EmptyCircuit,
    JobTimeout,
    JobFailed,
    ProtocolError,
    ImageTooSmall,
    SignatureAlreadyPresent,
    CapacityExceeded,
    ImplausibleHeader,
    LossyFormatRefused,
    InvalidArgument,
    IoError,
};

const char* error_code_name(ErrorCode code);

class WagonError : public std::runtime_error {
public:
    WagonError(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(error_code_name(code)) + ": " + what), code_(code) {}

    ErrorCode code() const { return code_; }

private:
    ErrorCode code_;
};

}  // namespace wagon
