#include "wagon/errors.hpp"

namespace wagon {

const char* error_code_name(ErrorCode code) {
    switch (code) {
        case ErrorCode::MalformedGraph: return "MalformedGraph";
        case ErrorCode::ShapeMismatch: return "ShapeMismatch";
        case ErrorCode::UnsupportedLayerKind: return "UnsupportedLayerKind";
        case ErrorCode::DimensionMismatch: return "DimensionMismatch";
        case ErrorCode::MagnitudeOverflow: return "MagnitudeOverflow";
        case ErrorCode::PolicyMismatch: return "PolicyMismatch";
        case ErrorCode::SelectionOutOfRange: return "SelectionOutOfRange";
        case ErrorCode::NoBottleneckTag: return "NoBottleneckTag";
        case ErrorCode::CalibrationInfeasible: return "CalibrationInfeasible";
        case ErrorCode::EmptyBatch: return "EmptyBatch";
        case ErrorCode::UnsupportedLayer: return "UnsupportedLayer";
        case ErrorCode::WidthOverflow: return "WidthOverflow";
        case ErrorCode::InputScaleMismatch: return "InputScaleMismatch";
        case ErrorCode::HintOverflow: return "HintOverflow";
        case ErrorCode::LengthMismatch: return "LengthMismatch";
        case ErrorCode::UnsatisfiedWitness: return "UnsatisfiedWitness";
        case ErrorCode::EmptyCircuit: return "EmptyCircuit";
        case ErrorCode::JobTimeout: return "JobTimeout";
        case ErrorCode::JobFailed: return "JobFailed";
        case ErrorCode::ProtocolError: return "ProtocolError";
        case ErrorCode::ImageTooSmall: return "ImageTooSmall";
        case ErrorCode::SignatureAlreadyPresent: return "SignatureAlreadyPresent";
        case ErrorCode::CapacityExceeded: return "CapacityExceeded";
        case ErrorCode::ImplausibleHeader: return "ImplausibleHeader";
        case ErrorCode::LossyFormatRefused: return "LossyFormatRefused";
        case ErrorCode::InvalidArgument: return "InvalidArgument";
        case ErrorCode::IoError: return "IoError";
    }
    return "UnknownError";
}

}  // namespace wagon
