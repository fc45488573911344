#include "ambdispatch/error.h"

namespace amb {

std::string_view to_string(ErrorCode code)
{
    switch (code) {
    case ErrorCode::NoRoute: return "NoRoute";
    case ErrorCode::UnknownNode: return "UnknownNode";
    case ErrorCode::UnknownEdge: return "UnknownEdge";
    case ErrorCode::EmptyNetwork: return "EmptyNetwork";
    case ErrorCode::NoStopLine: return "NoStopLine";
    case ErrorCode::InvalidNetwork: return "InvalidNetwork";
    case ErrorCode::UnknownApproach: return "UnknownApproach";
    case ErrorCode::InvalidRequest: return "InvalidRequest";
    case ErrorCode::InvalidPlan: return "InvalidPlan";
    case ErrorCode::NoFreeAmbulance: return "NoFreeAmbulance";
    case ErrorCode::IllegalTransition: return "IllegalTransition";
    case ErrorCode::ImageTooSmall: return "ImageTooSmall";
    case ErrorCode::EmptyEdgeMap: return "EmptyEdgeMap";
    case ErrorCode::PatternTooLarge: return "PatternTooLarge";
    case ErrorCode::NotRecognizable: return "NotRecognizable";
    case ErrorCode::InvalidImage: return "InvalidImage";
    case ErrorCode::ZeroSpeed: return "ZeroSpeed";
    case ErrorCode::ScenarioInvalid: return "ScenarioInvalid";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::BindError: return "BindError";
    }
    return "Unknown";
}

} // namespace amb
