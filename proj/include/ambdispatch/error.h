#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace amb {

enum class ErrorCode {
    // geo_network
    NoRoute,
    UnknownNode,
    UnknownEdge,
    EmptyNetwork,
    NoStopLine,
    InvalidNetwork,
    // signal_priority
    UnknownApproach,
    InvalidRequest,
    InvalidPlan,
    // dispatch_core
    NoFreeAmbulance,
    IllegalTransition,
    // recognition
    ImageTooSmall,
    EmptyEdgeMap,
    PatternTooLarge,
    NotRecognizable,
    InvalidImage,
    // sim_engine
    ZeroSpeed,
    ScenarioInvalid,
    // gateway
    ParseError,
    ValidationError,
    BindError,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

} // namespace amb
