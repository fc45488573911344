#pragma once

#include <cstddef>
#include <deque>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace amb {

struct Phase {
    std::string id;
    std::vector<std::string> approaches;
    double green_min_s = 0.0;
    double green_nominal_s = 0.0;
    double green_max_s = 0.0; // bounds Normal-mode green only
};

struct PhasePlan {
    std::string controller_id;
    std::vector<Phase> phases;
    double intergreen_s = 0.0;
    double clearance_margin_s = 1.0;
    double max_extension_s = 300.0; // hard ceiling on accumulated extension per green

    /// Throws InvalidPlan when phase timings or approach coverage are inconsistent.
    void validate() const;
    std::optional<std::size_t> phase_of(const std::string& approach) const;
    std::vector<std::string> approaches() const;
};

enum class SignalMode { Normal, Extended, PreemptPending, Intergreen };
enum class Signal { Green, Red };

const char* to_string(SignalMode mode);
const char* to_string(Signal signal);

struct PriorityRequest {
    std::string vehicle;
    std::string approach;
    double t_d_s = 0.0;       // predicted time to the stop line, measured from issued_at_s
    double issued_at_s = 0.0; // simulation time

    bool operator==(const PriorityRequest&) const = default;
};

struct ControllerState {
    std::size_t current_phase = 0; // during Intergreen: the phase just left
    std::size_t next_phase = 0;    // phase that starts when Intergreen ends
    double phase_elapsed_s = 0.0;
    double intergreen_elapsed_s = 0.0;
    SignalMode mode = SignalMode::Normal;
    std::optional<PriorityRequest> active_priority;
    std::deque<PriorityRequest> queued;
    double remaining_green_s = 0.0;   // G_K at the last grant decision
    double granted_extension_s = 0.0; // accumulated G'_A for the current green
    double truncate_at_s = 0.0;       // PreemptPending: elapsed time at which green ends
    double clock_s = 0.0;

    bool operator==(const ControllerState&) const = default;
};

ControllerState initial_state(const PhasePlan& plan, std::size_t phase = 0, double elapsed_s = 0.0,
                              double clock_s = 0.0);

/// Green left in the current phase: nominal minus elapsed (floored at 0) plus
/// any granted extension. Zero during Intergreen.
double remaining_green(const ControllerState& state, const PhasePlan& plan);

enum class DetectionOutcome {
    Recorded,   // approach green and t_d fits in the remaining green
    Extended,   // approach green, extension granted
    Preempting, // approach red, conflicting phase truncated
    Queued,     // another vehicle already holds priority (PriorityConflict)
    Duplicate,  // vehicle already holds or awaits priority here
};

const char* to_string(DetectionOutcome outcome);

struct DetectionResult {
    ControllerState state;
    DetectionOutcome outcome = DetectionOutcome::Recorded;
    double remaining_green_s = 0.0; // G_K seen by the request
    double extension_s = 0.0;       // G'_A granted by this request
};

DetectionResult on_detection(ControllerState state, const PhasePlan& plan, const PriorityRequest& req);

struct PhaseTransition {
    enum class Kind { GreenEnded, GreenStarted };
    Kind kind = Kind::GreenEnded;
    std::size_t phase = 0;
    double green_s = 0.0;   // GreenEnded: total green shown
    std::string cause;      // nominal | extension | preempt | hold_ceiling | intergreen
};

struct TickResult {
    ControllerState state;
    std::vector<std::pair<std::string, Signal>> signals; // plan approach order
    std::vector<PhaseTransition> transitions;
};

TickResult tick(ControllerState state, const PhasePlan& plan, double dt_s);

std::vector<std::pair<std::string, Signal>> signals(const ControllerState& state, const PhasePlan& plan);
Signal signal_for(const ControllerState& state, const PhasePlan& plan, const std::string& approach);

/// Clears priority held by `vehicle` and promotes the next queued request.
ControllerState on_stop_line_crossed(ControllerState state, const PhasePlan& plan, const std::string& vehicle);

} // namespace amb
