#include "ambdispatch/signal_priority.h"

#include "ambdispatch/error.h"

#include <algorithm>
#include <set>

namespace amb {

namespace {

// Step sizes such as 0.1 s accumulate rounding error; thresholds are compared
// with this slack so a phase ends on the tick that nominally reaches it.
constexpr double kTimeEps = 1e-9;

bool reached(double elapsed, double limit) { return elapsed + kTimeEps >= limit; }

std::size_t holder_phase(const ControllerState& state, const PhasePlan& plan)
{
    return *plan.phase_of(state.active_priority->approach);
}

double green_end(const ControllerState& state, const PhasePlan& plan)
{
    const Phase& phase = plan.phases[state.current_phase];
    switch (state.mode) {
    case SignalMode::Extended: return phase.green_nominal_s + state.granted_extension_s;
    case SignalMode::PreemptPending: return state.truncate_at_s;
    default: return phase.green_nominal_s;
    }
}

struct Grant {
    DetectionOutcome outcome = DetectionOutcome::Recorded;
    double remaining_green_s = 0.0;
    double extension_s = 0.0;
};

// Applies the held request to the current controller state. `td_from_clock`
// is the predicted time to the stop line measured from state.clock_s.
Grant grant(ControllerState& state, const PhasePlan& plan, double td_from_clock)
{
    Grant g;
    std::size_t target = holder_phase(state, plan);

    if (state.mode == SignalMode::Intergreen) {
        if (state.next_phase != target) {
            state.next_phase = target;
            g.outcome = DetectionOutcome::Preempting;
        }
        return g;
    }

    if (target == state.current_phase) {
        g.remaining_green_s = remaining_green(state, plan);
        state.remaining_green_s = g.remaining_green_s;
        if (td_from_clock > g.remaining_green_s) {
            double wanted = td_from_clock - g.remaining_green_s + plan.clearance_margin_s;
            double room = std::max(0.0, plan.max_extension_s - state.granted_extension_s);
            g.extension_s = std::min(wanted, room);
            if (g.extension_s > 0.0) {
                state.granted_extension_s += g.extension_s;
                state.mode = SignalMode::Extended;
                g.outcome = DetectionOutcome::Extended;
            }
        }
        return g;
    }

    const Phase& conflicting = plan.phases[state.current_phase];
    state.mode = SignalMode::PreemptPending;
    state.granted_extension_s = 0.0;
    state.truncate_at_s = std::max(state.phase_elapsed_s, conflicting.green_min_s);
    state.remaining_green_s = 0.0;
    g.outcome = DetectionOutcome::Preempting;
    return g;
}

void start_phase(ControllerState& state, const PhasePlan& plan, std::size_t phase,
                 std::vector<PhaseTransition>& transitions)
{
    state.current_phase = phase;
    state.next_phase = (phase + 1) % plan.phases.size();
    state.phase_elapsed_s = 0.0;
    state.intergreen_elapsed_s = 0.0;
    state.mode = SignalMode::Normal;
    state.granted_extension_s = 0.0;
    state.truncate_at_s = 0.0;
    transitions.push_back({PhaseTransition::Kind::GreenStarted, phase, 0.0, "intergreen"});
    if (state.active_priority) {
        const PriorityRequest& req = *state.active_priority;
        grant(state, plan, req.t_d_s - (state.clock_s - req.issued_at_s));
    }
}

void end_green(ControllerState& state, const PhasePlan& plan, const std::string& cause,
               std::vector<PhaseTransition>& transitions)
{
    transitions.push_back(
        {PhaseTransition::Kind::GreenEnded, state.current_phase, state.phase_elapsed_s, cause});
    std::size_t next = (state.current_phase + 1) % plan.phases.size();
    if (state.active_priority) {
        std::size_t target = holder_phase(state, plan);
        if (target != state.current_phase)
            next = target;
    }
    state.mode = SignalMode::Intergreen;
    state.next_phase = next;
    state.intergreen_elapsed_s = 0.0;
    state.granted_extension_s = 0.0;
    state.truncate_at_s = 0.0;
    if (plan.intergreen_s <= 0.0)
        start_phase(state, plan, next, transitions);
}

} // namespace

const char* to_string(SignalMode mode)
{
    switch (mode) {
    case SignalMode::Normal: return "Normal";
    case SignalMode::Extended: return "Extended";
    case SignalMode::PreemptPending: return "PreemptPending";
    case SignalMode::Intergreen: return "Intergreen";
    }
    return "?";
}

const char* to_string(Signal signal) { return signal == Signal::Green ? "Green" : "Red"; }

const char* to_string(DetectionOutcome outcome)
{
    switch (outcome) {
    case DetectionOutcome::Recorded: return "Recorded";
    case DetectionOutcome::Extended: return "Extended";
    case DetectionOutcome::Preempting: return "Preempting";
    case DetectionOutcome::Queued: return "Queued";
    case DetectionOutcome::Duplicate: return "Duplicate";
    }
    return "?";
}

void PhasePlan::validate() const
{
    auto fail = [this](const std::string& what) {
        throw Error(ErrorCode::InvalidPlan, "controller '" + controller_id + "': " + what);
    };
    if (phases.size() < 2)
        fail("needs at least 2 phases");
    if (intergreen_s < 0.0)
        fail("intergreen_s must be >= 0");
    if (clearance_margin_s < 0.0)
        fail("clearance_margin_s must be >= 0");
    if (max_extension_s < 0.0)
        fail("max_extension_s must be >= 0");
    std::set<std::string> seen;
    for (const Phase& p : phases) {
        if (!(p.green_min_s > 0.0 && p.green_min_s <= p.green_nominal_s && p.green_nominal_s <= p.green_max_s))
            fail("phase '" + p.id + "' needs 0 < green_min_s <= green_nominal_s <= green_max_s");
        for (const auto& a : p.approaches) {
            if (!seen.insert(a).second)
                fail("approach '" + a + "' is served by more than one phase");
        }
    }
}

std::optional<std::size_t> PhasePlan::phase_of(const std::string& approach) const
{
    for (std::size_t i = 0; i < phases.size(); ++i) {
        const auto& a = phases[i].approaches;
        if (std::find(a.begin(), a.end(), approach) != a.end())
            return i;
    }
    return std::nullopt;
}

std::vector<std::string> PhasePlan::approaches() const
{
    std::vector<std::string> out;
    for (const Phase& p : phases)
        out.insert(out.end(), p.approaches.begin(), p.approaches.end());
    return out;
}

ControllerState initial_state(const PhasePlan& plan, std::size_t phase, double elapsed_s, double clock_s)
{
    if (phase >= plan.phases.size())
        throw Error(ErrorCode::InvalidPlan, "initial phase out of range");
    ControllerState s;
    s.current_phase = phase;
    s.next_phase = (phase + 1) % plan.phases.size();
    s.phase_elapsed_s = elapsed_s;
    s.clock_s = clock_s;
    return s;
}

double remaining_green(const ControllerState& state, const PhasePlan& plan)
{
    if (state.mode == SignalMode::Intergreen)
        return 0.0;
    const Phase& phase = plan.phases[state.current_phase];
    return std::max(0.0, phase.green_nominal_s - state.phase_elapsed_s) + state.granted_extension_s;
}

DetectionResult on_detection(ControllerState state, const PhasePlan& plan, const PriorityRequest& req)
{
    if (!plan.phase_of(req.approach))
        throw Error(ErrorCode::UnknownApproach,
                    "controller '" + plan.controller_id + "' has no approach '" + req.approach + "'");
    if (!(req.t_d_s > 0.0))
        throw Error(ErrorCode::InvalidRequest, "t_d_s must be > 0");

    DetectionResult result;
    if (state.active_priority) {
        bool known = state.active_priority->vehicle == req.vehicle ||
                     std::any_of(state.queued.begin(), state.queued.end(),
                                 [&](const PriorityRequest& q) { return q.vehicle == req.vehicle; });
        if (!known)
            state.queued.push_back(req);
        result.outcome = known ? DetectionOutcome::Duplicate : DetectionOutcome::Queued;
        result.state = std::move(state);
        return result;
    }

    state.active_priority = req;
    double td_from_clock = req.t_d_s + std::max(0.0, req.issued_at_s - state.clock_s);
    Grant g = grant(state, plan, td_from_clock);
    // Report G_K as seen at the request instant rather than at the controller clock.
    double lag = std::max(0.0, req.issued_at_s - state.clock_s);
    result.outcome = g.outcome;
    result.remaining_green_s = std::max(0.0, g.remaining_green_s - lag);
    result.extension_s = g.extension_s;
    if (state.mode != SignalMode::Intergreen && holder_phase(state, plan) == state.current_phase)
        state.remaining_green_s = result.remaining_green_s;
    result.state = std::move(state);
    return result;
}

TickResult tick(ControllerState state, const PhasePlan& plan, double dt_s)
{
    if (!(dt_s > 0.0))
        throw Error(ErrorCode::InvalidRequest, "tick needs dt_s > 0");

    TickResult out;
    state.clock_s += dt_s;

    if (state.mode == SignalMode::Intergreen) {
        state.intergreen_elapsed_s += dt_s;
        if (reached(state.intergreen_elapsed_s, plan.intergreen_s))
            start_phase(state, plan, state.next_phase, out.transitions);
    } else {
        state.phase_elapsed_s += dt_s;
        if (reached(state.phase_elapsed_s, green_end(state, plan))) {
            bool holder_on_green = state.active_priority && state.mode != SignalMode::PreemptPending &&
                                   holder_phase(state, plan) == state.current_phase;
            const Phase& phase = plan.phases[state.current_phase];
            if (holder_on_green) {
                // The holder has not crossed yet: keep its green one more step.
                double needed = state.phase_elapsed_s - phase.green_nominal_s + dt_s;
                if (needed <= plan.max_extension_s) {
                    state.granted_extension_s = std::max(state.granted_extension_s, needed);
                    state.mode = SignalMode::Extended;
                } else {
                    end_green(state, plan, "hold_ceiling", out.transitions);
                }
            } else {
                const char* cause = state.mode == SignalMode::PreemptPending ? "preempt"
                                    : state.mode == SignalMode::Extended   ? "extension"
                                                                           : "nominal";
                end_green(state, plan, cause, out.transitions);
            }
        }
    }

    out.signals = signals(state, plan);
    out.state = std::move(state);
    return out;
}

std::vector<std::pair<std::string, Signal>> signals(const ControllerState& state, const PhasePlan& plan)
{
    std::vector<std::pair<std::string, Signal>> out;
    for (std::size_t i = 0; i < plan.phases.size(); ++i) {
        bool green = state.mode != SignalMode::Intergreen && i == state.current_phase;
        for (const auto& a : plan.phases[i].approaches)
            out.emplace_back(a, green ? Signal::Green : Signal::Red);
    }
    return out;
}

Signal signal_for(const ControllerState& state, const PhasePlan& plan, const std::string& approach)
{
    auto phase = plan.phase_of(approach);
    if (!phase)
        throw Error(ErrorCode::UnknownApproach,
                    "controller '" + plan.controller_id + "' has no approach '" + approach + "'");
    bool green = state.mode != SignalMode::Intergreen && *phase == state.current_phase;
    return green ? Signal::Green : Signal::Red;
}

ControllerState on_stop_line_crossed(ControllerState state, const PhasePlan& plan, const std::string& vehicle)
{
    if (!state.active_priority || state.active_priority->vehicle != vehicle) {
        auto it = std::find_if(state.queued.begin(), state.queued.end(),
                               [&](const PriorityRequest& q) { return q.vehicle == vehicle; });
        if (it != state.queued.end())
            state.queued.erase(it);
        return state;
    }

    state.active_priority.reset();
    state.remaining_green_s = 0.0;
    if (state.mode == SignalMode::Extended) {
        // Green runs to the later of the nominal end and now.
        state.granted_extension_s = 0.0;
        state.mode = SignalMode::Normal;
    } else if (state.mode == SignalMode::PreemptPending) {
        state.mode = SignalMode::Normal;
        state.truncate_at_s = 0.0;
    }

    if (!state.queued.empty()) {
        PriorityRequest next = state.queued.front();
        state.queued.pop_front();
        state.active_priority = next;
        grant(state, plan, next.t_d_s - (state.clock_s - next.issued_at_s));
    }
    return state;
}

} // namespace amb
