#pragma once

#include "ambdispatch/dispatch_core.h"
#include "ambdispatch/geo_network.h"
#include "ambdispatch/scenario.h"
#include "ambdispatch/signal_priority.h"

#include <json.hpp>

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace amb {

enum class EventKind { Detection, PhaseChange, Dispatch, StopLineCross, SceneArrival, HospitalArrival, IncidentCreated };

const char* to_string(EventKind kind);

struct SimEvent {
    std::uint64_t seq = 0;
    double t_s = 0.0;
    EventKind kind = EventKind::Dispatch;
    nlohmann::json payload;
};

nlohmann::json event_to_json(const SimEvent& event);
/// One compact JSON document per line.
std::string event_to_line(const SimEvent& event);

struct VehicleKinematics {
    Route route;
    double route_offset_m = 0.0;
    double speed_mps = 0.0;
    bool stopped = false;
};

/// Constant-speed time to cover `distance_m`. Throws ZeroSpeed for a stopped vehicle.
double predict_t_d(const VehicleKinematics& v, double distance_m);

/// Deterministic fixed-step world. All mutation happens through step() and the
/// dispatcher commands; each call appends to the event log.
class Simulation {
public:
    explicit Simulation(Scenario scenario);

    const Scenario& scenario() const { return scenario_; }
    const SimConfig& config() const { return scenario_.config; }
    double time() const { return now_; }
    std::uint64_t steps() const { return steps_; }

    /// Advances one dt and returns the events it produced.
    std::vector<SimEvent> step();

    /// No scripted incidents left, nothing open, every unit Free.
    bool quiescent() const;
    /// duration_s reached, or (when duration_s is 0) quiescent or past max_time_s.
    bool finished() const;

    const std::vector<SimEvent>& events() const { return log_; }

    /// Creates an incident at the current time and returns its id.
    std::string inject_incident(const std::string& node, std::optional<std::string> id = std::nullopt);
    /// Assigns `ambulance` to `incident`, replacing the engine's choice. The
    /// incident must be Open, or Assigned to a unit that is still EnRoute.
    /// Throws IllegalTransition (with the reason) when rejected.
    void dispatch_override(const std::string& incident, const std::string& ambulance);

    nlohmann::json snapshot() const;
    nlohmann::json metrics() const;

private:
    struct ControllerRuntime {
        PhasePlan plan;
        ControllerState state;
        std::vector<std::pair<std::string, Signal>> display;
        int detections = 0;
        int extensions = 0;
        int preemptions = 0;
    };

    enum class Leg { ToScene, ToHospital };

    struct UnitRuntime {
        Ambulance unit;
        std::optional<VehicleKinematics> kin;
        Leg leg = Leg::ToScene;
        std::size_t edge_pos = 0;  // index into kin->route.edges
        double edge_offset_m = 0.0;
        std::vector<bool> detected;
        double wait_s = 0.0; // stopped time at the current stop line
        std::optional<std::string> incident;
        double depart_at_s = 0.0;
        double delay_s = 0.0;
        int stops = 0;
        std::map<std::string, double> delay_by_controller;
    };

    struct IncidentRuntime {
        Incident incident;
        std::optional<Assignment> assignment;
        std::optional<double> dispatched_at_s;
        std::optional<double> scene_arrival_s;
        std::optional<double> hospital_arrival_s;
    };

    void emit(double t, EventKind kind, nlohmann::json payload);
    void create_incident(const std::string& id, const std::string& node, double created_at);
    void dispatch_open_incidents();
    void start_assignment(IncidentRuntime& inc, Assignment assignment);
    void start_leg(UnitRuntime& u, Leg leg, Route route);
    void advance_unit(UnitRuntime& u, double t_end);
    bool move_unit(UnitRuntime& u, double& now, double t_end);
    void detect(UnitRuntime& u, const Edge& edge, double distance_m, double now);
    void release_priority(const UnitRuntime& u);
    void on_arrival(UnitRuntime& u, double now);
    double edge_speed(const UnitRuntime& u, const Edge& edge) const;
    ControllerRuntime& controller(const std::string& id);
    UnitRuntime& unit(const std::string& id);
    IncidentRuntime* find_incident(const std::string& id);
    std::optional<bool> recognized(const std::string& unit);

    Scenario scenario_;
    double now_ = 0.0;
    std::uint64_t steps_ = 0;
    std::uint64_t next_seq_ = 1;
    std::size_t next_scripted_ = 0;
    std::uint64_t injected_ = 0;
    std::vector<ControllerRuntime> controllers_;
    std::vector<UnitRuntime> units_;
    std::vector<IncidentRuntime> incidents_;
    std::vector<SimEvent> log_;
    std::vector<SimEvent> pending_; // current step, before ordering
    std::map<std::string, std::optional<bool>> recognition_cache_;
};

struct RunResult {
    nlohmann::json report;
    std::vector<SimEvent> events;
};

/// Runs the scenario headless with `config` (overriding the scenario's own config).
RunResult run(const Scenario& scenario, const SimConfig& config);
RunResult run(const Scenario& scenario);

} // namespace amb
