#pragma once

#include "ambdispatch/geo_network.h"

#include <optional>
#include <string>
#include <vector>

namespace amb {

enum class UnitStatus { Free, EnRoute, OnScene, Transporting, AtHospital };
enum class IncidentStatus { Open, Assigned, Served };

const char* to_string(UnitStatus status);
const char* to_string(IncidentStatus status);

struct Ambulance {
    std::string id;
    UnitStatus status = UnitStatus::Free;
    std::string node; // where the unit is parked while Free
    double speed_mps = 0.0; // cruise speed
};

struct Incident {
    std::string id;
    std::string location; // node id
    double created_at_s = 0.0;
    IncidentStatus status = IncidentStatus::Open;
};

struct Hospital {
    std::string id;
    std::string location; // node id
};

struct Assignment {
    std::string incident;
    std::string ambulance;
    Route route_to_scene;
    std::string hospital;
    Route route_to_hospital;
    double decided_at_s = 0.0;
    bool manual_override = false;
    std::string recommended; // unit the engine would have chosen
};

/// Predicted time for one Free unit; `route` is empty when the scene is unreachable.
struct UnitEstimate {
    std::string ambulance;
    std::optional<Route> route;
};

/// Shortest-path estimate from every Free unit to the incident, in fleet order.
std::vector<UnitEstimate> estimate_units(const Incident& incident, const std::vector<Ambulance>& fleet,
                                         const RoadNetwork& net);

struct UnitChoice {
    std::string ambulance;
    Route route;
};

/// Nearest Free unit by predicted travel time; ties go to the smaller id.
UnitChoice select_ambulance(const Incident& incident, const std::vector<Ambulance>& fleet, const RoadNetwork& net);

struct HospitalChoice {
    std::string hospital;
    Route route;
};

HospitalChoice select_hospital(const std::string& scene, const std::vector<Hospital>& hospitals,
                               const RoadNetwork& net);

/// Builds the dispatch record. With `override_unit` the named unit is used
/// (it must be Free and able to reach the scene); the engine's own choice is
/// still stored in `recommended`.
Assignment plan_assignment(const Incident& incident, const std::vector<Ambulance>& fleet,
                           const std::vector<Hospital>& hospitals, const RoadNetwork& net, double now_s,
                           const std::optional<std::string>& override_unit = std::nullopt);

enum class LifecycleEvent { Dispatched, ArrivedAtScene, DepartedScene, ArrivedAtHospital, ReturnedFree };

const char* to_string(LifecycleEvent event);

struct LifecycleState {
    UnitStatus unit = UnitStatus::Free;
    IncidentStatus incident = IncidentStatus::Open;

    bool operator==(const LifecycleState&) const = default;
};

/// Free -> EnRoute -> OnScene -> Transporting -> AtHospital -> Free. Throws
/// IllegalTransition for any other step.
LifecycleState advance(LifecycleState current, LifecycleEvent event);

} // namespace amb
