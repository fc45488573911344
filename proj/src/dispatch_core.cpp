#include "ambdispatch/dispatch_core.h"

#include "ambdispatch/error.h"

#include <algorithm>

namespace amb {

const char* to_string(UnitStatus status)
{
    switch (status) {
    case UnitStatus::Free: return "Free";
    case UnitStatus::EnRoute: return "EnRoute";
    case UnitStatus::OnScene: return "OnScene";
    case UnitStatus::Transporting: return "Transporting";
    case UnitStatus::AtHospital: return "AtHospital";
    }
    return "?";
}

const char* to_string(IncidentStatus status)
{
    switch (status) {
    case IncidentStatus::Open: return "Open";
    case IncidentStatus::Assigned: return "Assigned";
    case IncidentStatus::Served: return "Served";
    }
    return "?";
}

const char* to_string(LifecycleEvent event)
{
    switch (event) {
    case LifecycleEvent::Dispatched: return "Dispatched";
    case LifecycleEvent::ArrivedAtScene: return "ArrivedAtScene";
    case LifecycleEvent::DepartedScene: return "DepartedScene";
    case LifecycleEvent::ArrivedAtHospital: return "ArrivedAtHospital";
    case LifecycleEvent::ReturnedFree: return "ReturnedFree";
    }
    return "?";
}

std::vector<UnitEstimate> estimate_units(const Incident& incident, const std::vector<Ambulance>& fleet,
                                         const RoadNetwork& net)
{
    NodeIndex scene = net.node_index(incident.location);
    std::vector<UnitEstimate> out;
    for (const Ambulance& a : fleet) {
        if (a.status != UnitStatus::Free)
            continue;
        UnitEstimate est{a.id, std::nullopt};
        try {
            est.route = shortest_path(net, net.node_index(a.node), scene);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoRoute)
                throw;
        }
        out.push_back(std::move(est));
    }
    return out;
}

UnitChoice select_ambulance(const Incident& incident, const std::vector<Ambulance>& fleet, const RoadNetwork& net)
{
    auto estimates = estimate_units(incident, fleet, net);
    if (estimates.empty())
        throw Error(ErrorCode::NoFreeAmbulance, "no Free unit for incident '" + incident.id + "'");

    const UnitEstimate* best = nullptr;
    for (const UnitEstimate& est : estimates) {
        if (!est.route)
            continue;
        if (!best || est.route->total_time_s < best->route->total_time_s ||
            (est.route->total_time_s == best->route->total_time_s && est.ambulance < best->ambulance))
            best = &est;
    }
    if (!best)
        throw Error(ErrorCode::NoRoute, "no Free unit can reach '" + incident.location + "'");
    return {best->ambulance, *best->route};
}

HospitalChoice select_hospital(const std::string& scene, const std::vector<Hospital>& hospitals,
                               const RoadNetwork& net)
{
    NodeIndex from = net.node_index(scene);
    std::optional<HospitalChoice> best;
    for (const Hospital& h : hospitals) {
        Route r;
        try {
            r = shortest_path(net, from, net.node_index(h.location));
        } catch (const Error& e) {
            if (e.code() != ErrorCode::NoRoute)
                throw;
            continue;
        }
        if (!best || r.total_time_s < best->route.total_time_s ||
            (r.total_time_s == best->route.total_time_s && h.id < best->hospital))
            best = HospitalChoice{h.id, std::move(r)};
    }
    if (!best)
        throw Error(ErrorCode::NoRoute, "no hospital reachable from '" + scene + "'");
    return *best;
}

Assignment plan_assignment(const Incident& incident, const std::vector<Ambulance>& fleet,
                           const std::vector<Hospital>& hospitals, const RoadNetwork& net, double now_s,
                           const std::optional<std::string>& override_unit)
{
    Assignment a;
    a.incident = incident.id;
    a.decided_at_s = now_s;

    UnitChoice recommended = select_ambulance(incident, fleet, net);
    a.recommended = recommended.ambulance;
    if (override_unit && *override_unit != recommended.ambulance) {
        auto it = std::find_if(fleet.begin(), fleet.end(),
                               [&](const Ambulance& u) { return u.id == *override_unit; });
        if (it == fleet.end())
            throw Error(ErrorCode::IllegalTransition, "unknown unit '" + *override_unit + "'");
        if (it->status != UnitStatus::Free)
            throw Error(ErrorCode::IllegalTransition,
                        "unit '" + it->id + "' is " + to_string(it->status) + ", not Free");
        a.ambulance = it->id;
        a.route_to_scene = shortest_path(net, it->node, incident.location);
        a.manual_override = true;
    } else {
        a.ambulance = recommended.ambulance;
        a.route_to_scene = std::move(recommended.route);
    }

    HospitalChoice h = select_hospital(incident.location, hospitals, net);
    a.hospital = h.hospital;
    a.route_to_hospital = std::move(h.route);
    return a;
}

LifecycleState advance(LifecycleState current, LifecycleEvent event)
{
    auto illegal = [&]() {
        return Error(ErrorCode::IllegalTransition, std::string(to_string(event)) + " while unit is " +
                                                       to_string(current.unit) + " and incident is " +
                                                       to_string(current.incident));
    };
    switch (event) {
    case LifecycleEvent::Dispatched:
        if (current.unit != UnitStatus::Free || current.incident != IncidentStatus::Open)
            throw illegal();
        return {UnitStatus::EnRoute, IncidentStatus::Assigned};
    case LifecycleEvent::ArrivedAtScene:
        if (current.unit != UnitStatus::EnRoute)
            throw illegal();
        return {UnitStatus::OnScene, current.incident};
    case LifecycleEvent::DepartedScene:
        if (current.unit != UnitStatus::OnScene)
            throw illegal();
        return {UnitStatus::Transporting, current.incident};
    case LifecycleEvent::ArrivedAtHospital:
        if (current.unit != UnitStatus::Transporting)
            throw illegal();
        return {UnitStatus::AtHospital, current.incident};
    case LifecycleEvent::ReturnedFree:
        if (current.unit != UnitStatus::AtHospital)
            throw illegal();
        return {UnitStatus::Free, IncidentStatus::Served};
    }
    throw illegal();
}

} // namespace amb
