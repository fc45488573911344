#include "ambdispatch/sim_engine.h"

#include "ambdispatch/error.h"

#include <algorithm>
#include <cmath>

namespace amb {

using nlohmann::json;

namespace {

constexpr double kEps = 1e-9;

} // namespace

const char* to_string(EventKind kind)
{
    switch (kind) {
    case EventKind::Detection: return "Detection";
    case EventKind::PhaseChange: return "PhaseChange";
    case EventKind::Dispatch: return "Dispatch";
    case EventKind::StopLineCross: return "StopLineCross";
    case EventKind::SceneArrival: return "SceneArrival";
    case EventKind::HospitalArrival: return "HospitalArrival";
    case EventKind::IncidentCreated: return "IncidentCreated";
    }
    return "?";
}

json event_to_json(const SimEvent& event)
{
    return {{"seq", event.seq}, {"t_s", event.t_s}, {"kind", to_string(event.kind)}, {"payload", event.payload}};
}

std::string event_to_line(const SimEvent& event) { return event_to_json(event).dump(); }

double predict_t_d(const VehicleKinematics& v, double distance_m)
{
    if (!(v.speed_mps > 0.0) || v.stopped)
        throw Error(ErrorCode::ZeroSpeed, "cannot predict arrival for a stopped vehicle");
    return distance_m / v.speed_mps;
}

Simulation::Simulation(Scenario scenario) : scenario_(std::move(scenario))
{
    scenario_.config.validate();
    for (const ControllerSpec& spec : scenario_.controllers) {
        spec.plan.validate();
        ControllerRuntime c{spec.plan, initial_state(spec.plan, spec.initial_phase, spec.initial_elapsed_s), {}};
        c.display = signals(c.state, c.plan);
        controllers_.push_back(std::move(c));
    }
    std::sort(controllers_.begin(), controllers_.end(),
              [](const ControllerRuntime& a, const ControllerRuntime& b) {
                  return a.plan.controller_id < b.plan.controller_id;
              });
    for (const Ambulance& a : scenario_.fleet) {
        if (!scenario_.network.find_node(a.node))
            throw Error(ErrorCode::ScenarioInvalid, "unit '" + a.id + "' parked at unknown node");
        if (!(a.speed_mps > 0.0))
            throw Error(ErrorCode::ScenarioInvalid, "unit '" + a.id + "' needs speed_mps > 0");
        UnitRuntime u;
        u.unit = a;
        u.unit.status = UnitStatus::Free;
        units_.push_back(std::move(u));
    }
    std::sort(units_.begin(), units_.end(),
              [](const UnitRuntime& a, const UnitRuntime& b) { return a.unit.id < b.unit.id; });
    for (const Edge& e : scenario_.network.edges()) {
        if (!e.stop_line)
            continue;
        ControllerRuntime& c = controller(e.stop_line->controller);
        if (!c.plan.phase_of(e.stop_line->approach))
            throw Error(ErrorCode::ScenarioInvalid, "edge '" + e.id + "' feeds an unknown approach");
    }
}

Simulation::ControllerRuntime& Simulation::controller(const std::string& id)
{
    for (ControllerRuntime& c : controllers_) {
        if (c.plan.controller_id == id)
            return c;
    }
    throw Error(ErrorCode::ScenarioInvalid, "unknown controller '" + id + "'");
}

Simulation::UnitRuntime& Simulation::unit(const std::string& id)
{
    for (UnitRuntime& u : units_) {
        if (u.unit.id == id)
            return u;
    }
    throw Error(ErrorCode::IllegalTransition, "unknown unit '" + id + "'");
}

Simulation::IncidentRuntime* Simulation::find_incident(const std::string& id)
{
    for (IncidentRuntime& inc : incidents_) {
        if (inc.incident.id == id)
            return &inc;
    }
    return nullptr;
}

void Simulation::emit(double t, EventKind kind, json payload)
{
    pending_.push_back({0, t, kind, std::move(payload)});
}

namespace {

std::vector<SimEvent> order_and_number(std::vector<SimEvent>& pending, std::uint64_t& next_seq)
{
    std::stable_sort(pending.begin(), pending.end(),
                     [](const SimEvent& a, const SimEvent& b) { return a.t_s < b.t_s; });
    for (SimEvent& e : pending)
        e.seq = next_seq++;
    std::vector<SimEvent> out;
    out.swap(pending);
    return out;
}

} // namespace

std::vector<SimEvent> Simulation::step()
{
    const SimConfig& cfg = scenario_.config;
    const double t_end = static_cast<double>(steps_ + 1) * cfg.dt_s;

    while (next_scripted_ < scenario_.incidents.size() &&
           scenario_.incidents[next_scripted_].t_s <= now_ + kEps) {
        const ScriptedIncident& s = scenario_.incidents[next_scripted_++];
        create_incident(s.id, s.node, s.t_s);
    }

    dispatch_open_incidents();

    for (UnitRuntime& u : units_)
        advance_unit(u, t_end);

    for (ControllerRuntime& c : controllers_) {
        TickResult r = tick(std::move(c.state), c.plan, cfg.dt_s);
        c.state = std::move(r.state);
        c.display = std::move(r.signals);
        for (const PhaseTransition& tr : r.transitions) {
            bool ended = tr.kind == PhaseTransition::Kind::GreenEnded;
            json payload = {{"controller", c.plan.controller_id},
                            {"phase", c.plan.phases[tr.phase].id},
                            {"change", ended ? "GreenEnded" : "GreenStarted"},
                            {"cause", tr.cause},
                            {"mode", to_string(c.state.mode)}};
            if (ended)
                payload["green_s"] = tr.green_s;
            emit(t_end, EventKind::PhaseChange, std::move(payload));
        }
    }

    now_ = t_end;
    ++steps_;
    std::vector<SimEvent> out = order_and_number(pending_, next_seq_);
    log_.insert(log_.end(), out.begin(), out.end());
    return out;
}

bool Simulation::quiescent() const
{
    if (next_scripted_ < scenario_.incidents.size())
        return false;
    for (const IncidentRuntime& inc : incidents_) {
        if (inc.incident.status != IncidentStatus::Served)
            return false;
    }
    return std::all_of(units_.begin(), units_.end(),
                       [](const UnitRuntime& u) { return u.unit.status == UnitStatus::Free; });
}

bool Simulation::finished() const
{
    const SimConfig& cfg = scenario_.config;
    if (cfg.duration_s > 0.0)
        return now_ + kEps >= cfg.duration_s;
    return quiescent() || now_ + kEps >= cfg.max_time_s;
}

void Simulation::create_incident(const std::string& id, const std::string& node, double created_at)
{
    IncidentRuntime inc;
    inc.incident = Incident{id, node, created_at, IncidentStatus::Open};
    incidents_.push_back(std::move(inc));
    emit(now_, EventKind::IncidentCreated, {{"incident", id}, {"node", node}, {"created_at_s", created_at}});
}

std::string Simulation::inject_incident(const std::string& node, std::optional<std::string> id)
{
    if (!scenario_.network.find_node(node))
        throw Error(ErrorCode::UnknownNode, "no node '" + node + "'");
    if (scenario_.hospitals.empty())
        throw Error(ErrorCode::NoRoute, "scenario has no hospitals");
    std::string name = id.value_or("");
    while (name.empty() || find_incident(name)) {
        if (id && find_incident(*id))
            throw Error(ErrorCode::IllegalTransition, "incident '" + *id + "' already exists");
        name = "INJ-" + std::to_string(++injected_);
    }
    for (const ScriptedIncident& s : scenario_.incidents) {
        if (s.id == name)
            throw Error(ErrorCode::IllegalTransition, "incident '" + name + "' is scripted later");
    }
    create_incident(name, node, now_);
    auto out = order_and_number(pending_, next_seq_);
    log_.insert(log_.end(), out.begin(), out.end());
    return name;
}

void Simulation::dispatch_open_incidents()
{
    std::vector<Ambulance> fleet;
    for (IncidentRuntime& inc : incidents_) {
        if (inc.incident.status != IncidentStatus::Open)
            continue;
        fleet.clear();
        for (const UnitRuntime& u : units_)
            fleet.push_back(u.unit);
        try {
            Assignment a = plan_assignment(inc.incident, fleet, scenario_.hospitals, scenario_.network, now_);
            start_assignment(inc, std::move(a));
        } catch (const Error& e) {
            // Stays Open and is retried next step.
            if (e.code() != ErrorCode::NoFreeAmbulance && e.code() != ErrorCode::NoRoute)
                throw;
        }
    }
}

void Simulation::start_assignment(IncidentRuntime& inc, Assignment a)
{
    UnitRuntime& u = unit(a.ambulance);
    LifecycleState next = advance({u.unit.status, inc.incident.status}, LifecycleEvent::Dispatched);
    u.unit.status = next.unit;
    inc.incident.status = next.incident;
    u.incident = inc.incident.id;
    inc.dispatched_at_s = now_;

    std::vector<Ambulance> fleet;
    for (const UnitRuntime& other : units_) {
        if (other.unit.id != u.unit.id)
            fleet.push_back(other.unit);
    }
    Ambulance self = u.unit;
    self.status = UnitStatus::Free;
    fleet.push_back(self);
    json candidates = json::array();
    for (const UnitEstimate& est : estimate_units(inc.incident, fleet, scenario_.network)) {
        candidates.push_back({{"ambulance", est.ambulance},
                              {"predicted_s", est.route ? json(est.route->total_time_s) : json(nullptr)}});
    }
    std::sort(candidates.begin(), candidates.end(),
              [](const json& x, const json& y) { return x["ambulance"] < y["ambulance"]; });

    emit(now_, EventKind::Dispatch,
         {{"incident", a.incident},
          {"ambulance", a.ambulance},
          {"recommended", a.recommended},
          {"manual_override", a.manual_override},
          {"hospital", a.hospital},
          {"predicted_scene_s", a.route_to_scene.total_time_s},
          {"predicted_hospital_s", a.route_to_hospital.total_time_s},
          {"route_to_scene", edge_ids(scenario_.network, a.route_to_scene)},
          {"route_to_hospital", edge_ids(scenario_.network, a.route_to_hospital)},
          {"candidates", std::move(candidates)}});

    Route to_scene = a.route_to_scene;
    inc.assignment = std::move(a);
    start_leg(u, Leg::ToScene, std::move(to_scene));
}

void Simulation::start_leg(UnitRuntime& u, Leg leg, Route route)
{
    u.leg = leg;
    u.edge_pos = 0;
    u.edge_offset_m = 0.0;
    u.wait_s = 0.0;
    u.detected.assign(route.edges.size(), false);
    u.kin = VehicleKinematics{std::move(route), 0.0, u.unit.speed_mps, false};
}

double Simulation::edge_speed(const UnitRuntime& u, const Edge& edge) const
{
    return std::min(u.unit.speed_mps, edge.length_m / edge_travel_time(edge));
}

void Simulation::advance_unit(UnitRuntime& u, double t_end)
{
    double now = now_;
    while (now < t_end - kEps) {
        switch (u.unit.status) {
        case UnitStatus::EnRoute:
        case UnitStatus::Transporting:
            if (!move_unit(u, now, t_end))
                return;
            break;
        case UnitStatus::OnScene: {
            if (u.depart_at_s >= t_end - kEps)
                return;
            now = std::max(now, u.depart_at_s);
            IncidentRuntime* inc = find_incident(*u.incident);
            LifecycleState next = advance({u.unit.status, inc->incident.status}, LifecycleEvent::DepartedScene);
            u.unit.status = next.unit;
            start_leg(u, Leg::ToHospital, inc->assignment->route_to_hospital);
            break;
        }
        default:
            return;
        }
    }
}

bool Simulation::move_unit(UnitRuntime& u, double& now, double t_end)
{
    const RoadNetwork& net = scenario_.network;
    VehicleKinematics& kin = *u.kin;
    const Route& route = kin.route;
    auto sync = [&]() {
        double before = 0.0;
        for (std::size_t i = 0; i < u.edge_pos && i < route.edges.size(); ++i)
            before += net.edge(route.edges[i]).length_m;
        kin.route_offset_m = std::min(route.total_length_m, before + u.edge_offset_m);
    };

    if (route.edges.empty()) {
        on_arrival(u, now);
        return true;
    }

    for (;;) {
        const Edge& e = net.edge(route.edges[u.edge_pos]);
        bool last = u.edge_pos + 1 == route.edges.size();
        bool controlled = e.stop_line.has_value() && !last;
        double speed = edge_speed(u, e);

        auto wait_until_step_end = [&]() {
            double wait = t_end - now;
            u.wait_s += wait;
            u.delay_s += wait;
            u.delay_by_controller[e.stop_line->controller] += wait;
            now = t_end;
            sync();
        };
        auto cross = [&]() {
            ControllerRuntime& c = controller(e.stop_line->controller);
            emit(now, EventKind::StopLineCross,
                 {{"ambulance", u.unit.id},
                  {"controller", e.stop_line->controller},
                  {"approach", e.stop_line->approach},
                  {"edge", e.id},
                  {"waited_s", u.wait_s}});
            c.state = on_stop_line_crossed(std::move(c.state), c.plan, u.unit.id);
            u.wait_s = 0.0;
            kin.stopped = false;
            kin.speed_mps = speed;
            ++u.edge_pos;
            u.edge_offset_m = 0.0;
        };
        auto showing_red = [&]() {
            ControllerRuntime& c = controller(e.stop_line->controller);
            for (const auto& [approach, signal] : c.display) {
                if (approach == e.stop_line->approach)
                    return signal == Signal::Red;
            }
            return true;
        };

        if (kin.stopped) {
            if (showing_red()) {
                wait_until_step_end();
                return false;
            }
            cross();
            continue;
        }
        kin.speed_mps = speed;

        if (controlled && !u.detected[u.edge_pos]) {
            double dist = e.length_m - u.edge_offset_m;
            double zone = scenario_.config.detection_distance_m;
            if (dist <= zone + kEps) {
                detect(u, e, dist, now);
            } else {
                double t_hit = (dist - zone) / speed;
                if (now + t_hit > t_end + kEps) {
                    u.edge_offset_m += speed * (t_end - now);
                    now = t_end;
                    sync();
                    return false;
                }
                now += t_hit;
                u.edge_offset_m = e.length_m - zone;
                sync();
                detect(u, e, zone, now);
                continue;
            }
        }

        double dist = e.length_m - u.edge_offset_m;
        double t_stop_line = dist / speed;
        if (now + t_stop_line > t_end + kEps) {
            u.edge_offset_m += speed * (t_end - now);
            now = t_end;
            sync();
            return false;
        }
        now = std::min(now + t_stop_line, std::max(now, t_end));
        u.edge_offset_m = e.length_m;
        sync();
        if (last) {
            on_arrival(u, now);
            return true;
        }
        if (controlled) {
            if (showing_red()) {
                kin.stopped = true;
                ++u.stops;
                u.wait_s = 0.0;
                wait_until_step_end();
                return false;
            }
            cross();
            continue;
        }
        ++u.edge_pos;
        u.edge_offset_m = 0.0;
    }
}

std::optional<bool> Simulation::recognized(const std::string& unit_id)
{
    if (!scenario_.recognition)
        return std::nullopt;
    auto cached = recognition_cache_.find(unit_id);
    if (cached != recognition_cache_.end())
        return cached->second;
    const RecognitionFixture& fx = *scenario_.recognition;
    bool ok = false;
    auto frame = fx.frames.find(unit_id);
    if (frame != fx.frames.end()) {
        try {
            ok = recognize(frame->second, Pattern(fx.pattern), fx.params).is_ambulance;
        } catch (const Error&) {
            ok = false;
        }
    }
    recognition_cache_[unit_id] = ok;
    return ok;
}

void Simulation::detect(UnitRuntime& u, const Edge& edge, double distance_m, double now)
{
    u.detected[u.edge_pos] = true;
    ControllerRuntime& c = controller(edge.stop_line->controller);
    ++c.detections;

    double t_d = predict_t_d(*u.kin, distance_m);
    std::optional<bool> seen = recognized(u.unit.id);
    bool request = scenario_.config.priority_enabled && seen.value_or(true);
    json payload = {{"ambulance", u.unit.id},
                    {"controller", c.plan.controller_id},
                    {"approach", edge.stop_line->approach},
                    {"edge", edge.id},
                    {"distance_m", distance_m},
                    {"t_d_s", t_d},
                    {"priority_requested", request}};
    if (seen)
        payload["recognized"] = *seen;
    if (request) {
        PriorityRequest req{u.unit.id, edge.stop_line->approach, t_d, now};
        DetectionResult r = on_detection(std::move(c.state), c.plan, req);
        c.state = std::move(r.state);
        if (r.outcome == DetectionOutcome::Extended)
            ++c.extensions;
        if (r.outcome == DetectionOutcome::Preempting)
            ++c.preemptions;
        payload["outcome"] = to_string(r.outcome);
        payload["remaining_green_s"] = r.remaining_green_s;
        payload["extension_s"] = r.extension_s;
        payload["mode"] = to_string(c.state.mode);
    }
    emit(now, EventKind::Detection, std::move(payload));
}

void Simulation::on_arrival(UnitRuntime& u, double now)
{
    IncidentRuntime* inc = find_incident(*u.incident);
    u.kin.reset();
    if (u.leg == Leg::ToScene) {
        LifecycleState next = advance({u.unit.status, inc->incident.status}, LifecycleEvent::ArrivedAtScene);
        u.unit.status = next.unit;
        u.unit.node = inc->incident.location;
        inc->scene_arrival_s = now;
        u.depart_at_s = now + scenario_.config.service_time_s;
        emit(now, EventKind::SceneArrival,
             {{"ambulance", u.unit.id},
              {"incident", inc->incident.id},
              {"response_time_s", now - inc->incident.created_at_s},
              {"departs_at_s", u.depart_at_s}});
        return;
    }

    LifecycleState state{u.unit.status, inc->incident.status};
    state = advance(state, LifecycleEvent::ArrivedAtHospital);
    state = advance(state, LifecycleEvent::ReturnedFree);
    u.unit.status = state.unit;
    inc->incident.status = state.incident;
    for (const Hospital& h : scenario_.hospitals) {
        if (h.id == inc->assignment->hospital)
            u.unit.node = h.location;
    }
    inc->hospital_arrival_s = now;
    emit(now, EventKind::HospitalArrival,
         {{"ambulance", u.unit.id},
          {"incident", inc->incident.id},
          {"hospital", inc->assignment->hospital},
          {"returned_free", true}});
    u.incident.reset();
}

void Simulation::release_priority(const UnitRuntime& u)
{
    for (ControllerRuntime& c : controllers_)
        c.state = on_stop_line_crossed(std::move(c.state), c.plan, u.unit.id);
}

void Simulation::dispatch_override(const std::string& incident_id, const std::string& ambulance_id)
{
    IncidentRuntime* inc = find_incident(incident_id);
    if (!inc)
        throw Error(ErrorCode::IllegalTransition, "unknown incident '" + incident_id + "'");
    UnitRuntime& target = unit(ambulance_id);
    if (target.unit.status != UnitStatus::Free)
        throw Error(ErrorCode::IllegalTransition,
                    "unit '" + ambulance_id + "' is " + to_string(target.unit.status) + ", not Free");
    if (inc->incident.status == IncidentStatus::Served)
        throw Error(ErrorCode::IllegalTransition, "incident '" + incident_id + "' is already served");

    std::vector<Ambulance> fleet;
    std::optional<std::string> released;
    if (inc->incident.status == IncidentStatus::Assigned) {
        UnitRuntime& old = unit(inc->assignment->ambulance);
        if (old.unit.status != UnitStatus::EnRoute)
            throw Error(ErrorCode::IllegalTransition, "unit '" + old.unit.id + "' already reached the scene");
        released = old.unit.id;
    }

    for (const UnitRuntime& u : units_) {
        Ambulance a = u.unit;
        if (released && a.id == *released)
            a.status = UnitStatus::Free; // counted as free for the recommendation
        fleet.push_back(a);
    }
    Incident probe = inc->incident;
    probe.status = IncidentStatus::Open;
    Assignment a = plan_assignment(probe, fleet, scenario_.hospitals, scenario_.network, now_, ambulance_id);

    if (released) {
        UnitRuntime& old = unit(*released);
        release_priority(old);
        if (old.kin && !old.kin->route.edges.empty()) {
            std::size_t pos = std::min(old.edge_pos, old.kin->route.edges.size() - 1);
            const Edge& e = scenario_.network.edge(old.kin->route.edges[pos]);
            old.unit.node = old.edge_offset_m * 2.0 < e.length_m ? e.from : e.to;
        }
        old.unit.status = UnitStatus::Free;
        old.kin.reset();
        old.incident.reset();
        inc->incident.status = IncidentStatus::Open;
    }
    start_assignment(*inc, std::move(a));
    auto out = order_and_number(pending_, next_seq_);
    log_.insert(log_.end(), out.begin(), out.end());
}

json Simulation::snapshot() const
{
    const RoadNetwork& net = scenario_.network;
    json units = json::array();
    for (const UnitRuntime& u : units_) {
        json j = {{"id", u.unit.id},
                  {"status", to_string(u.unit.status)},
                  {"node", u.unit.node},
                  {"speed_mps", u.unit.speed_mps},
                  {"incident", u.incident ? json(*u.incident) : json(nullptr)},
                  {"intersection_delay_s", u.delay_s}};
        if (u.kin && !u.kin->route.edges.empty()) {
            std::size_t pos = std::min(u.edge_pos, u.kin->route.edges.size() - 1);
            EdgeIndex ei = u.kin->route.edges[pos];
            const Edge& e = net.edge(ei);
            double frac = std::clamp(u.edge_offset_m / e.length_m, 0.0, 1.0);
            const Node& a = net.node(net.from_index(ei));
            const Node& b = net.node(net.to_index(ei));
            j["position"] = {{"edge", e.id},
                             {"offset_m", u.edge_offset_m},
                             {"x", a.x + frac * (b.x - a.x)},
                             {"y", a.y + frac * (b.y - a.y)}};
            j["stopped"] = u.kin->stopped;
            j["route"] = edge_ids(net, u.kin->route);
            j["route_offset_m"] = u.kin->route_offset_m;
        } else {
            const Node& n = net.node(net.node_index(u.unit.node));
            j["position"] = {{"node", n.id}, {"x", n.x}, {"y", n.y}};
            j["stopped"] = false;
        }
        units.push_back(std::move(j));
    }

    json controllers = json::array();
    for (const ControllerRuntime& c : controllers_) {
        json sig = json::object();
        for (const auto& [approach, s] : c.display)
            sig[approach] = to_string(s);
        json queued = json::array();
        for (const PriorityRequest& q : c.state.queued)
            queued.push_back(q.vehicle);
        json active = nullptr;
        if (c.state.active_priority) {
            const PriorityRequest& p = *c.state.active_priority;
            active = {{"vehicle", p.vehicle}, {"approach", p.approach}, {"t_d_s", p.t_d_s},
                      {"issued_at_s", p.issued_at_s}};
        }
        controllers.push_back({{"id", c.plan.controller_id},
                               {"phase", c.plan.phases[c.state.current_phase].id},
                               {"mode", to_string(c.state.mode)},
                               {"phase_elapsed_s", c.state.phase_elapsed_s},
                               {"granted_extension_s", c.state.granted_extension_s},
                               {"signals", std::move(sig)},
                               {"active_priority", std::move(active)},
                               {"queued", std::move(queued)}});
    }

    json incidents = json::array();
    for (const IncidentRuntime& inc : incidents_) {
        json j = {{"id", inc.incident.id},
                  {"node", inc.incident.location},
                  {"created_at_s", inc.incident.created_at_s},
                  {"status", to_string(inc.incident.status)}};
        if (inc.assignment) {
            j["ambulance"] = inc.assignment->ambulance;
            j["recommended"] = inc.assignment->recommended;
            j["hospital"] = inc.assignment->hospital;
            j["manual_override"] = inc.assignment->manual_override;
        }
        incidents.push_back(std::move(j));
    }

    json nodes = json::array();
    for (const Node& n : net.nodes())
        nodes.push_back({{"id", n.id}, {"x", n.x}, {"y", n.y}});
    json edges = json::array();
    for (const Edge& e : net.edges()) {
        json j = {{"id", e.id}, {"from", e.from}, {"to", e.to}, {"length_m", e.length_m}};
        if (e.stop_line) {
            j["controller"] = e.stop_line->controller;
            j["approach"] = e.stop_line->approach;
        }
        edges.push_back(std::move(j));
    }

    return {{"t_s", now_},
            {"step", steps_},
            {"last_seq", log_.empty() ? 0 : log_.back().seq},
            {"priority_enabled", scenario_.config.priority_enabled},
            {"network", {{"nodes", std::move(nodes)}, {"edges", std::move(edges)}}},
            {"units", std::move(units)},
            {"controllers", std::move(controllers)},
            {"incidents", std::move(incidents)}};
}

json Simulation::metrics() const
{
    json incidents = json::array();
    double response_sum = 0.0;
    int responded = 0;
    for (const IncidentRuntime& inc : incidents_) {
        json j = {{"id", inc.incident.id},
                  {"node", inc.incident.location},
                  {"created_at_s", inc.incident.created_at_s},
                  {"status", to_string(inc.incident.status)}};
        if (inc.assignment) {
            j["ambulance"] = inc.assignment->ambulance;
            j["recommended"] = inc.assignment->recommended;
            j["manual_override"] = inc.assignment->manual_override;
            j["hospital"] = inc.assignment->hospital;
            j["predicted_scene_s"] = inc.assignment->route_to_scene.total_time_s;
        }
        if (inc.dispatched_at_s)
            j["dispatched_at_s"] = *inc.dispatched_at_s;
        if (inc.scene_arrival_s) {
            double rt = *inc.scene_arrival_s - inc.incident.created_at_s;
            j["scene_arrival_s"] = *inc.scene_arrival_s;
            j["response_time_s"] = rt;
            response_sum += rt;
            ++responded;
        }
        if (inc.hospital_arrival_s)
            j["hospital_arrival_s"] = *inc.hospital_arrival_s;
        incidents.push_back(std::move(j));
    }

    json ambulances = json::array();
    double delay_total = 0.0;
    for (const UnitRuntime& u : units_) {
        json by_ctrl = json::object();
        for (const auto& [cid, d] : u.delay_by_controller)
            by_ctrl[cid] = d;
        ambulances.push_back({{"id", u.unit.id},
                              {"intersection_delay_s", u.delay_s},
                              {"stops", u.stops},
                              {"delay_by_controller", std::move(by_ctrl)}});
        delay_total += u.delay_s;
    }

    json controllers = json::array();
    int extensions = 0;
    int preemptions = 0;
    int detections = 0;
    for (const ControllerRuntime& c : controllers_) {
        controllers.push_back({{"id", c.plan.controller_id},
                               {"detections", c.detections},
                               {"extensions", c.extensions},
                               {"preemptions", c.preemptions}});
        extensions += c.extensions;
        preemptions += c.preemptions;
        detections += c.detections;
    }

    return {{"priority_enabled", scenario_.config.priority_enabled},
            {"end_time_s", now_},
            {"steps", steps_},
            {"incidents", std::move(incidents)},
            {"ambulances", std::move(ambulances)},
            {"controllers", std::move(controllers)},
            {"totals",
             {{"detections", detections},
              {"extensions", extensions},
              {"preemptions", preemptions},
              {"intersection_delay_s", delay_total},
              {"responded", responded},
              {"mean_response_time_s", responded ? json(response_sum / responded) : json(nullptr)}}}};
}

RunResult run(const Scenario& scenario, const SimConfig& config)
{
    Scenario sc = scenario;
    sc.config = config;
    Simulation sim(std::move(sc));
    while (!sim.finished())
        sim.step();
    return {sim.metrics(), sim.events()};
}

RunResult run(const Scenario& scenario) { return run(scenario, scenario.config); }

} // namespace amb
