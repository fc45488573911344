#include "ambdispatch/scenario.h"

#include "ambdispatch/error.h"

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace amb {

using nlohmann::json;

namespace {

std::string summarize(const std::vector<FieldError>& problems)
{
    std::ostringstream out;
    for (std::size_t i = 0; i < problems.size(); ++i) {
        if (i)
            out << "; ";
        out << problems[i].path << ": " << problems[i].message;
    }
    return out.str();
}

// Collects field problems while walking the document so one pass reports all of them.
class Reader {
public:
    std::vector<FieldError> problems;

    void fail(const std::string& path, const std::string& message) { problems.push_back({path, message}); }

    const json* member(const json& obj, const std::string& path, const char* key, bool required)
    {
        if (!obj.is_object()) {
            fail(path, "expected an object");
            return nullptr;
        }
        auto it = obj.find(key);
        if (it == obj.end()) {
            if (required)
                fail(path + "." + key, "missing");
            return nullptr;
        }
        return &*it;
    }

    std::optional<std::string> string(const json& obj, const std::string& path, const char* key,
                                      bool required = true)
    {
        const json* v = member(obj, path, key, required);
        if (!v)
            return std::nullopt;
        if (!v->is_string()) {
            fail(path + "." + key, "expected a string");
            return std::nullopt;
        }
        return v->get<std::string>();
    }

    std::optional<double> number(const json& obj, const std::string& path, const char* key,
                                 bool required = true)
    {
        const json* v = member(obj, path, key, required);
        if (!v)
            return std::nullopt;
        if (!v->is_number() || !std::isfinite(v->get<double>())) {
            fail(path + "." + key, "expected a finite number");
            return std::nullopt;
        }
        return v->get<double>();
    }

    const json* array(const json& obj, const std::string& path, const char* key, bool required = true)
    {
        const json* v = member(obj, path, key, required);
        if (v && !v->is_array()) {
            fail(path + "." + key, "expected an array");
            return nullptr;
        }
        return v;
    }
};

std::string at(const std::string& path, std::size_t i) { return path + "[" + std::to_string(i) + "]"; }

std::vector<Point> read_points(Reader& r, const json& doc, const std::string& path)
{
    std::vector<Point> pts;
    const json* arr = r.array(doc, path, "points");
    if (!arr)
        return pts;
    for (std::size_t i = 0; i < arr->size(); ++i) {
        const json& p = (*arr)[i];
        if (!p.is_array() || p.size() != 2 || !p[0].is_number_integer() || !p[1].is_number_integer()) {
            r.fail(at(path + ".points", i), "expected [x, y] integers");
            continue;
        }
        pts.push_back({p[0].get<int>(), p[1].get<int>()});
    }
    if (arr->empty())
        r.fail(path + ".points", "pattern must not be empty");
    return pts;
}

Rational read_tau(Reader& r, const json& v, const std::string& path)
{
    try {
        if (v.is_string())
            return Rational::parse(v.get<std::string>());
        if (v.is_number())
            return Rational::parse(v.dump());
    } catch (const Error&) {
    }
    r.fail(path, "expected a non-negative rational");
    return {3, 10};
}

SimConfig read_config(Reader& r, const json& doc, const std::string& path)
{
    SimConfig c;
    if (!doc.is_object()) {
        r.fail(path, "expected an object");
        return c;
    }
    if (auto v = r.number(doc, path, "dt_s", false)) c.dt_s = *v;
    if (auto v = r.number(doc, path, "duration_s", false)) c.duration_s = *v;
    if (auto v = r.number(doc, path, "detection_distance_m", false)) c.detection_distance_m = *v;
    if (auto v = r.number(doc, path, "service_time_s", false)) c.service_time_s = *v;
    if (auto v = r.number(doc, path, "max_time_s", false)) c.max_time_s = *v;
    if (auto v = r.number(doc, path, "real_time_factor", false)) c.real_time_factor = *v;
    if (const json* v = r.member(doc, path, "priority_enabled", false)) {
        if (v->is_boolean())
            c.priority_enabled = v->get<bool>();
        else
            r.fail(path + ".priority_enabled", "expected a boolean");
    }
    if (!(c.dt_s > 0.0)) r.fail(path + ".dt_s", "must be > 0");
    if (c.duration_s < 0.0) r.fail(path + ".duration_s", "must be >= 0");
    if (!(c.detection_distance_m > 0.0)) r.fail(path + ".detection_distance_m", "must be > 0");
    if (c.service_time_s < 0.0) r.fail(path + ".service_time_s", "must be >= 0");
    if (!(c.max_time_s > 0.0)) r.fail(path + ".max_time_s", "must be > 0");
    if (!(c.real_time_factor > 0.0)) r.fail(path + ".real_time_factor", "must be > 0");
    return c;
}

} // namespace

ScenarioError::ScenarioError(ErrorCode code, std::vector<FieldError> problems)
    : Error(code, summarize(problems)), problems_(std::move(problems))
{
}

void SimConfig::validate() const
{
    if (!(dt_s > 0.0) || !(detection_distance_m > 0.0) || duration_s < 0.0 || service_time_s < 0.0 ||
        !(max_time_s > 0.0) || !(real_time_factor > 0.0))
        throw Error(ErrorCode::ScenarioInvalid, "simulation config out of range");
}

json config_to_json(const SimConfig& c)
{
    return {{"dt_s", c.dt_s},
            {"duration_s", c.duration_s},
            {"priority_enabled", c.priority_enabled},
            {"detection_distance_m", c.detection_distance_m},
            {"service_time_s", c.service_time_s},
            {"max_time_s", c.max_time_s},
            {"real_time_factor", c.real_time_factor}};
}

Scenario load_scenario(const json& doc, const std::filesystem::path& base_dir)
{
    Reader r;
    Scenario sc;
    if (!doc.is_object())
        throw ScenarioError(ErrorCode::ValidationError, {{"$", "scenario must be a JSON object"}});

    if (auto v = r.number(doc, "$", "schema_version", false)) {
        if (*v != kScenarioSchemaVersion)
            r.fail("schema_version", "unsupported version " + json(*v).dump());
    }

    // network
    std::vector<Node> nodes;
    std::vector<Edge> edges;
    std::vector<std::string> edge_paths;
    std::set<std::string> node_ids;
    if (const json* net = r.member(doc, "$", "network", true)) {
        if (const json* arr = r.array(*net, "network", "nodes")) {
            for (std::size_t i = 0; i < arr->size(); ++i) {
                std::string p = at("network.nodes", i);
                auto id = r.string((*arr)[i], p, "id");
                auto x = r.number((*arr)[i], p, "x");
                auto y = r.number((*arr)[i], p, "y");
                if (!id || !x || !y)
                    continue;
                if (!node_ids.insert(*id).second) {
                    r.fail(p + ".id", "duplicate node id '" + *id + "'");
                    continue;
                }
                nodes.push_back({*id, *x, *y});
            }
        }
        if (const json* arr = r.array(*net, "network", "edges")) {
            std::set<std::string> edge_ids;
            for (std::size_t i = 0; i < arr->size(); ++i) {
                const json& e = (*arr)[i];
                std::string p = at("network.edges", i);
                auto id = r.string(e, p, "id");
                auto from = r.string(e, p, "from");
                auto to = r.string(e, p, "to");
                auto len = r.number(e, p, "length_m");
                auto speed = r.number(e, p, "free_speed_mps");
                auto factor = r.number(e, p, "congestion_factor", false);
                auto ctrl = r.string(e, p, "controller", false);
                auto approach = r.string(e, p, "approach", false);
                if (!id || !from || !to || !len || !speed)
                    continue;
                std::string name = " (edge '" + *id + "')";
                bool ok = true;
                if (!edge_ids.insert(*id).second) {
                    r.fail(p + ".id", "duplicate edge id '" + *id + "'");
                    ok = false;
                }
                if (!node_ids.count(*from)) {
                    r.fail(p + ".from", "unknown node '" + *from + "'" + name);
                    ok = false;
                }
                if (!node_ids.count(*to)) {
                    r.fail(p + ".to", "unknown node '" + *to + "'" + name);
                    ok = false;
                }
                if (!(*len > 0.0)) {
                    r.fail(p + ".length_m", "must be > 0" + name);
                    ok = false;
                }
                if (!(*speed > 0.0)) {
                    r.fail(p + ".free_speed_mps", "must be > 0" + name);
                    ok = false;
                }
                if (factor && !(*factor >= 1.0)) {
                    r.fail(p + ".congestion_factor", "must be >= 1" + name);
                    ok = false;
                }
                if (ctrl.has_value() != approach.has_value()) {
                    r.fail(p, "controller and approach must be given together" + name);
                    ok = false;
                }
                if (!ok)
                    continue;
                Edge edge{*id, *from, *to, *len, *speed, factor.value_or(1.0), std::nullopt};
                if (ctrl)
                    edge.stop_line = StopLine{*ctrl, *approach};
                edges.push_back(std::move(edge));
                edge_paths.push_back(p);
            }
        }
    }

    // controllers
    std::map<std::string, std::size_t> controller_index;
    if (const json* arr = r.array(doc, "$", "controllers", false)) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const json& c = (*arr)[i];
            std::string p = at("controllers", i);
            ControllerSpec spec;
            auto id = r.string(c, p, "controller_id");
            auto ig = r.number(c, p, "intergreen_s");
            if (auto m = r.number(c, p, "clearance_margin_s", false)) spec.plan.clearance_margin_s = *m;
            if (auto m = r.number(c, p, "max_extension_s", false)) spec.plan.max_extension_s = *m;
            if (auto e = r.number(c, p, "initial_elapsed_s", false)) spec.initial_elapsed_s = *e;
            auto initial = r.string(c, p, "initial_phase", false);
            if (!id || !ig)
                continue;
            spec.plan.controller_id = *id;
            spec.plan.intergreen_s = *ig;
            if (const json* phases = r.array(c, p, "phases")) {
                for (std::size_t k = 0; k < phases->size(); ++k) {
                    const json& ph = (*phases)[k];
                    std::string pp = at(p + ".phases", k);
                    Phase phase;
                    auto pid = r.string(ph, pp, "id");
                    auto gmin = r.number(ph, pp, "green_min_s");
                    auto gnom = r.number(ph, pp, "green_nominal_s");
                    auto gmax = r.number(ph, pp, "green_max_s");
                    const json* apps = r.array(ph, pp, "approaches");
                    if (!pid || !gmin || !gnom || !gmax || !apps)
                        continue;
                    phase.id = *pid;
                    phase.green_min_s = *gmin;
                    phase.green_nominal_s = *gnom;
                    phase.green_max_s = *gmax;
                    for (std::size_t a = 0; a < apps->size(); ++a) {
                        if ((*apps)[a].is_string())
                            phase.approaches.push_back((*apps)[a].get<std::string>());
                        else
                            r.fail(at(pp + ".approaches", a), "expected a string");
                    }
                    spec.plan.phases.push_back(std::move(phase));
                }
            }
            try {
                spec.plan.validate();
            } catch (const Error& e) {
                r.fail(p, e.what());
                continue;
            }
            if (initial) {
                auto it = std::find_if(spec.plan.phases.begin(), spec.plan.phases.end(),
                                       [&](const Phase& ph) { return ph.id == *initial; });
                if (it == spec.plan.phases.end()) {
                    r.fail(p + ".initial_phase", "unknown phase '" + *initial + "'");
                    continue;
                }
                spec.initial_phase = static_cast<std::size_t>(it - spec.plan.phases.begin());
            }
            if (spec.initial_elapsed_s < 0.0 ||
                spec.initial_elapsed_s >= spec.plan.phases[spec.initial_phase].green_nominal_s) {
                r.fail(p + ".initial_elapsed_s", "must lie in [0, green_nominal_s) of the initial phase");
                continue;
            }
            if (!controller_index.emplace(*id, sc.controllers.size()).second) {
                r.fail(p + ".controller_id", "duplicate controller '" + *id + "'");
                continue;
            }
            sc.controllers.push_back(std::move(spec));
        }
    }

    for (std::size_t i = 0; i < edges.size(); ++i) {
        if (!edges[i].stop_line)
            continue;
        const StopLine& sl = *edges[i].stop_line;
        auto it = controller_index.find(sl.controller);
        if (it == controller_index.end()) {
            r.fail(edge_paths[i] + ".controller",
                   "unknown controller '" + sl.controller + "' (edge '" + edges[i].id + "')");
        } else if (!sc.controllers[it->second].plan.phase_of(sl.approach)) {
            r.fail(edge_paths[i] + ".approach",
                   "controller '" + sl.controller + "' has no approach '" + sl.approach + "'");
        }
    }

    if (r.problems.empty()) {
        try {
            sc.network = RoadNetwork(std::move(nodes), std::move(edges));
        } catch (const Error& e) {
            r.fail("network", e.what());
        }
    }

    // fleet
    std::set<std::string> unit_ids;
    if (const json* arr = r.array(doc, "$", "fleet", false)) {
        for (std::size_t i = 0; i < arr->size(); ++i) {
            const json& u = (*arr)[i];
            std::string p = at("fleet", i);
            auto id = r.string(u, p, "id");
            auto speed = r.number(u, p, "speed_mps");
            auto node = r.string(u, p, "node", false);
            auto x = r.number(u, p, "x", false);
            auto y = r.number(u, p, "y", false);
            if (!id || !speed)
                continue;
            if (!unit_ids.insert(*id).second) {
                r.fail(p + ".id", "duplicate unit '" + *id + "'");
                continue;
            }
            if (!(*speed > 0.0)) {
                r.fail(p + ".speed_mps", "must be > 0");
                continue;
            }
            Ambulance amb{*id, UnitStatus::Free, "", *speed};
            if (node) {
                if (!node_ids.count(*node)) {
                    r.fail(p + ".node", "unknown node '" + *node + "'");
                    continue;
                }
                amb.node = *node;
            } else if (x && y) {
                if (!r.problems.empty())
                    continue;
                try {
                    MapPosition pos = map_match(sc.network, *x, *y);
                    const Edge& e = sc.network.edge(pos.edge);
                    amb.node = pos.offset_m * 2.0 < e.length_m ? e.from : e.to;
                } catch (const Error& e) {
                    r.fail(p, e.what());
                    continue;
                }
            } else {
                r.fail(p, "needs either node or x/y");
                continue;
            }
            sc.fleet.push_back(std::move(amb));
        }
    }

    if (const json* arr = r.array(doc, "$", "hospitals", false)) {
        std::set<std::string> ids;
        for (std::size_t i = 0; i < arr->size(); ++i) {
            std::string p = at("hospitals", i);
            auto id = r.string((*arr)[i], p, "id");
            auto node = r.string((*arr)[i], p, "node");
            if (!id || !node)
                continue;
            if (!ids.insert(*id).second) {
                r.fail(p + ".id", "duplicate hospital '" + *id + "'");
                continue;
            }
            if (!node_ids.count(*node)) {
                r.fail(p + ".node", "unknown node '" + *node + "'");
                continue;
            }
            sc.hospitals.push_back({*id, *node});
        }
    }

    if (const json* arr = r.array(doc, "$", "incidents", false)) {
        std::set<std::string> ids;
        double last = 0.0;
        for (std::size_t i = 0; i < arr->size(); ++i) {
            std::string p = at("incidents", i);
            auto id = r.string((*arr)[i], p, "id");
            auto node = r.string((*arr)[i], p, "node");
            auto t = r.number((*arr)[i], p, "t_s");
            if (!id || !node || !t)
                continue;
            if (!ids.insert(*id).second)
                r.fail(p + ".id", "duplicate incident '" + *id + "'");
            if (!node_ids.count(*node))
                r.fail(p + ".node", "unknown node '" + *node + "'");
            if (*t < 0.0)
                r.fail(p + ".t_s", "incident scheduled before t = 0");
            else if (*t < last)
                r.fail(p + ".t_s", "scripted times must be non-decreasing");
            last = std::max(last, *t);
            sc.incidents.push_back({*id, *node, *t});
        }
        if (!sc.incidents.empty() && sc.hospitals.empty())
            r.fail("hospitals", "incidents need at least one hospital");
    }

    if (const json* rec = r.member(doc, "$", "recognition", false)) {
        RecognitionFixture fx;
        if (const json* pat = r.member(*rec, "recognition", "pattern", true))
            fx.pattern = read_points(r, *pat, "recognition.pattern");
        if (auto t = r.number(*rec, "recognition", "sobel_threshold", false))
            fx.params.sobel_threshold = static_cast<int>(*t);
        if (const json* tau = r.member(*rec, "recognition", "tau", false))
            fx.params.tau_per_point = read_tau(r, *tau, "recognition.tau");
        if (const json* frames = r.member(*rec, "recognition", "frames", false)) {
            if (!frames->is_object()) {
                r.fail("recognition.frames", "expected an object of unit id -> PGM path");
            } else {
                for (const auto& [unit, path] : frames->items()) {
                    std::string p = "recognition.frames." + unit;
                    if (!unit_ids.count(unit)) {
                        r.fail(p, "unknown unit '" + unit + "'");
                        continue;
                    }
                    if (!path.is_string()) {
                        r.fail(p, "expected a path string");
                        continue;
                    }
                    std::filesystem::path file = path.get<std::string>();
                    if (file.is_relative())
                        file = base_dir / file;
                    try {
                        fx.frames.emplace(unit, read_pgm(file));
                    } catch (const Error& e) {
                        r.fail(p, e.what());
                    }
                }
            }
        }
        sc.recognition = std::move(fx);
    }

    if (const json* cfg = r.member(doc, "$", "config", false))
        sc.config = read_config(r, *cfg, "config");

    if (!r.problems.empty())
        throw ScenarioError(ErrorCode::ValidationError, std::move(r.problems));
    return sc;
}

Scenario load_scenario_text(const std::string& text, const std::filesystem::path& base_dir)
{
    json doc = json::parse(text, nullptr, false);
    if (doc.is_discarded())
        throw ScenarioError(ErrorCode::ParseError, {{"$", "malformed JSON"}});
    return load_scenario(doc, base_dir);
}

Scenario load_scenario_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ScenarioError(ErrorCode::ParseError, {{path.string(), "cannot open file"}});
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scenario_text(buf.str(), path.parent_path());
}

Pattern load_pattern(const json& doc)
{
    Reader r;
    std::vector<Point> pts = read_points(r, doc, "$");
    if (!r.problems.empty())
        throw ScenarioError(ErrorCode::ValidationError, std::move(r.problems));
    return Pattern(std::move(pts));
}

Pattern load_pattern_file(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw ScenarioError(ErrorCode::ParseError, {{path.string(), "cannot open file"}});
    json doc = json::parse(in, nullptr, false);
    if (doc.is_discarded())
        throw ScenarioError(ErrorCode::ParseError, {{path.string(), "malformed JSON"}});
    return load_pattern(doc);
}

json pattern_to_json(const Pattern& pattern)
{
    json pts = json::array();
    for (Point p : pattern.points())
        pts.push_back({p.x, p.y});
    return {{"points", pts}};
}

json match_to_json(const MatchResult& result)
{
    return {{"translation", {result.best_translation.x, result.best_translation.y}},
            {"D", result.dissimilarity},
            {"n", result.pattern_size},
            {"per_point", result.per_point()},
            {"is_ambulance", result.is_ambulance}};
}

json route_to_json(const RoadNetwork& net, const Route& route)
{
    return {{"from", net.node(route.origin).id},
            {"to", net.node(route.destination).id},
            {"edges", edge_ids(net, route)},
            {"total_time_s", route.total_time_s},
            {"total_length_m", route.total_length_m}};
}

} // namespace amb
