#pragma once

// Scenario documents shared by the unit and acceptance tests.

#include "ambdispatch/scenario.h"

#include <json.hpp>

#include <string>

namespace fixture {

using nlohmann::json;

// One signalised intersection B. The ambulance parks at A, drives A -> B on
// approach "N" (phase PA) and continues to the scene S, where the hospital
// also sits. A side street W -> B feeds approach "E" (phase PB).
struct Corridor {
    double approach_m = 150.0;
    double speed_mps = 12.5;
    std::string initial_phase = "PA";
    double initial_elapsed_s = 15.0;
    double nominal_a_s = 20.0;
    double nominal_b_s = 20.0;
    double min_a_s = 5.0;
    double min_b_s = 8.0;
    double intergreen_s = 3.0;
    bool priority = true;
    double incident_t_s = 0.0;
};

inline json corridor_doc(const Corridor& c = {})
{
    double bx = c.approach_m;
    json phases = json::array({
        {{"id", "PA"}, {"approaches", {"N"}}, {"green_min_s", c.min_a_s}, {"green_nominal_s", c.nominal_a_s},
         {"green_max_s", c.nominal_a_s + 30}},
        {{"id", "PB"}, {"approaches", {"E"}}, {"green_min_s", c.min_b_s}, {"green_nominal_s", c.nominal_b_s},
         {"green_max_s", c.nominal_b_s + 30}},
    });
    return {
        {"schema_version", 1},
        {"network",
         {{"nodes",
           {{{"id", "A"}, {"x", 0}, {"y", 0}},
            {{"id", "B"}, {"x", bx}, {"y", 0}},
            {{"id", "S"}, {"x", bx + 150}, {"y", 0}},
            {{"id", "W"}, {"x", bx}, {"y", 100}}}},
          {"edges",
           {{{"id", "e1"}, {"from", "A"}, {"to", "B"}, {"length_m", c.approach_m}, {"free_speed_mps", c.speed_mps},
             {"controller", "C1"}, {"approach", "N"}},
            {{"id", "e2"}, {"from", "B"}, {"to", "S"}, {"length_m", 150}, {"free_speed_mps", c.speed_mps}},
            {{"id", "x1"}, {"from", "W"}, {"to", "B"}, {"length_m", 100}, {"free_speed_mps", 10},
             {"controller", "C1"}, {"approach", "E"}}}}}},
        {"controllers",
         {{{"controller_id", "C1"},
           {"intergreen_s", c.intergreen_s},
           {"initial_phase", c.initial_phase},
           {"initial_elapsed_s", c.initial_elapsed_s},
           {"phases", phases}}}},
        {"fleet", {{{"id", "amb1"}, {"node", "A"}, {"speed_mps", c.speed_mps}}}},
        {"hospitals", {{{"id", "H1"}, {"node", "S"}}}},
        {"incidents", {{{"id", "I1"}, {"node", "S"}, {"t_s", c.incident_t_s}}}},
        {"config", {{"dt_s", 0.5}, {"priority_enabled", c.priority}}},
    };
}

inline amb::Scenario corridor(const Corridor& c = {}) { return amb::load_scenario(corridor_doc(c)); }

// Unsignalised triangle: a -> b -> c takes 20 s, the direct a -> c edge 30 s.
inline json triangle_doc()
{
    return {
        {"schema_version", 1},
        {"network",
         {{"nodes", {{{"id", "a"}, {"x", 0}, {"y", 0}}, {{"id", "b"}, {"x", 100}, {"y", 0}},
                     {{"id", "c"}, {"x", 100}, {"y", 100}}}},
          {"edges",
           {{{"id", "ab"}, {"from", "a"}, {"to", "b"}, {"length_m", 100}, {"free_speed_mps", 10}},
            {{"id", "bc"}, {"from", "b"}, {"to", "c"}, {"length_m", 100}, {"free_speed_mps", 10}},
            {{"id", "ac"}, {"from", "a"}, {"to", "c"}, {"length_m", 150}, {"free_speed_mps", 5}},
            {{"id", "ca"}, {"from", "c"}, {"to", "a"}, {"length_m", 150}, {"free_speed_mps", 5}},
            {{"id", "ba"}, {"from", "b"}, {"to", "a"}, {"length_m", 100}, {"free_speed_mps", 10}}}}}},
        {"controllers", json::array()},
        {"fleet", {{{"id", "u1"}, {"node", "a"}, {"speed_mps", 15}}, {{"id", "u2"}, {"node", "b"}, {"speed_mps", 15}}}},
        {"hospitals", {{{"id", "H"}, {"node", "a"}}}},
        {"incidents", json::array()},
        {"config", {{"dt_s", 0.5}}},
    };
}

} // namespace fixture
