#pragma once

#include "ambdispatch/dispatch_core.h"
#include "ambdispatch/error.h"
#include "ambdispatch/geo_network.h"
#include "ambdispatch/gray_image.h"
#include "ambdispatch/recognition.h"
#include "ambdispatch/signal_priority.h"

#include <json.hpp>

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace amb {

inline constexpr int kScenarioSchemaVersion = 1;

struct SimConfig {
    double dt_s = 0.5;
    double duration_s = 0.0; // 0: run until quiescent (capped by max_time_s)
    bool priority_enabled = true;
    double detection_distance_m = 150.0;
    double service_time_s = 120.0;
    double max_time_s = 86400.0;
    double real_time_factor = 1.0; // service pacing only

    void validate() const;
};

struct ControllerSpec {
    PhasePlan plan;
    std::size_t initial_phase = 0;
    double initial_elapsed_s = 0.0;
};

struct ScriptedIncident {
    std::string id;
    std::string node;
    double t_s = 0.0;
};

/// Optional gate that runs the image recognizer on a pre-rendered frame per
/// ambulance before a detection may request priority.
struct RecognitionFixture {
    std::vector<Point> pattern;
    RecognitionParams params;
    std::map<std::string, GrayImage> frames; // ambulance id -> frame
};

struct Scenario {
    int schema_version = kScenarioSchemaVersion;
    RoadNetwork network;
    std::vector<ControllerSpec> controllers;
    std::vector<Ambulance> fleet;
    std::vector<Hospital> hospitals;
    std::vector<ScriptedIncident> incidents;
    std::optional<RecognitionFixture> recognition;
    SimConfig config;
};

/// One problem found while validating a scenario document.
struct FieldError {
    std::string path; // e.g. "network.edges[2].to"
    std::string message;
};

/// Thrown by load_scenario. ParseError for malformed JSON, ValidationError
/// (with every field problem collected) for bad content.
class ScenarioError : public Error {
public:
    ScenarioError(ErrorCode code, std::vector<FieldError> problems);
    const std::vector<FieldError>& problems() const { return problems_; }

private:
    std::vector<FieldError> problems_;
};

/// Validates a scenario document. Relative frame paths resolve against `base_dir`.
Scenario load_scenario(const nlohmann::json& doc, const std::filesystem::path& base_dir = {});
Scenario load_scenario_text(const std::string& text, const std::filesystem::path& base_dir = {});
Scenario load_scenario_file(const std::filesystem::path& path);

nlohmann::json config_to_json(const SimConfig& config);

// Pattern JSON: {"points": [[x, y], ...]}
Pattern load_pattern(const nlohmann::json& doc);
Pattern load_pattern_file(const std::filesystem::path& path);
nlohmann::json pattern_to_json(const Pattern& pattern);

// {"translation": [x, y], "D": .., "n": .., "per_point": .., "is_ambulance": ..}
nlohmann::json match_to_json(const MatchResult& result);

nlohmann::json route_to_json(const RoadNetwork& net, const Route& route);

} // namespace amb
