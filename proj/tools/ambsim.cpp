// ambsim: headless front end for the ambulance dispatch simulator.
//
//   ambsim simulate <scenario.json> [--priority on|off] [--out report.json] [--events log.jsonl]
//   ambsim recognize <frame.pgm> --pattern <pattern.json> [--sobel-threshold N] [--tau X]
//   ambsim route <scenario.json> <from> <to>
//   ambsim serve <scenario.json> --port N [--host H] [--autostart] [--rate F]
//
// Exit codes: 0 success, 2 usage or validation error, 1 any other failure.

#include "ambdispatch/error.h"
#include "ambdispatch/recognition.h"
#include "ambdispatch/scenario.h"
#include "ambdispatch/service.h"
#include "ambdispatch/sim_engine.h"

#include <CLI11.hpp>

#include <atomic>
#include <chrono>
#include <csignal>
#include <fstream>
#include <iostream>
#include <thread>

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitValidation = 2;

std::atomic<bool> g_interrupted{false};

void on_signal(int) { g_interrupted = true; }

bool is_validation(const amb::Error& e)
{
    switch (e.code()) {
    case amb::ErrorCode::ParseError:
    case amb::ErrorCode::ValidationError:
    case amb::ErrorCode::ScenarioInvalid:
    case amb::ErrorCode::InvalidImage:
    case amb::ErrorCode::InvalidRequest:
    case amb::ErrorCode::UnknownNode:
        return true;
    default:
        return false;
    }
}

int cmd_simulate(const std::string& path, const std::string& priority, const std::string& out_path,
                 const std::string& events_path)
{
    amb::Scenario scenario = amb::load_scenario_file(path);
    amb::SimConfig cfg = scenario.config;
    if (priority == "on")
        cfg.priority_enabled = true;
    else if (priority == "off")
        cfg.priority_enabled = false;

    amb::RunResult result = amb::run(scenario, cfg);
    std::string report = result.report.dump(2);
    if (out_path.empty()) {
        std::cout << report << '\n';
    } else {
        std::ofstream out(out_path);
        if (!out)
            throw amb::Error(amb::ErrorCode::ParseError, "cannot write '" + out_path + "'");
        out << report << '\n';
    }
    if (!events_path.empty()) {
        std::ofstream log(events_path);
        if (!log)
            throw amb::Error(amb::ErrorCode::ParseError, "cannot write '" + events_path + "'");
        for (const amb::SimEvent& e : result.events)
            log << amb::event_to_line(e) << '\n';
    }
    return 0;
}

int cmd_recognize(const std::string& image, const std::string& pattern_path, int threshold, const std::string& tau)
{
    amb::RecognitionParams params;
    params.sobel_threshold = threshold;
    params.tau_per_point = amb::Rational::parse(tau);
    amb::GrayImage frame = amb::read_pgm(std::filesystem::path(image));
    amb::Pattern pattern = amb::load_pattern_file(pattern_path);
    amb::MatchResult result = amb::recognize(frame, pattern, params);
    std::cout << amb::match_to_json(result).dump() << '\n';
    return 0;
}

int cmd_route(const std::string& path, const std::string& from, const std::string& to)
{
    amb::Scenario scenario = amb::load_scenario_file(path);
    amb::Route route = amb::shortest_path(scenario.network, from, to);
    std::cout << amb::route_to_json(scenario.network, route).dump() << '\n';
    return 0;
}

int cmd_serve(const std::string& path, const std::string& host, int port, bool autostart, double rate)
{
    amb::ServiceOptions opts;
    opts.host = host;
    opts.port = port;
    opts.autostart = autostart;
    if (rate > 0.0)
        opts.real_time_factor = rate;
    amb::DispatchService service(amb::load_scenario_file(path), opts);
    int bound = service.start();
    std::cerr << "serving on http://" << host << ":" << bound << '\n';

    std::signal(SIGINT, on_signal);
    std::signal(SIGTERM, on_signal);
    while (!g_interrupted)
        std::this_thread::sleep_for(std::chrono::milliseconds(100));
    service.stop();
    return 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Ambulance dispatch simulator"};
    app.require_subcommand(1);

    std::string scenario_path;
    std::string priority;
    std::string out_path;
    std::string events_path;
    auto* simulate = app.add_subcommand("simulate", "Run a scenario headless and print the metrics report");
    simulate->add_option("scenario", scenario_path, "Scenario JSON")->required();
    simulate->add_option("--priority", priority, "Signal priority on|off (default: scenario config)")
        ->check(CLI::IsMember({"on", "off"}));
    simulate->add_option("--out", out_path, "Write the report here instead of stdout");
    simulate->add_option("--events", events_path, "Write the JSON-lines event log here");

    std::string image_path;
    std::string pattern_path;
    int threshold = 128;
    std::string tau = "0.3";
    auto* recog = app.add_subcommand("recognize", "Match a pattern against a PGM frame");
    recog->add_option("image", image_path, "Binary PGM frame")->required();
    recog->add_option("--pattern", pattern_path, "Pattern JSON {points: [[x,y],...]}")->required();
    recog->add_option("--sobel-threshold", threshold, "Edge magnitude threshold")->check(CLI::NonNegativeNumber);
    recog->add_option("--tau", tau, "Per-point dissimilarity threshold (decimal or p/q)");

    std::string from;
    std::string to;
    auto* route = app.add_subcommand("route", "Shortest travel-time route between two nodes");
    route->add_option("scenario", scenario_path, "Scenario JSON")->required();
    route->add_option("from", from, "Origin node id")->required();
    route->add_option("to", to, "Destination node id")->required();

    std::string host = "127.0.0.1";
    int port = 8080;
    bool autostart = false;
    double rate = 0.0;
    auto* serve = app.add_subcommand("serve", "Serve the scenario over HTTP");
    serve->add_option("scenario", scenario_path, "Scenario JSON")->required();
    serve->add_option("--port", port, "TCP port (0 picks a free one)")->required()->check(CLI::Range(0, 65535));
    serve->add_option("--host", host, "Bind address");
    serve->add_flag("--autostart", autostart, "Start stepping immediately");
    serve->add_option("--rate", rate, "Real-time factor (simulated seconds per wall second)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : kExitValidation;
    }

    try {
        if (*simulate)
            return cmd_simulate(scenario_path, priority, out_path, events_path);
        if (*recog)
            return cmd_recognize(image_path, pattern_path, threshold, tau);
        if (*route)
            return cmd_route(scenario_path, from, to);
        if (*serve)
            return cmd_serve(scenario_path, host, port, autostart, rate);
    } catch (const amb::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_validation(e) ? kExitValidation : kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFailure;
    }
    return kExitFailure;
}
