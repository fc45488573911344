// Regenerates data/: sample scenarios, camera frames and glyph patterns.
//
//   make_sample_data <data-dir>

#include "ambdispatch/gray_image.h"
#include "ambdispatch/recognition.h"
#include "ambdispatch/scenario.h"

#include "fixtures.h"
#include "synthetic.h"

#include <filesystem>
#include <fstream>
#include <iostream>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void write_json(const fs::path& path, const json& doc)
{
    fs::create_directories(path.parent_path());
    std::ofstream(path) << doc.dump(2) << '\n';
    std::cout << "wrote " << path.string() << '\n';
}

json pattern_doc(std::size_t n)
{
    amb::Point offset;
    return amb::pattern_to_json(amb::Pattern(synth::glyph_pattern(n, offset)));
}

// 4x4 grid, 200 m blocks. The four interior junctions are signalised with a
// north-south and an east-west phase.
json city_grid()
{
    const int size = 4;
    auto id = [](int c, int r) { return "n" + std::to_string(c) + std::to_string(r); };
    auto interior = [&](int c, int r) { return c > 0 && r > 0 && c < size - 1 && r < size - 1; };

    json nodes = json::array(), edges = json::array(), controllers = json::array();
    for (int r = 0; r < size; ++r)
        for (int c = 0; c < size; ++c)
            nodes.push_back({{"id", id(c, r)}, {"x", 200 * c}, {"y", 200 * r}});

    const int dc[] = {1, -1, 0, 0}, dr[] = {0, 0, 1, -1};
    // approach named after the side the vehicle arrives from
    const char* side[] = {"W", "E", "N", "S"};
    int k = 0;
    for (int r = 0; r < size; ++r) {
        for (int c = 0; c < size; ++c) {
            for (int d = 0; d < 4; ++d) {
                int c2 = c + dc[d], r2 = r + dr[d];
                if (c2 < 0 || r2 < 0 || c2 >= size || r2 >= size)
                    continue;
                json e = {{"id", "s" + id(c, r).substr(1) + id(c2, r2).substr(1)},
                          {"from", id(c, r)},
                          {"to", id(c2, r2)},
                          {"length_m", 200},
                          {"free_speed_mps", 13.9},
                          {"congestion_factor", 1.0 + 0.25 * (k++ % 3)}};
                if (interior(c2, r2)) {
                    e["controller"] = "J" + id(c2, r2).substr(1);
                    e["approach"] = side[d];
                }
                edges.push_back(e);
            }
        }
    }
    int offset = 0;
    for (int r = 1; r < size - 1; ++r) {
        for (int c = 1; c < size - 1; ++c) {
            controllers.push_back(
                {{"controller_id", "J" + id(c, r).substr(1)},
                 {"intergreen_s", 4},
                 {"initial_phase", offset % 2 ? "EW" : "NS"},
                 {"initial_elapsed_s", 7 * offset},
                 {"phases",
                  {{{"id", "NS"}, {"approaches", {"N", "S"}}, {"green_min_s", 8}, {"green_nominal_s", 25},
                    {"green_max_s", 45}},
                   {{"id", "EW"}, {"approaches", {"E", "W"}}, {"green_min_s", 8}, {"green_nominal_s", 25},
                    {"green_max_s", 45}}}}});
            ++offset;
        }
    }

    return {{"schema_version", 1},
            {"network", {{"nodes", nodes}, {"edges", edges}}},
            {"controllers", controllers},
            {"fleet",
             {{{"id", "amb1"}, {"node", "n00"}, {"speed_mps", 15}},
              {{"id", "amb2"}, {"node", "n33"}, {"speed_mps", 15}},
              {{"id", "amb3"}, {"x", 590}, {"y", 10}, {"speed_mps", 14}}}},
            {"hospitals", {{{"id", "General"}, {"node", "n30"}}, {{"id", "StMary"}, {"node", "n03"}}}},
            {"incidents",
             {{{"id", "I1"}, {"node", "n22"}, {"t_s", 5}},
              {{"id", "I2"}, {"node", "n12"}, {"t_s", 30}},
              {{"id", "I3"}, {"node", "n21"}, {"t_s", 90}},
              {{"id", "I4"}, {"node", "n11"}, {"t_s", 240}}}},
            {"recognition",
             {{"pattern", pattern_doc(50)},
              {"sobel_threshold", 128},
              {"tau", "3/10"},
              {"frames", {{"amb1", "../frames/ambulance.pgm"}, {"amb2", "../frames/ambulance.pgm"},
                          {"amb3", "../frames/van.pgm"}}}}},
            {"config", {{"dt_s", 0.5}, {"priority_enabled", true}, {"service_time_s", 120}}}};
}

} // namespace

int main(int argc, char** argv)
{
    if (argc != 2) {
        std::cerr << "usage: make_sample_data <data-dir>\n";
        return 2;
    }
    fs::path root = argv[1];

    synth::FrameSpec spec;
    spec.vehicle_x = 37;
    spec.vehicle_y = 18;
    spec.noise_fraction = 0.02;
    spec.seed = 42;
    fs::create_directories(root / "frames");
    amb::write_pgm(root / "frames/ambulance.pgm", synth::render_vehicle(spec).image);
    spec.glyph = false;
    amb::write_pgm(root / "frames/van.pgm", synth::render_vehicle(spec).image);
    std::cout << "wrote frames\n";

    write_json(root / "patterns/am50.json", pattern_doc(50));
    write_json(root / "patterns/am20.json", pattern_doc(20));

    write_json(root / "scenarios/triangle.json", fixture::triangle_doc());
    write_json(root / "scenarios/corridor_extension.json", fixture::corridor_doc());
    fixture::Corridor pre;
    pre.initial_phase = "PB";
    pre.initial_elapsed_s = 3;
    write_json(root / "scenarios/corridor_preemption.json", fixture::corridor_doc(pre));
    write_json(root / "scenarios/city_grid.json", city_grid());
    return 0;
}
