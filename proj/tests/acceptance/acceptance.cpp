// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include "ambdispatch/dispatch_core.h"
#include "ambdispatch/error.h"
#include "ambdispatch/recognition.h"
#include "ambdispatch/sim_engine.h"

#include "fixtures.h"
#include "oracles.h"
#include "random_net.h"
#include "synthetic.h"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <sstream>
#include <string>

using namespace amb;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... args)
{
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

std::vector<SimEvent> of_kind(const std::vector<SimEvent>& events, EventKind kind)
{
    std::vector<SimEvent> out;
    for (const SimEvent& e : events) {
        if (e.kind == kind)
            out.push_back(e);
    }
    return out;
}

// 1. distance-field matching against brute-force evaluation
Outcome chamfer_exactness()
{
    std::mt19937_64 rng(1001);
    int mismatches = 0;
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<int> dim(4, 64);
        int w = dim(rng), h = dim(rng);
        int k = std::uniform_int_distribution<int>(1, 100)(rng);
        std::vector<Point> edges;
        for (int i = 0; i < k; ++i)
            edges.push_back({std::uniform_int_distribution<int>(0, w - 1)(rng),
                             std::uniform_int_distribution<int>(0, h - 1)(rng)});
        int pw = std::uniform_int_distribution<int>(1, std::min(w, 20))(rng);
        int ph = std::uniform_int_distribution<int>(1, std::min(h, 20))(rng);
        int n = std::uniform_int_distribution<int>(1, 60)(rng);
        std::vector<Point> pts;
        for (int i = 0; i < n; ++i)
            pts.push_back({std::uniform_int_distribution<int>(0, pw - 1)(rng),
                           std::uniform_int_distribution<int>(0, ph - 1)(rng)});

        Pattern pattern(pts);
        EdgeMap map(w, h, edges);
        MatchResult got = match_pattern(pattern, map);
        oracle::BruteMatch want =
            oracle::brute_match(pattern.points(), pattern.width(), pattern.height(), w, h, map.points);
        if (got.best_translation != want.translation || got.dissimilarity != want.d)
            ++mismatches;
    }
    return {mismatches == 0, fmt("%d/200 mismatches in (translation, D)", mismatches)};
}

// 2. stamped pattern is found at its offset with D = 0
Outcome self_match()
{
    std::mt19937_64 rng(2002);
    int failures = 0;
    for (int trial = 0; trial < 100; ++trial) {
        int n = std::uniform_int_distribution<int>(1, 60)(rng);
        int bw = std::uniform_int_distribution<int>(1, 50)(rng);
        int bh = std::uniform_int_distribution<int>(1, 40)(rng);
        std::vector<Point> pts;
        for (int i = 0; i < n; ++i)
            pts.push_back({std::uniform_int_distribution<int>(0, bw - 1)(rng),
                           std::uniform_int_distribution<int>(0, bh - 1)(rng)});
        Pattern pattern(pts);
        Point t{std::uniform_int_distribution<int>(0, synth::kFrameWidth - pattern.width())(rng),
                std::uniform_int_distribution<int>(0, synth::kFrameHeight - pattern.height())(rng)};
        std::vector<Point> stamped;
        for (Point p : pattern.points())
            stamped.push_back({p.x + t.x, p.y + t.y});
        MatchResult r = match_pattern(pattern, EdgeMap(synth::kFrameWidth, synth::kFrameHeight, stamped));
        if (r.dissimilarity != 0 || r.best_translation != t)
            ++failures;
    }
    return {failures == 0, fmt("%d/100 failures", failures)};
}

struct StudyResult {
    double glyph_max = 0.0;
    double distractor_min = std::numeric_limits<double>::infinity();
    int localization_errors = 0;
    int classification_errors = 0;

    int errors() const { return localization_errors + classification_errors; }
};

StudyResult pattern_study(std::size_t n, int frames)
{
    Point offset;
    Pattern pattern(synth::glyph_pattern(n, offset));
    RecognitionParams params;
    StudyResult s;
    for (int i = 0; i < frames; ++i) {
        std::mt19937_64 rng(3000 + i);
        synth::FrameSpec spec;
        spec.vehicle_x = std::uniform_int_distribution<int>(0, synth::max_vehicle_x())(rng);
        spec.vehicle_y = std::uniform_int_distribution<int>(0, synth::max_vehicle_y())(rng);
        spec.noise_fraction = 0.02;
        spec.seed = 7000 + i;

        spec.glyph = true;
        synth::Frame glyph = synth::render_vehicle(spec);
        MatchResult g = recognize(glyph.image, pattern, params);
        s.glyph_max = std::max(s.glyph_max, g.per_point());
        Point expected{glyph.glyph_origin.x + offset.x, glyph.glyph_origin.y + offset.y};
        if (g.best_translation != expected)
            ++s.localization_errors;
        if (!g.is_ambulance)
            ++s.classification_errors;

        spec.glyph = false;
        synth::Frame plain = synth::render_vehicle(spec);
        MatchResult d = recognize(plain.image, pattern, params);
        s.distractor_min = std::min(s.distractor_min, d.per_point());
        if (d.is_ambulance)
            ++s.classification_errors;
    }
    return s;
}

// 3. pattern-size study on synthetic frames
Outcome pattern_size_study()
{
    const int frames = 40;
    StudyResult big = pattern_study(50, frames);
    StudyResult small = pattern_study(20, frames);
    bool separated = big.glyph_max < big.distractor_min && big.classification_errors == 0;
    bool ordered = small.errors() >= big.errors();
    return {separated && ordered,
            fmt("%d+%d frames; n=50: glyph D/n max %.3f < distractor D/n min %.3f, errors %d; "
                "n=20: glyph max %.3f, distractor min %.3f, errors %d (loc %d, cls %d)",
                frames, frames, big.glyph_max, big.distractor_min, big.errors(), small.glyph_max,
                small.distractor_min, small.errors(), small.localization_errors, small.classification_errors)};
}

// 4. shortest paths against exhaustive enumeration
Outcome routing_oracle()
{
    std::mt19937_64 rng(4004);
    int mismatches = 0, pairs = 0;
    for (int trial = 0; trial < 100; ++trial) {
        RoadNetwork net = synth::random_network(rng, 10, 20);
        std::size_t n = net.nodes().size();
        for (NodeIndex o = 0; o < n; ++o) {
            for (NodeIndex d = 0; d < n; ++d) {
                ++pairs;
                auto want = oracle::fastest_simple_path(net, o, d);
                try {
                    Route r = shortest_path(net, o, d);
                    if (!want || r.total_time_s != want->time_s || edge_ids(net, r) != want->edge_ids)
                        ++mismatches;
                } catch (const Error& e) {
                    if (want || e.code() != ErrorCode::NoRoute)
                        ++mismatches;
                }
            }
        }
    }
    return {mismatches == 0, fmt("%d mismatches over %d origin/destination pairs in 100 networks", mismatches, pairs)};
}

// 5. green extension: G_K = 5 s, t_d = 12 s
Outcome green_extension()
{
    fixture::Corridor c; // PA green with 5 s left, detection 150 m out at 12.5 m/s
    RunResult r = run(fixture::corridor(c));
    auto det = of_kind(r.events, EventKind::Detection);
    auto cross = of_kind(r.events, EventKind::StopLineCross);
    if (det.size() != 1 || cross.size() != 1)
        return {false, fmt("expected one detection and one crossing, got %zu and %zu", det.size(), cross.size())};
    const auto& p = det[0].payload;
    if (!p.contains("outcome"))
        return {false, "detection did not request priority"};
    double g_k = p["remaining_green_s"];
    double t_d = p["t_d_s"];
    double ext = p["extension_s"];
    double waited = cross[0].payload["waited_s"];
    double margin = 1.0;
    bool ok = p["outcome"] == "Extended" && g_k == 5.0 && t_d == 12.0 && ext >= 7.0 + margin &&
              g_k + ext > t_d && waited == 0.0 && r.report["ambulances"][0]["stops"] == 0;
    return {ok, fmt("G_K=%.1f t_d=%.1f G'_A=%.1f waited_s=%.1f", g_k, t_d, ext, waited)};
}

struct PreemptCase {
    double elapsed;
    double gmin;
    double nominal;
    double intergreen;
    double speed;
};

// Returns an empty string on success, otherwise what went wrong.
std::string check_preemption(const PreemptCase& k)
{
    fixture::Corridor c;
    c.initial_phase = "PB";
    c.initial_elapsed_s = k.elapsed;
    c.min_b_s = k.gmin;
    c.nominal_b_s = k.nominal;
    c.intergreen_s = k.intergreen;
    c.speed_mps = k.speed;
    RunResult r = run(fixture::corridor(c));

    auto det = of_kind(r.events, EventKind::Detection);
    if (det.size() != 1 || det[0].payload.value("outcome", "") != "Preempting")
        return "no preemption";
    const double dt = 0.5;
    double expect_end = std::max(k.gmin - k.elapsed, dt);
    bool saw_end = false, saw_start = false;
    for (const SimEvent& e : of_kind(r.events, EventKind::PhaseChange)) {
        const auto& p = e.payload;
        if (p["phase"] == "PB" && p["change"] == "GreenEnded") {
            double green = p["green_s"];
            if (green < k.gmin - 1e-9)
                return fmt("PB green %.2f < G_Bmin %.2f", green, k.gmin);
            if (!saw_end) {
                saw_end = true;
                if (e.t_s != expect_end || p["cause"] != "preempt")
                    return fmt("PB ended at %.2f (%s), expected %.2f", e.t_s,
                               p["cause"].get<std::string>().c_str(), expect_end);
            }
        }
        if (p["phase"] == "PA" && p["change"] == "GreenStarted" && !saw_start) {
            saw_start = true;
            if (e.t_s != expect_end + k.intergreen)
                return fmt("PA started at %.2f, expected %.2f", e.t_s, expect_end + k.intergreen);
        }
    }
    if (!saw_end || !saw_start)
        return "phase switch not observed";
    return "";
}

// 6. preemption: switch at max(elapsed, G_Bmin) plus intergreen, never below G_Bmin
Outcome preemption()
{
    std::string base = check_preemption({3.0, 8.0, 20.0, 3.0, 12.5});
    if (!base.empty())
        return {false, "elapsed 3 / G_Bmin 8: " + base};

    std::mt19937_64 rng(6006);
    auto halves = [&](int lo, int hi) { return 0.5 * std::uniform_int_distribution<int>(lo, hi)(rng); };
    int failures = 0;
    std::string first;
    for (int trial = 0; trial < 50; ++trial) {
        PreemptCase k;
        k.gmin = halves(2, 24);
        k.nominal = k.gmin + halves(0, 24);
        k.elapsed = halves(0, static_cast<int>(k.nominal * 2) - 1);
        k.intergreen = halves(0, 10);
        k.speed = 8.0 + halves(0, 24);
        std::string err = check_preemption(k);
        if (!err.empty()) {
            ++failures;
            if (first.empty())
                first = fmt(" (first: elapsed %.1f gmin %.1f: ", k.elapsed, k.gmin) + err + ")";
        }
    }
    return {failures == 0, fmt("switch at elapsed 8 + intergreen 3 for the reference case; %d/50 randomized failures",
                               failures) + first};
}

struct Paired {
    double delay_on, delay_off, response_on, response_off;
    bool replay_identical;
};

Paired paired_runs(const Scenario& sc)
{
    SimConfig on = sc.config, off = sc.config;
    on.priority_enabled = true;
    off.priority_enabled = false;
    auto dump = [](const RunResult& r) {
        std::ostringstream out;
        out << r.report.dump() << '\n';
        for (const SimEvent& e : r.events)
            out << event_to_line(e) << '\n';
        return out.str();
    };
    RunResult a = run(sc, on), b = run(sc, off);
    bool same = dump(a) == dump(run(sc, on)) && dump(b) == dump(run(sc, off));
    return {a.report["totals"]["intersection_delay_s"], b.report["totals"]["intersection_delay_s"],
            a.report["incidents"][0]["response_time_s"], b.report["incidents"][0]["response_time_s"], same};
}

// 7. priority on vs off on scenarios where the unit would meet red
Outcome priority_benefit()
{
    fixture::Corridor ext; // green would end before arrival
    fixture::Corridor pre;
    pre.initial_phase = "PB";
    pre.initial_elapsed_s = 3.0;
    std::string detail;
    bool ok = true;
    for (const auto& [name, c] : {std::pair{"extension", ext}, std::pair{"preemption", pre}}) {
        Paired p = paired_runs(fixture::corridor(c));
        ok = ok && p.delay_on < p.delay_off && p.response_on <= p.response_off && p.replay_identical;
        detail += fmt("%s: delay %.1f vs %.1f s, response %.1f vs %.1f s, replay %s; ", name, p.delay_on,
                      p.delay_off, p.response_on, p.response_off, p.replay_identical ? "identical" : "DIFFERS");
    }
    detail.resize(detail.size() - 2);
    return {ok, detail};
}

// 8. selected unit is fastest among free units, ties to the smaller id
Outcome dispatch_optimality()
{
    std::mt19937_64 rng(8008);
    int failures = 0, ties = 0, cases = 0;
    while (cases < 100) {
        RoadNetwork net = synth::random_network(rng, 10, 20);
        std::size_t n = net.nodes().size();
        std::vector<Ambulance> fleet;
        int units = std::uniform_int_distribution<int>(2, 6)(rng);
        for (int i = 0; i < units; ++i) {
            UnitStatus st = rng() % 3 == 0 ? UnitStatus::Transporting : UnitStatus::Free;
            fleet.push_back({"amb" + std::to_string(i), st, net.node(rng() % n).id, 12.0});
        }
        std::shuffle(fleet.begin(), fleet.end(), rng);
        Incident inc{"I", net.node(rng() % n).id, 0.0};

        // full evaluation: every Free unit's enumerated fastest time
        double best_t = std::numeric_limits<double>::infinity();
        std::string best_id;
        int at_best = 0;
        for (const Ambulance& a : fleet) {
            if (a.status != UnitStatus::Free)
                continue;
            auto p = oracle::fastest_simple_path(net, net.node_index(a.node), net.node_index(inc.location));
            if (!p)
                continue;
            if (p->time_s < best_t) {
                best_t = p->time_s;
                best_id = a.id;
                at_best = 1;
            } else if (p->time_s == best_t) {
                ++at_best;
                best_id = std::min(best_id, a.id);
            }
        }
        if (best_id.empty())
            continue; // nobody can reach the scene; not a placement worth scoring
        ++cases;
        ties += at_best > 1;
        try {
            UnitChoice c = select_ambulance(inc, fleet, net);
            if (c.ambulance != best_id || c.route.total_time_s != best_t)
                ++failures;
        } catch (const Error&) {
            ++failures;
        }
    }
    return {failures == 0, fmt("%d/100 failures (%d cases with tied units)", failures, ties)};
}

} // namespace

int main()
{
    struct Criterion {
        int id;
        const char* name;
        std::function<Outcome()> fn;
    };
    const Criterion criteria[] = {
        {1, "chamfer exactness", chamfer_exactness},
        {2, "self-match", self_match},
        {3, "pattern-size study", pattern_size_study},
        {4, "routing oracle", routing_oracle},
        {5, "green extension", green_extension},
        {6, "preemption", preemption},
        {7, "priority benefit", priority_benefit},
        {8, "dispatch optimality", dispatch_optimality},
    };

    int failed = 0;
    for (const Criterion& c : criteria) {
        auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.fn();
        } catch (const std::exception& e) {
            o = {false, std::string("threw: ") + e.what()};
        }
        double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        std::printf("%s %d %s: %s [%.2f s]\n", o.pass ? "PASS" : "FAIL", c.id, c.name, o.detail.c_str(), secs);
        failed += !o.pass;
    }
    std::fflush(stdout);
    return failed ? 1 : 0;
}
