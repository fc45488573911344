#include "ambdispatch/service.h"

#include "fixtures.h"

#include <doctest.h>
#include <httplib.h>

#include <chrono>
#include <sstream>
#include <thread>

using namespace amb;
using nlohmann::json;

namespace {

struct Served {
    DispatchService service;
    int port;
    httplib::Client client;

    explicit Served(ServiceOptions opts = {})
        : service(load_scenario(fixture::triangle_doc()), with_port0(opts)), port(service.start()),
          client("127.0.0.1", port)
    {
        client.set_read_timeout(5, 0);
    }

    static ServiceOptions with_port0(ServiceOptions o)
    {
        o.port = 0;
        return o;
    }

    httplib::Result command(const std::string& kind, json payload, const std::string& client_id = "t",
                            std::int64_t seq = 0)
    {
        static std::int64_t auto_seq = 1000;
        json body = {{"kind", kind}, {"payload", std::move(payload)}, {"client_id", client_id},
                     {"seq", seq ? seq : ++auto_seq}};
        return client.Post("/commands", body.dump(), "application/json");
    }

    json state()
    {
        auto r = client.Get("/state");
        REQUIRE(r);
        REQUIRE(r->status == 200);
        return json::parse(r->body);
    }

    // Parses a non-following SSE response into its data documents.
    std::vector<json> events(std::uint64_t since)
    {
        auto r = client.Get("/events?follow=0&since=" + std::to_string(since));
        REQUIRE(r);
        REQUIRE(r->status == 200);
        std::vector<json> out;
        std::istringstream in(r->body);
        std::string line;
        while (std::getline(in, line)) {
            if (line.rfind("data: ", 0) == 0)
                out.push_back(json::parse(line.substr(6)));
        }
        return out;
    }
};

} // namespace

TEST_CASE("state and metrics are served")
{
    Served s;
    json st = s.state();
    CHECK(st["t_s"] == 0.0);
    CHECK(st["running"] == false);
    CHECK(st["units"].size() == 2);
    auto m = s.client.Get("/metrics");
    REQUIRE(m);
    CHECK(m->status == 200);
    CHECK(json::parse(m->body).contains("totals"));
    CHECK(m->get_header_value("Access-Control-Allow-Origin") == "*");
}

TEST_CASE("an injected incident is announced and dispatched within one step")
{
    Served s;
    auto r = s.command("inject_incident", {{"node", "c"}});
    REQUIRE(r);
    CHECK(r->status == 200);
    json reply = json::parse(r->body);
    CHECK(reply["accepted"] == true);
    std::string id = reply["result"]["incident"];

    auto created = s.events(0);
    REQUIRE(created.size() == 1);
    CHECK(created[0]["kind"] == "IncidentCreated");
    CHECK(created[0]["payload"]["incident"] == id);

    REQUIRE(s.command("step_n", {{"n", 1}})->status == 200);
    auto after = s.events(created[0]["seq"].get<std::uint64_t>());
    REQUIRE_FALSE(after.empty());
    CHECK(after[0]["kind"] == "Dispatch");
    CHECK(after[0]["payload"]["incident"] == id);
}

TEST_CASE("override to a busy unit is rejected and leaves the state untouched")
{
    Served s;
    s.command("inject_incident", {{"node", "c"}, {"id", "X1"}});
    s.command("inject_incident", {{"node", "b"}, {"id", "X2"}});
    s.command("step_n", {{"n", 1}});
    json before = s.state();
    CHECK(before["units"][0]["status"] == "EnRoute");
    CHECK(before["units"][1]["status"] == "EnRoute");

    std::string busy = before["incidents"][0]["ambulance"];
    auto r = s.command("dispatch_override", {{"incident", "X2"}, {"ambulance", busy}});
    REQUIRE(r);
    CHECK(r->status == 409);
    json reply = json::parse(r->body);
    CHECK(reply["accepted"] == false);
    CHECK(reply["reason"].get<std::string>().find("not Free") != std::string::npos);
    CHECK(s.state() == before);
}

TEST_CASE("events resume from a sequence number")
{
    Served s;
    s.command("inject_incident", {{"node", "c"}});
    s.command("step_n", {{"n", 40}});
    auto all = s.events(0);
    REQUIRE(all.size() >= 3);
    for (std::size_t i = 0; i < all.size(); ++i)
        CHECK(all[i]["seq"] == i + 1);

    auto tail = s.events(2);
    REQUIRE(tail.size() == all.size() - 2);
    CHECK(tail.front() == all[2]);

    httplib::Headers h = {{"Last-Event-ID", "1"}};
    auto r = s.client.Get("/events?follow=0", h);
    REQUIRE(r);
    CHECK(r->body.find("id: 1\n") == std::string::npos);
    CHECK(r->body.find("id: 2\n") != std::string::npos);

    auto bad = s.client.Get("/events?follow=0&since=abc");
    REQUIRE(bad);
    CHECK(bad->status == 400);
}

TEST_CASE("commands from one client must carry increasing sequence numbers")
{
    Served s;
    CHECK(s.command("pause", json::object(), "ui", 5)->status == 200);
    auto again = s.command("pause", json::object(), "ui", 5);
    CHECK(again->status == 409);
    CHECK(s.command("pause", json::object(), "ui", 6)->status == 200);
    CHECK(s.command("pause", json::object(), "other", 1)->status == 200);
}

TEST_CASE("malformed and unknown commands")
{
    Served s;
    auto r = s.client.Post("/commands", "{oops", "application/json");
    REQUIRE(r);
    CHECK(r->status == 400);
    auto u = s.command("teleport", json::object());
    CHECK(u->status == 409);
    auto n = s.command("step_n", {{"n", 0}});
    CHECK(n->status == 409);
}

TEST_CASE("a running service advances the clock by itself")
{
    ServiceOptions o;
    o.autostart = true;
    o.real_time_factor = 200.0;
    Served s(o);
    s.command("inject_incident", {{"node", "c"}});
    auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(5);
    bool dispatched = false;
    while (!dispatched && std::chrono::steady_clock::now() < deadline) {
        for (const json& e : s.events(0))
            dispatched = dispatched || e["kind"] == "Dispatch";
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }
    CHECK(dispatched);
    CHECK(s.state()["running"] == true);
}

TEST_CASE("loading a scenario keeps event numbering monotonic")
{
    Served s;
    s.command("inject_incident", {{"node", "c"}});
    s.command("step_n", {{"n", 2}});
    std::uint64_t before = s.service.last_seq();
    REQUIRE(before > 0);
    auto r = s.command("load", {{"scenario", fixture::triangle_doc()}});
    CHECK(r->status == 200);
    CHECK(s.state()["t_s"] == 0.0);
    s.command("inject_incident", {{"node", "b"}});
    auto fresh = s.events(before);
    REQUIRE(fresh.size() == 1);
    CHECK(fresh[0]["seq"] == before + 1);

    auto bad = s.command("load", {{"scenario", {{"schema_version", 1}}}});
    CHECK(bad->status == 409);
}
