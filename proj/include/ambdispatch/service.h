#pragma once

#include "ambdispatch/scenario.h"
#include "ambdispatch/sim_engine.h"

#include <json.hpp>

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <future>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

namespace httplib {
class Server;
}

namespace amb {

/// Envelope for POST /commands.
struct CommandEnvelope {
    std::string kind; // inject_incident | dispatch_override | start | pause | step_n | load
    nlohmann::json payload = nlohmann::json::object();
    std::string client_id;
    std::int64_t seq = 0;

    static CommandEnvelope from_json(const nlohmann::json& doc); // throws ParseError
};

struct CommandReply {
    bool accepted = false;
    std::string reason;
    nlohmann::json result = nlohmann::json::object();

    nlohmann::json to_json() const;
};

struct ServiceOptions {
    std::string host = "127.0.0.1";
    int port = 8080; // 0 picks a free port
    bool autostart = false;
    std::optional<double> real_time_factor; // overrides the scenario config
};

/// Owns one simulation on a dedicated thread. HTTP handlers never touch the
/// world directly: commands are queued and applied between steps, and readers
/// see snapshots published after each step or command.
class DispatchService {
public:
    DispatchService(Scenario scenario, ServiceOptions options);
    ~DispatchService();

    DispatchService(const DispatchService&) = delete;
    DispatchService& operator=(const DispatchService&) = delete;

    /// Binds and starts serving in the background; returns the bound port.
    /// Throws BindError when the address is unavailable.
    int start();
    void stop();
    /// Blocks until stop() is called from another thread.
    void wait();

    CommandReply submit(const CommandEnvelope& command);

    std::string state_json() const;
    std::string metrics_json() const;
    /// Events with seq > after, in order.
    std::vector<std::string> events_after(std::uint64_t after) const;
    /// Waits up to `timeout` for events beyond `after`.
    std::vector<std::string> wait_events_after(std::uint64_t after, std::chrono::milliseconds timeout) const;
    std::uint64_t last_seq() const;

private:
    struct Pending {
        CommandEnvelope command;
        std::promise<CommandReply> reply;
    };

    struct PublishedEvent {
        std::uint64_t seq;
        std::string kind;
        std::string line;
    };

    void sim_loop();
    CommandReply apply(const CommandEnvelope& command);
    void do_step();
    void publish(const std::vector<SimEvent>& events);
    void publish_views();
    void install_routes();

    ServiceOptions options_;
    std::unique_ptr<Simulation> sim_; // sim thread only
    double rate_ = 1.0;
    bool running_ = false;
    std::uint64_t seq_base_ = 0;
    std::map<std::string, std::int64_t> last_client_seq_;

    mutable std::mutex queue_mu_;
    std::condition_variable queue_cv_;
    std::deque<std::shared_ptr<Pending>> queue_;
    std::atomic<bool> stopping_{false};

    mutable std::mutex view_mu_;
    mutable std::condition_variable events_cv_;
    std::shared_ptr<const std::string> state_;
    std::shared_ptr<const std::string> metrics_;
    std::vector<PublishedEvent> events_;

    std::unique_ptr<httplib::Server> server_;
    std::thread http_thread_;
    std::thread sim_thread_;
};

} // namespace amb
