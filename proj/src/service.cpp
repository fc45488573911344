#include "ambdispatch/service.h"

#include "ambdispatch/error.h"

#include <httplib.h>

#include <chrono>

namespace amb {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

constexpr std::int64_t kMaxStepBatch = 100000;

std::string field(const json& payload, const char* key)
{
    auto it = payload.find(key);
    if (it == payload.end() || !it->is_string())
        throw Error(ErrorCode::ValidationError, std::string("payload.") + key + " must be a string");
    return it->get<std::string>();
}

} // namespace

CommandEnvelope CommandEnvelope::from_json(const json& doc)
{
    if (!doc.is_object())
        throw Error(ErrorCode::ParseError, "command must be a JSON object");
    CommandEnvelope c;
    auto kind = doc.find("kind");
    if (kind == doc.end() || !kind->is_string())
        throw Error(ErrorCode::ParseError, "command needs a string 'kind'");
    c.kind = kind->get<std::string>();
    if (auto p = doc.find("payload"); p != doc.end()) {
        if (!p->is_object())
            throw Error(ErrorCode::ParseError, "'payload' must be an object");
        c.payload = *p;
    }
    if (auto id = doc.find("client_id"); id != doc.end()) {
        if (!id->is_string())
            throw Error(ErrorCode::ParseError, "'client_id' must be a string");
        c.client_id = id->get<std::string>();
    }
    if (auto seq = doc.find("seq"); seq != doc.end()) {
        if (!seq->is_number_integer())
            throw Error(ErrorCode::ParseError, "'seq' must be an integer");
        c.seq = seq->get<std::int64_t>();
    }
    return c;
}

json CommandReply::to_json() const
{
    json j = {{"accepted", accepted}, {"result", result}};
    if (!reason.empty())
        j["reason"] = reason;
    return j;
}

DispatchService::DispatchService(Scenario scenario, ServiceOptions options)
    : options_(std::move(options)), sim_(std::make_unique<Simulation>(std::move(scenario)))
{
    rate_ = options_.real_time_factor.value_or(sim_->config().real_time_factor);
    if (!(rate_ > 0.0))
        throw Error(ErrorCode::ValidationError, "real_time_factor must be > 0");
    running_ = options_.autostart;
    publish_views();
}

DispatchService::~DispatchService() { stop(); }

int DispatchService::start()
{
    server_ = std::make_unique<httplib::Server>();
    server_->new_task_queue = [] { return new httplib::ThreadPool(32); };
    install_routes();

    int port = options_.port;
    if (port == 0) {
        port = server_->bind_to_any_port(options_.host);
        if (port < 0)
            throw Error(ErrorCode::BindError, "cannot bind " + options_.host);
    } else if (!server_->bind_to_port(options_.host, port)) {
        throw Error(ErrorCode::BindError, "cannot bind " + options_.host + ":" + std::to_string(port));
    }

    sim_thread_ = std::thread([this] { sim_loop(); });
    http_thread_ = std::thread([this] { server_->listen_after_bind(); });
    server_->wait_until_ready();
    return port;
}

void DispatchService::stop()
{
    {
        std::lock_guard lk(queue_mu_);
        if (stopping_ && !sim_thread_.joinable() && !http_thread_.joinable())
            return;
        stopping_ = true;
    }
    queue_cv_.notify_all();
    events_cv_.notify_all();
    if (server_)
        server_->stop();
    if (http_thread_.joinable())
        http_thread_.join();
    if (sim_thread_.joinable())
        sim_thread_.join();
}

void DispatchService::wait()
{
    if (http_thread_.joinable())
        http_thread_.join();
}

CommandReply DispatchService::submit(const CommandEnvelope& command)
{
    auto pending = std::make_shared<Pending>();
    pending->command = command;
    auto reply = pending->reply.get_future();
    {
        std::lock_guard lk(queue_mu_);
        if (stopping_)
            return {false, "service is stopping", json::object()};
        queue_.push_back(pending);
    }
    queue_cv_.notify_all();
    return reply.get();
}

void DispatchService::sim_loop()
{
    auto interval = std::chrono::duration_cast<Clock::duration>(
        std::chrono::duration<double>(sim_->config().dt_s / rate_));
    auto deadline = Clock::now() + interval;

    std::unique_lock lk(queue_mu_);
    for (;;) {
        auto ready = [this] { return stopping_ || !queue_.empty(); };
        if (running_)
            queue_cv_.wait_until(lk, deadline, ready);
        else
            queue_cv_.wait(lk, ready);
        if (stopping_)
            break;

        while (!queue_.empty()) {
            auto p = queue_.front();
            queue_.pop_front();
            bool was_running = running_;
            lk.unlock();
            CommandReply reply = apply(p->command);
            p->reply.set_value(std::move(reply));
            interval = std::chrono::duration_cast<Clock::duration>(
                std::chrono::duration<double>(sim_->config().dt_s / rate_));
            lk.lock();
            if (running_ && !was_running)
                deadline = Clock::now() + interval;
        }

        if (running_ && Clock::now() >= deadline) {
            lk.unlock();
            do_step();
            lk.lock();
            deadline += interval;
            if (deadline < Clock::now() - 10 * interval)
                deadline = Clock::now();
        }
    }

    for (auto& p : queue_)
        p->reply.set_value({false, "service is stopping", json::object()});
    queue_.clear();
}

void DispatchService::do_step()
{
    publish(sim_->step());
    const SimConfig& cfg = sim_->config();
    if (cfg.duration_s > 0.0 && sim_->finished())
        running_ = false;
    publish_views();
}

CommandReply DispatchService::apply(const CommandEnvelope& command)
{
    CommandReply reply;
    if (!command.client_id.empty()) {
        auto it = last_client_seq_.find(command.client_id);
        if (it != last_client_seq_.end() && command.seq <= it->second) {
            reply.reason = "sequence number " + std::to_string(command.seq) + " is not above " +
                           std::to_string(it->second) + " for client '" + command.client_id + "'";
            return reply;
        }
        last_client_seq_[command.client_id] = command.seq;
    }

    try {
        const json& p = command.payload;
        if (command.kind == "inject_incident") {
            std::optional<std::string> id;
            if (p.contains("id"))
                id = field(p, "id");
            std::size_t before = sim_->events().size();
            std::string name = sim_->inject_incident(field(p, "node"), id);
            publish(std::vector<SimEvent>(sim_->events().begin() + static_cast<std::ptrdiff_t>(before), sim_->events().end()));
            reply.result = {{"incident", name}};
        } else if (command.kind == "dispatch_override") {
            std::size_t before = sim_->events().size();
            sim_->dispatch_override(field(p, "incident"), field(p, "ambulance"));
            publish(std::vector<SimEvent>(sim_->events().begin() + static_cast<std::ptrdiff_t>(before), sim_->events().end()));
        } else if (command.kind == "start") {
            running_ = true;
        } else if (command.kind == "pause") {
            running_ = false;
        } else if (command.kind == "step_n") {
            std::int64_t n = 1;
            if (auto it = p.find("n"); it != p.end()) {
                if (!it->is_number_integer())
                    throw Error(ErrorCode::ValidationError, "payload.n must be an integer");
                n = it->get<std::int64_t>();
            }
            if (n < 1 || n > kMaxStepBatch)
                throw Error(ErrorCode::ValidationError, "payload.n must be in [1, 100000]");
            for (std::int64_t i = 0; i < n; ++i)
                do_step();
            reply.result = {{"t_s", sim_->time()}};
        } else if (command.kind == "load") {
            auto it = p.find("scenario");
            if (it == p.end())
                throw Error(ErrorCode::ValidationError, "payload.scenario is required");
            auto next = std::make_unique<Simulation>(load_scenario(*it));
            seq_base_ = last_seq();
            sim_ = std::move(next);
            rate_ = options_.real_time_factor.value_or(sim_->config().real_time_factor);
            running_ = false;
        } else {
            throw Error(ErrorCode::ValidationError, "unknown command kind '" + command.kind + "'");
        }
        reply.accepted = true;
    } catch (const std::exception& e) {
        reply.accepted = false;
        reply.reason = e.what();
    }
    publish_views();
    return reply;
}

void DispatchService::publish(const std::vector<SimEvent>& events)
{
    if (events.empty())
        return;
    std::vector<PublishedEvent> lines;
    lines.reserve(events.size());
    for (const SimEvent& e : events) {
        SimEvent shifted = e;
        shifted.seq += seq_base_;
        lines.push_back({shifted.seq, to_string(e.kind), event_to_line(shifted)});
    }
    {
        std::lock_guard lk(view_mu_);
        events_.insert(events_.end(), std::make_move_iterator(lines.begin()), std::make_move_iterator(lines.end()));
    }
    events_cv_.notify_all();
}

void DispatchService::publish_views()
{
    json state = sim_->snapshot();
    state["last_seq"] = state["last_seq"].get<std::uint64_t>() + seq_base_;
    state["running"] = running_;
    auto s = std::make_shared<const std::string>(state.dump());
    auto m = std::make_shared<const std::string>(sim_->metrics().dump());
    std::lock_guard lk(view_mu_);
    state_ = std::move(s);
    metrics_ = std::move(m);
}

std::string DispatchService::state_json() const
{
    std::lock_guard lk(view_mu_);
    return *state_;
}

std::string DispatchService::metrics_json() const
{
    std::lock_guard lk(view_mu_);
    return *metrics_;
}

std::uint64_t DispatchService::last_seq() const
{
    std::lock_guard lk(view_mu_);
    return events_.empty() ? seq_base_ : events_.back().seq;
}

std::vector<std::string> DispatchService::events_after(std::uint64_t after) const
{
    std::lock_guard lk(view_mu_);
    std::vector<std::string> out;
    auto it = std::upper_bound(events_.begin(), events_.end(), after,
                               [](std::uint64_t s, const PublishedEvent& e) { return s < e.seq; });
    for (; it != events_.end(); ++it)
        out.push_back(it->line);
    return out;
}

std::vector<std::string> DispatchService::wait_events_after(std::uint64_t after,
                                                            std::chrono::milliseconds timeout) const
{
    std::unique_lock lk(view_mu_);
    events_cv_.wait_for(lk, timeout, [&] {
        return (!events_.empty() && events_.back().seq > after) || stopping_;
    });
    lk.unlock();
    return events_after(after);
}

void DispatchService::install_routes()
{
    auto cors = [](httplib::Response& res) {
        res.set_header("Access-Control-Allow-Origin", "*");
        res.set_header("Access-Control-Allow-Headers", "Content-Type, Last-Event-ID");
    };

    server_->Options(R"(/.*)", [cors](const httplib::Request&, httplib::Response& res) {
        cors(res);
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.status = 204;
    });

    server_->Get("/state", [this, cors](const httplib::Request&, httplib::Response& res) {
        cors(res);
        res.set_content(state_json(), "application/json");
    });

    server_->Get("/metrics", [this, cors](const httplib::Request&, httplib::Response& res) {
        cors(res);
        res.set_content(metrics_json(), "application/json");
    });

    server_->Post("/commands", [this, cors](const httplib::Request& req, httplib::Response& res) {
        cors(res);
        CommandReply reply;
        json doc = json::parse(req.body, nullptr, false);
        try {
            if (doc.is_discarded())
                throw Error(ErrorCode::ParseError, "malformed JSON");
            reply = submit(CommandEnvelope::from_json(doc));
            res.status = reply.accepted ? 200 : 409;
        } catch (const Error& e) {
            reply.accepted = false;
            reply.reason = e.what();
            res.status = 400;
        }
        res.set_content(reply.to_json().dump(), "application/json");
    });

    // Server-sent events. Resume with ?since=k or a Last-Event-ID header;
    // ?follow=0 returns what is available and closes.
    server_->Get("/events", [this, cors](const httplib::Request& req, httplib::Response& res) {
        cors(res);
        std::uint64_t since = 0;
        try {
            if (req.has_param("since"))
                since = std::stoull(req.get_param_value("since"));
            else if (req.has_header("Last-Event-ID"))
                since = std::stoull(req.get_header_value("Last-Event-ID"));
        } catch (const std::exception&) {
            res.status = 400;
            res.set_content(R"({"reason":"since must be a non-negative integer"})", "application/json");
            return;
        }
        bool follow = !(req.has_param("follow") && req.get_param_value("follow") == "0");
        auto cursor = std::make_shared<std::uint64_t>(since);
        res.set_header("Cache-Control", "no-cache");
        res.set_chunked_content_provider(
            "text/event-stream", [this, cursor, follow](std::size_t, httplib::DataSink& sink) {
                auto lines = follow ? wait_events_after(*cursor, std::chrono::milliseconds(250))
                                    : events_after(*cursor);
                for (const std::string& line : lines) {
                    json e = json::parse(line);
                    std::string chunk = "id: " + std::to_string(e["seq"].get<std::uint64_t>()) +
                                        "\nevent: " + e["kind"].get<std::string>() + "\ndata: " + line + "\n\n";
                    if (!sink.write(chunk.data(), chunk.size()))
                        return false;
                    *cursor = e["seq"].get<std::uint64_t>();
                }
                if (!follow || stopping_)
                    sink.done();
                return true;
            });
    });
}

} // namespace amb
