#include "ristwin/service.hpp"

#include <atomic>
#include <boost/asio.hpp>
#include <chrono>
#include <deque>
#include <limits>
#include <thread>

namespace ristwin {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxLineBytes = 1 << 20;
constexpr int kMaxSliceCells = 256 * 256;
constexpr double kBoundaryEpsilon = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

json db_json(double v) { return std::isfinite(v) ? json(v) : json(-1000.0); }
json vec_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

double required_number(const json& payload, const char* key) {
    if (!payload.contains(key)) throw DecodeError(std::string("payload.") + key + " required");
    const json& v = payload.at(key);
    if (!v.is_number()) throw DecodeError(std::string("payload.") + key + " must be a number");
    const double d = v.get<double>();
    if (!std::isfinite(d)) throw DecodeError(std::string("payload.") + key + " must be finite");
    return d;
}

template <class T>
T optional_value(const json& payload, const char* key, T fallback) {
    if (!payload.contains(key)) return fallback;
    const json& v = payload.at(key);
    if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) throw DecodeError(std::string("payload.") + key + " must be a string");
    } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) throw DecodeError(std::string("payload.") + key + " must be an integer");
    } else {
        if (!v.is_number()) throw DecodeError(std::string("payload.") + key + " must be a number");
    }
    return v.get<T>();
}

ProtocolMessage event_message(const TrackingEvent& e) {
    return std::visit(
        Overloaded{
            [](const event::PowerSample& ev) {
                return ProtocolMessage{"rssi_sample", "", 0,
                                       {{"t_ms", ev.t_ms}, {"p_r_db", db_json(ev.p_r_db)}, {"b_id", ev.b_id}}};
            },
            [](const event::BelowThreshold& ev) { return ProtocolMessage{"below_threshold", "", 0, {{"t_ms", ev.t_ms}}}; },
            [](const event::ScanRequested& ev) { return ProtocolMessage{"scan_requested", "", 0, {{"t_ms", ev.t_ms}}}; },
            [](const event::ScanStarted& ev) { return ProtocolMessage{"scan_started", "", 0, {{"t_ms", ev.t_ms}}}; },
            [](const event::SlotMeasured& ev) {
                return ProtocolMessage{"slot_measured", "", 0,
                                       {{"t_ms", ev.t_ms}, {"b_id", ev.b_id}, {"u_r_db", db_json(ev.u_r_db)}}};
            },
            [](const event::BeamSelected& ev) {
                return ProtocolMessage{"beam_selected", "", 0,
                                       {{"t_ms", ev.t_ms}, {"b_max", ev.b_max}, {"p_r_db", db_json(ev.p_r_db)}}};
            },
        },
        e);
}

class Emitter {
public:
    explicit Emitter(SessionState& s) : s_(s) {}

    void emit(ProtocolMessage m) {
        m.session = s_.session_id;
        m.seq = ++s_.server_seq;
        out_.push_back(std::move(m));
    }
    void emit(std::string type, json payload) { emit(ProtocolMessage{std::move(type), "", 0, std::move(payload)}); }

    std::vector<ProtocolMessage> take() { return std::move(out_); }

private:
    SessionState& s_;
    std::vector<ProtocolMessage> out_;
};

const TrackingSetup& require_setup(const SessionState& s) {
    if (!s.scenario || !s.setup) throw ConfigError("no scenario loaded");
    return *s.setup;
}

void apply_mode(SessionState& s, SessionMode mode, double t_ms) {
    const TrackingSetup& setup = require_setup(s);
    int active = s.engine ? s.engine->active_b_id() : setup.config.initial_b_id;
    if (mode == SessionMode::Tracking) {
        if (s.mode == SessionMode::ManualCodebook && s.manual_codebook && s.manual_codebook->b_id) {
            active = *s.manual_codebook->b_id;
        }
        s.engine.emplace(s.setup, s.trajectory, t_ms);
        s.engine->force_beam(active);
    } else if (mode == SessionMode::ManualCodebook) {
        if (!s.manual_codebook) s.manual_codebook = setup.codebooks.at(static_cast<std::size_t>(active));
    } else {
        s.schedule = std::make_shared<const CodingSchedule>(
            rotating_schedule(s.vortex, setup.geometry, setup.cell, setup.refresh_latency_ms));
        s.vortex_step = -1;
    }
    s.mode = mode;
    s.mode_started_ms = t_ms;
    s.next_sample_ms = t_ms;
}

int vortex_step_at(const SessionState& s, double t_ms) {
    const double dwell_ms = s.schedule->dwell_s() * 1e3;
    const auto k = static_cast<long long>(std::floor((t_ms - s.mode_started_ms) / dwell_ms + kBoundaryEpsilon));
    return static_cast<int>(k % s.schedule->steps());
}

// Runs the active mode through t_end (inclusive).
void advance_mode(SessionState& s, double t_end, Emitter& out) {
    const TrackingSetup& setup = *s.setup;
    switch (s.mode) {
        case SessionMode::Tracking: {
            for (const auto& e : s.engine->advance_to(t_end)) out.emit(event_message(e));
            s.last_rssi_db = s.engine->last_power_db();
            break;
        }
        case SessionMode::ManualCodebook: {
            const ReflectionPattern pattern = reflection_pattern(*s.manual_codebook, setup.cell);
            while (s.next_sample_ms <= t_end) {
                const double t = s.next_sample_ms;
                const double p =
                    power_db(field_at(s.trajectory.position_at(t), pattern, setup.tx, setup.geometry)) +
                    setup.config.reference_db;
                s.last_rssi_db = p;
                json b_id = s.manual_codebook->b_id ? json(*s.manual_codebook->b_id) : json(nullptr);
                out.emit("rssi_sample", {{"t_ms", t}, {"p_r_db", db_json(p)}, {"b_id", b_id}});
                s.next_sample_ms = t + setup.monitor_interval();
            }
            break;
        }
        case SessionMode::Vortex: {
            while (s.next_sample_ms <= t_end) {
                const double t = s.next_sample_ms;
                const int step = vortex_step_at(s, t);
                if (step != s.vortex_step) {
                    s.vortex_step = step;
                    out.emit("vortex_step", {{"t_ms", t}, {"step", step}});
                }
                const auto& pattern = s.schedule->patterns[static_cast<std::size_t>(step)];
                const double p = power_db(field_at(s.trajectory.position_at(t), pattern, setup.tx, setup.geometry)) +
                                 setup.config.reference_db;
                s.last_rssi_db = p;
                out.emit("rssi_sample", {{"t_ms", t}, {"p_r_db", db_json(p)}, {"b_id", nullptr}});
                s.next_sample_ms = t + setup.monitor_interval();
            }
            break;
        }
    }
}

void handle_body(SessionState& s, const ProtocolMessage& msg, Emitter& out) {
    const json& p = msg.payload;
    const json ack{{"in_reply_to", msg.seq}, {"request", msg.type}};

    if (msg.type == "hello") {
        const auto protocol = optional_value<std::string>(p, "protocol", "");
        if (protocol != kProtocolVersion) {
            throw DecodeError("protocol mismatch: client '" + protocol + "', server '" + kProtocolVersion + "'");
        }
        s.greeted = true;
        json a = ack;
        a["session"] = s.session_id;
        a["protocol"] = kProtocolVersion;
        out.emit("ack", a);
        out.emit("state_snapshot", s.snapshot());
    } else if (msg.type == "load_scenario") {
        ScenarioFile scenario;
        if (p.contains("scenario") && p.at("scenario").is_object()) {
            scenario = parse_scenario(p.at("scenario").dump());
        } else if (p.contains("text") && p.at("text").is_string()) {
            scenario = parse_scenario(p.at("text").get<std::string>());
        } else {
            throw DecodeError("payload.scenario (object) or payload.text (string) required");
        }
        const bool was_running = s.running;
        s.install(std::move(scenario));
        s.running = was_running;
        out.emit("ack", ack);
        out.emit("state_snapshot", s.snapshot());
    } else if (msg.type == "set_user_position") {
        const Vec3 pos{required_number(p, "x"), required_number(p, "y"), required_number(p, "z")};
        if (!(pos.z > 0.0)) throw GeometryError("payload.z must be > 0");
        require_setup(s);
        s.trajectory = s.trajectory.with_jump(s.clock_ms, pos);
        if (s.engine) s.engine->set_trajectory(s.trajectory);
        s.user_position = pos;
        out.emit("ack", ack);
    } else if (msg.type == "set_mode") {
        const TrackingSetup& setup = require_setup(s);
        if (!p.contains("mode")) throw DecodeError("payload.mode required");
        const SessionMode mode = parse_session_mode(optional_value<std::string>(p, "mode", ""));
        if (mode == SessionMode::Vortex) {
            VortexSpec v = s.vortex;
            v.mode = optional_value<int>(p, "l", v.mode);
            v.steps = optional_value<int>(p, "Q", v.steps);
            v.period_s = optional_value<double>(p, "T", v.period_s);
            // validated now so a bad spec is rejected before the switch
            (void)rotating_schedule(v, setup.geometry, setup.cell, setup.refresh_latency_ms);
            s.vortex = v;
        }
        const double slot = setup.timeline.slot_ms;
        const double boundary = std::ceil(s.clock_ms / slot - kBoundaryEpsilon) * slot;
        json a = ack;
        a["effective_ms"] = std::max(boundary, s.clock_ms);
        if (boundary <= s.clock_ms) {
            apply_mode(s, mode, s.clock_ms);
            s.pending_mode.reset();
        } else {
            s.pending_mode = std::make_pair(mode, boundary);
        }
        out.emit("ack", a);
    } else if (msg.type == "set_codebook") {
        const TrackingSetup& setup = require_setup(s);
        const SessionMode effective = s.pending_mode ? s.pending_mode->first : s.mode;
        if (effective == SessionMode::Vortex) throw ConfigError("set_codebook is not available in vortex mode");
        if (p.contains("b_id")) {
            const int b = optional_value<int>(p, "b_id", 0);
            if (b < 0 || b >= setup.region_count()) {
                throw IndexError("payload.b_id " + std::to_string(b) + " is outside [0, " +
                                 std::to_string(setup.region_count()) + ")");
            }
            if (s.mode == SessionMode::Tracking && s.engine) s.engine->force_beam(b);
            s.manual_codebook = setup.codebooks[static_cast<std::size_t>(b)];
        } else if (p.contains("digits")) {
            if (effective != SessionMode::ManualCodebook) {
                throw ConfigError("digit grids require manual_codebook mode");
            }
            Codebook cb = parse_digit_grid(optional_value<std::string>(p, "digits", ""));
            if (!cb.fits(setup.geometry)) throw ConfigError("payload.digits does not match the panel dimensions");
            s.manual_codebook = std::move(cb);
        } else {
            throw DecodeError("payload.b_id or payload.digits required");
        }
        out.emit("ack", ack);
    } else if (msg.type == "set_speed") {
        const double speed = required_number(p, "speed");
        if (!(speed > 0.0)) throw DecodeError("payload.speed must be > 0");
        s.speed = speed;
        out.emit("ack", ack);
    } else if (msg.type == "pause") {
        s.running = false;
        out.emit("ack", ack);
    } else if (msg.type == "resume") {
        require_setup(s);
        s.running = true;
        out.emit("ack", ack);
    } else if (msg.type == "get_field_slice") {
        const TrackingSetup& setup = require_setup(s);
        const auto& d = s.scenario->fieldmap;
        const SlicePlane plane = parse_plane(optional_value<std::string>(p, "plane", plane_name(d.plane)));
        const int nu = optional_value<int>(p, "nu", d.nu);
        const int nv = optional_value<int>(p, "nv", d.nv);
        if (static_cast<long long>(nu) * nv > kMaxSliceCells) throw ConfigError("payload: nu x nv exceeds 65536");
        const auto cb = s.current_codebook();
        const FieldSlice slice = field_slice(
            plane, optional_value<double>(p, "fixed", d.fixed), optional_value<double>(p, "u_min", d.u_min),
            optional_value<double>(p, "u_max", d.u_max), optional_value<double>(p, "v_min", d.v_min),
            optional_value<double>(p, "v_max", d.v_max), nu, nv, reflection_pattern(*cb, setup.cell), setup.tx,
            setup.geometry);
        json body = slice_to_json(slice);
        body["t_ms"] = s.clock_ms;
        body["b_id"] = cb->b_id ? json(*cb->b_id) : json(nullptr);
        body["mode"] = session_mode_name(s.mode);
        out.emit("ack", ack);
        out.emit("field_slice", std::move(body));
    } else if (msg.type == "get_spectrum") {
        const TrackingSetup& setup = require_setup(s);
        const auto& dop = s.scenario->doppler;
        const double max_hz = optional_value<double>(p, "max_hz", 64.0);
        const CodingSchedule schedule = rotating_schedule(s.vortex, setup.geometry, setup.cell, setup.refresh_latency_ms);
        const Spectrum spectrum =
            spectrum_of(synthesize_rx(schedule, dop.receiver, setup.tx, setup.geometry, dop.synthesis), dop.window);
        json f = json::array();
        json mag = json::array();
        for (std::size_t i = 0; i < spectrum.size(); ++i) {
            if (std::abs(spectrum.frequency_hz[i]) > max_hz) continue;
            f.push_back(spectrum.frequency_hz[i]);
            mag.push_back(db_json(power_db(spectrum.magnitude[i])));
        }
        out.emit("ack", ack);
        out.emit("spectrum", {{"offset_hz", dominant_offset(spectrum)},
                              {"expected_hz", s.vortex.mode / s.vortex.period_s},
                              {"resolution_hz", spectrum.resolution_hz},
                              {"f_hz", std::move(f)},
                              {"magnitude_db", std::move(mag)}});
    } else {
        throw DecodeError("unknown message type '" + msg.type + "'");
    }
}

}  // namespace

json ProtocolMessage::to_json() const {
    return {{"type", type}, {"session", session}, {"seq", seq}, {"payload", payload}};
}

std::string ProtocolMessage::to_line() const { return to_json().dump() + "\n"; }

ProtocolMessage parse_message(std::string_view line) {
    json doc;
    try {
        doc = json::parse(line);
    } catch (const json::parse_error&) {
        throw DecodeError("malformed JSON");
    }
    if (!doc.is_object()) throw DecodeError("message must be a JSON object");
    for (const auto& [key, value] : doc.items()) {
        if (key != "type" && key != "session" && key != "seq" && key != "payload") {
            throw DecodeError("unexpected field '" + key + "'");
        }
    }
    ProtocolMessage m;
    if (!doc.contains("type") || !doc["type"].is_string()) throw DecodeError("type must be a string");
    if (!doc.contains("seq") || !doc["seq"].is_number_integer()) throw DecodeError("seq must be an integer");
    m.type = doc["type"].get<std::string>();
    m.seq = doc["seq"].get<std::int64_t>();
    if (doc.contains("session")) {
        if (!doc["session"].is_string()) throw DecodeError("session must be a string");
        m.session = doc["session"].get<std::string>();
    }
    if (doc.contains("payload")) {
        if (!doc["payload"].is_object()) throw DecodeError("payload must be an object");
        m.payload = doc["payload"];
    }
    return m;
}

std::string session_mode_name(SessionMode mode) {
    switch (mode) {
        case SessionMode::Tracking: return "tracking";
        case SessionMode::ManualCodebook: return "manual_codebook";
        case SessionMode::Vortex: return "vortex";
    }
    return "tracking";
}

SessionMode parse_session_mode(std::string_view name) {
    if (name == "tracking") return SessionMode::Tracking;
    if (name == "manual_codebook") return SessionMode::ManualCodebook;
    if (name == "vortex") return SessionMode::Vortex;
    throw DecodeError("payload.mode must be tracking, manual_codebook or vortex");
}

void SessionState::install(ScenarioFile sc) {
    setup = std::make_shared<const TrackingSetup>(sc.tracking_setup());
    trajectory = sc.trajectory();
    clock_ms = trajectory.start_ms();
    engine.emplace(setup, trajectory, clock_ms);
    mode = SessionMode::Tracking;
    pending_mode.reset();
    user_position = trajectory.position_at(clock_ms);
    last_rssi_db.reset();
    manual_codebook.reset();
    vortex = sc.vortex;
    schedule.reset();
    vortex_step = -1;
    mode_started_ms = clock_ms;
    next_sample_ms = clock_ms;
    running = false;
    scenario = std::move(sc);
}

std::optional<Codebook> SessionState::current_codebook() const {
    if (!setup) return std::nullopt;
    switch (mode) {
        case SessionMode::Tracking:
            return setup->codebooks.at(static_cast<std::size_t>(engine ? engine->active_b_id() : 0));
        case SessionMode::ManualCodebook: return manual_codebook;
        case SessionMode::Vortex:
            if (schedule && !schedule->codebooks.empty()) {
                return schedule->codebooks[static_cast<std::size_t>(std::max(vortex_step, 0))];
            }
            return std::nullopt;
    }
    return std::nullopt;
}

json SessionState::snapshot() const {
    json out{{"session", session_id},
             {"protocol", kProtocolVersion},
             {"scenario_loaded", scenario.has_value()},
             {"scenario_hash", scenario ? json(scenario_hash(*scenario)) : json(nullptr)},
             {"clock_ms", clock_ms},
             {"mode", session_mode_name(mode)},
             {"status", running ? "running" : "paused"},
             {"speed", speed},
             {"user_position", vec_json(user_position)},
             {"last_rssi_db", last_rssi_db ? db_json(*last_rssi_db) : json(nullptr)},
             {"b_id", nullptr},
             {"scanning", engine && mode == SessionMode::Tracking && engine->scanning()},
             {"pending_mode", nullptr}};
    if (const auto cb = current_codebook(); cb && cb->b_id) out["b_id"] = *cb->b_id;
    if (mode == SessionMode::Vortex) {
        out["vortex"] = {{"l", vortex.mode}, {"Q", vortex.steps}, {"T", vortex.period_s}, {"step", vortex_step}};
    }
    if (pending_mode) {
        out["pending_mode"] = {{"mode", session_mode_name(pending_mode->first)}, {"effective_ms", pending_mode->second}};
    }
    if (setup) out["regions"] = setup->region_count();
    return out;
}

Transition handle_message(const SessionState& in, const ProtocolMessage& msg) {
    SessionState s = in;
    Emitter out(s);
    auto reject = [&](const std::string& reason) -> Transition {
        SessionState unchanged = in;
        Emitter err(unchanged);
        if (msg.seq > in.last_client_seq) unchanged.last_client_seq = msg.seq;
        err.emit("error", {{"in_reply_to", msg.seq}, {"request", msg.type}, {"reason", reason}});
        return {std::move(unchanged), err.take()};
    };
    if (msg.seq <= in.last_client_seq) {
        SessionState unchanged = in;
        Emitter err(unchanged);
        err.emit("error", {{"in_reply_to", msg.seq},
                           {"request", msg.type},
                           {"reason", "seq " + std::to_string(msg.seq) + " is not greater than " +
                                          std::to_string(in.last_client_seq)}});
        return {std::move(unchanged), err.take()};
    }
    if (msg.type != "hello") {
        if (!in.greeted) return reject("hello required before " + msg.type);
        if (msg.session != in.session_id) return reject("unknown session '" + msg.session + "'");
    }
    s.last_client_seq = msg.seq;
    try {
        handle_body(s, msg, out);
    } catch (const Error& e) {
        return reject(e.what());
    } catch (const nlohmann::json::exception& e) {
        return reject(e.what());
    }
    return {std::move(s), out.take()};
}

std::optional<TrackingEvent> message_to_event(const ProtocolMessage& m) {
    const json& p = m.payload;
    auto db = [&](const char* key) { return p.at(key).get<double>(); };
    if (m.type == "rssi_sample" && p.at("b_id").is_number_integer()) {
        return event::PowerSample{db("t_ms"), db("p_r_db"), p.at("b_id").get<int>()};
    }
    if (m.type == "below_threshold") return event::BelowThreshold{db("t_ms")};
    if (m.type == "scan_requested") return event::ScanRequested{db("t_ms")};
    if (m.type == "scan_started") return event::ScanStarted{db("t_ms")};
    if (m.type == "slot_measured") return event::SlotMeasured{db("t_ms"), p.at("b_id").get<int>(), db("u_r_db")};
    if (m.type == "beam_selected") return event::BeamSelected{db("t_ms"), p.at("b_max").get<int>(), db("p_r_db")};
    return std::nullopt;
}

Transition tick(const SessionState& in, double wall_ms) {
    SessionState s = in;
    Emitter out(s);
    if (!s.running || !s.setup || !(wall_ms > 0.0)) return {std::move(s), {}};
    const double target = s.clock_ms + wall_ms * s.speed;
    while (true) {
        const bool switching = s.pending_mode && s.pending_mode->second <= target;
        // actions at the boundary itself belong to the new mode
        const double until =
            switching ? std::nextafter(s.pending_mode->second, -std::numeric_limits<double>::infinity()) : target;
        advance_mode(s, until, out);
        if (!switching) break;
        const auto [mode, at] = *s.pending_mode;
        s.pending_mode.reset();
        s.clock_ms = at;
        apply_mode(s, mode, at);
    }
    s.clock_ms = target;
    return {std::move(s), out.take()};
}

// ---------------------------------------------------------------------------
// Transport

namespace asio = boost::asio;
using asio::ip::tcp;

namespace {

class Connection : public std::enable_shared_from_this<Connection> {
public:
    Connection(tcp::socket socket, std::string session_id, const ServerOptions& options)
        : socket_(std::move(socket)),
          timer_(socket_.get_executor()),
          buffer_(kMaxLineBytes),
          state_(std::move(session_id)),
          tick_ms_(options.tick_ms) {
        if (options.scenario) state_.install(*options.scenario);
    }

    void start() {
        last_tick_ = std::chrono::steady_clock::now();
        read();
        schedule_tick();
    }

private:
    void read() {
        asio::async_read_until(socket_, buffer_, '\n', [self = shared_from_this()](auto ec, std::size_t n) {
            if (ec) {
                if (ec == asio::error::not_found) self->send_error("line exceeds 1 MiB");
                self->close();
                return;
            }
            std::string line(asio::buffers_begin(self->buffer_.data()),
                             asio::buffers_begin(self->buffer_.data()) + static_cast<std::ptrdiff_t>(n));
            self->buffer_.consume(n);
            while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.pop_back();
            if (!line.empty()) self->dispatch(line);
            self->read();
        });
    }

    void dispatch(const std::string& line) {
        ProtocolMessage msg;
        try {
            msg = parse_message(line);
        } catch (const DecodeError& e) {
            send_error(e.what());
            return;
        }
        auto [next, replies] = handle_message(state_, msg);
        state_ = std::move(next);
        for (const auto& r : replies) send(r.to_line());
    }

    void send_error(const std::string& reason) {
        ProtocolMessage err{"error", state_.session_id, ++state_.server_seq, {{"reason", reason}}};
        send(err.to_line());
    }

    void schedule_tick() {
        timer_.expires_after(std::chrono::microseconds(static_cast<long long>(tick_ms_ * 1e3)));
        timer_.async_wait([self = shared_from_this()](auto ec) {
            if (ec || !self->socket_.is_open()) return;
            const auto now = std::chrono::steady_clock::now();
            const double wall_ms = std::chrono::duration<double, std::milli>(now - self->last_tick_).count();
            self->last_tick_ = now;
            auto [next, events] = tick(self->state_, wall_ms);
            self->state_ = std::move(next);
            for (const auto& e : events) self->send(e.to_line());
            self->schedule_tick();
        });
    }

    void send(std::string line) {
        outbox_.push_back(std::move(line));
        if (outbox_.size() == 1) write();
    }

    void write() {
        asio::async_write(socket_, asio::buffer(outbox_.front()), [self = shared_from_this()](auto ec, std::size_t) {
            if (ec) {
                self->close();
                return;
            }
            self->outbox_.pop_front();
            if (!self->outbox_.empty()) self->write();
        });
    }

    void close() {
        boost::system::error_code ignored;
        timer_.cancel();
        socket_.shutdown(tcp::socket::shutdown_both, ignored);
        socket_.close(ignored);
    }

    tcp::socket socket_;
    asio::steady_timer timer_;
    asio::streambuf buffer_;
    std::deque<std::string> outbox_;
    SessionState state_;
    double tick_ms_;
    std::chrono::steady_clock::time_point last_tick_;
};

}  // namespace

struct SessionServer::Impl {
    ServerOptions options;
    asio::io_context io;
    tcp::acceptor acceptor{io};
    std::optional<asio::signal_set> signals;
    std::thread thread;
    std::atomic<int> next_session{1};

    void accept() {
        acceptor.async_accept([this](boost::system::error_code ec, tcp::socket socket) {
            if (ec) return;
            const std::string id = "s" + std::to_string(next_session++);
            std::make_shared<Connection>(std::move(socket), id, options)->start();
            accept();
        });
    }
};

SessionServer::SessionServer(ServerOptions options) : impl_(std::make_unique<Impl>()) {
    impl_->options = std::move(options);
}

SessionServer::~SessionServer() { stop(); }

std::uint16_t SessionServer::start() {
    tcp::endpoint endpoint(asio::ip::make_address(impl_->options.address), impl_->options.port);
    impl_->acceptor.open(endpoint.protocol());
    impl_->acceptor.set_option(tcp::acceptor::reuse_address(true));
    impl_->acceptor.bind(endpoint);
    impl_->acceptor.listen();
    impl_->accept();
    if (impl_->options.handle_signals) {
        impl_->signals.emplace(impl_->io, SIGINT, SIGTERM);
        impl_->signals->async_wait([this](auto, int) { impl_->io.stop(); });
    }
    impl_->thread = std::thread([this] { impl_->io.run(); });
    return impl_->acceptor.local_endpoint().port();
}

void SessionServer::stop() {
    if (!impl_) return;
    impl_->io.stop();
    if (impl_->thread.joinable()) impl_->thread.join();
}

void SessionServer::wait() {
    if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace ristwin
