#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "ristwin/scenario.hpp"

namespace ristwin {

inline constexpr const char* kProtocolVersion = "ristwin/1";

// One line on the wire: {"type", "session", "seq", "payload"}.
struct ProtocolMessage {
    std::string type;
    std::string session;
    std::int64_t seq = 0;
    nlohmann::json payload = nlohmann::json::object();

    nlohmann::json to_json() const;
    std::string to_line() const;  // compact JSON plus '\n'
};

// Throws DecodeError with the reason on malformed input.
ProtocolMessage parse_message(std::string_view line);

enum class SessionMode { Tracking, ManualCodebook, Vortex };

std::string session_mode_name(SessionMode mode);
SessionMode parse_session_mode(std::string_view name);

// Everything a session owns. Copyable; handle_message and tick never
// mutate their input.
struct SessionState {
    std::string session_id;
    std::optional<ScenarioFile> scenario;
    std::shared_ptr<const TrackingSetup> setup;
    std::optional<TrackingEngine> engine;

    double clock_ms = 0.0;
    bool running = false;
    double speed = 0.01;  // simulated ms per wall ms
    SessionMode mode = SessionMode::Tracking;
    std::optional<std::pair<SessionMode, double>> pending_mode;  // mode, effective time

    Vec3 user_position{0.0, 0.0, 1.0};
    UserTrajectory trajectory = UserTrajectory::stationary({0.0, 0.0, 1.0});
    std::optional<double> last_rssi_db;

    std::optional<Codebook> manual_codebook;
    VortexSpec vortex;
    std::shared_ptr<const CodingSchedule> schedule;
    double mode_started_ms = 0.0;
    double next_sample_ms = 0.0;  // manual / vortex sampling cadence
    int vortex_step = -1;

    std::int64_t last_client_seq = 0;
    std::int64_t server_seq = 0;
    bool greeted = false;

    explicit SessionState(std::string id) : session_id(std::move(id)) {}

    // Resets the simulation to the scenario's start in tracking mode.
    void install(ScenarioFile scenario);

    // Codebook the panel currently shows.
    std::optional<Codebook> current_codebook() const;
    nlohmann::json snapshot() const;
};

using Transition = std::pair<SessionState, std::vector<ProtocolMessage>>;

// Exactly one ack or error per client message, followed by any data replies.
Transition handle_message(const SessionState& state, const ProtocolMessage& message);

// Inverse of the event-to-message mapping used by tick; nullopt for
// messages that are not tracking events.
std::optional<TrackingEvent> message_to_event(const ProtocolMessage& message);

// Advances simulated time by wall_ms × speed; events come out in timeline order.
Transition tick(const SessionState& state, double wall_ms);

struct ServerOptions {
    std::string address = "127.0.0.1";
    std::uint16_t port = 8765;  // 0 picks a free port
    double tick_ms = 20.0;
    std::optional<ScenarioFile> scenario;  // preloaded into every new session
    bool handle_signals = false;           // SIGINT/SIGTERM stop the server
};

// Newline-delimited JSON over TCP, one session per connection.
class SessionServer {
public:
    explicit SessionServer(ServerOptions options);
    ~SessionServer();
    SessionServer(const SessionServer&) = delete;
    SessionServer& operator=(const SessionServer&) = delete;

    // Binds and starts the I/O thread; returns the bound port.
    std::uint16_t start();
    void stop();
    // Blocks until stop() is called from another thread or a signal handler.
    void wait();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace ristwin
