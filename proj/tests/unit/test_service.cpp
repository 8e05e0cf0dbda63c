#include <boost/asio.hpp>

#include "doctest.h"
#include "ristwin/service.hpp"

using namespace ristwin;
using nlohmann::json;

namespace {

struct Client {
    SessionState state{"s1"};
    std::int64_t seq = 0;
    std::vector<ProtocolMessage> log;

    std::vector<ProtocolMessage> send(const std::string& type, json payload = json::object()) {
        auto [next, replies] = handle_message(state, ProtocolMessage{type, state.session_id, ++seq, std::move(payload)});
        state = std::move(next);
        log.insert(log.end(), replies.begin(), replies.end());
        return replies;
    }
    std::vector<ProtocolMessage> advance(double wall_ms) {
        auto [next, events] = tick(state, wall_ms);
        state = std::move(next);
        log.insert(log.end(), events.begin(), events.end());
        return events;
    }
};

const json kScenario = {{"tracking", {{"threshold_db", -95.0}}},
                        {"region_grid", {{"azimuth_count", 4}, {"elevation_count", 2}, {"range_count", 1}}}};

Client ready() {
    Client c;
    c.send("hello", {{"protocol", kProtocolVersion}});
    c.send("load_scenario", {{"scenario", kScenario}});
    c.send("set_speed", {{"speed", 1.0}});
    c.send("resume");
    return c;
}

std::vector<TrackingEvent> events_of(const std::vector<ProtocolMessage>& log) {
    std::vector<TrackingEvent> out;
    for (const auto& m : log) {
        if (auto e = message_to_event(m)) out.push_back(*e);
    }
    return out;
}

}  // namespace

TEST_CASE("message decoding") {
    const auto m = parse_message(R"({"type":"pause","session":"s1","seq":3,"payload":{}})");
    CHECK(m.type == "pause");
    CHECK(m.seq == 3);
    CHECK(parse_message(m.to_line()).to_json() == m.to_json());
    CHECK_THROWS_WITH_AS(parse_message("{"), doctest::Contains("malformed"), DecodeError);
    CHECK_THROWS_WITH_AS(parse_message(R"({"type":"x","seq":1,"extra":1})"), doctest::Contains("unexpected field"),
                         DecodeError);
    CHECK_THROWS_AS(parse_message(R"({"type":1,"seq":1})"), DecodeError);
    CHECK_THROWS_AS(parse_message(R"({"type":"x","seq":"1"})"), DecodeError);
    CHECK_THROWS_AS(parse_message(R"({"type":"x","seq":1,"payload":[]})"), DecodeError);
    CHECK_THROWS_AS(parse_message("[]"), DecodeError);
}

TEST_CASE("hello is required and checks the protocol") {
    Client c;
    auto r = c.send("pause");
    REQUIRE(r.size() == 1);
    CHECK(r[0].type == "error");
    CHECK(r[0].payload["reason"].get<std::string>().find("hello required") != std::string::npos);
    r = c.send("hello", {{"protocol", "ristwin/0"}});
    CHECK(r[0].type == "error");
    r = c.send("hello", {{"protocol", kProtocolVersion}});
    REQUIRE(r.size() == 2);
    CHECK(r[0].type == "ack");
    CHECK(r[0].payload["in_reply_to"] == c.seq);
    CHECK(r[1].type == "state_snapshot");
    CHECK(r[1].payload["scenario_loaded"] == false);
}

TEST_CASE("every client message gets exactly one ack or error first") {
    Client c = ready();
    const std::vector<std::pair<std::string, json>> msgs{
        {"set_user_position", {{"x", 0.1}, {"y", 0.0}, {"z", 1.0}}},
        {"set_user_position", {{"x", 0.1}, {"y", 0.0}}},
        {"set_mode", {{"mode", "manual_codebook"}}},
        {"set_codebook", {{"b_id", 99}}},
        {"set_codebook", {{"b_id", 2}}},
        {"get_field_slice", {{"nu", 8}, {"nv", 8}}},
        {"get_field_slice", {{"nu", 1000}, {"nv", 1000}}},
        {"bogus", json::object()},
        {"set_speed", {{"speed", -1}}},
        {"pause", json::object()},
    };
    for (const auto& [type, payload] : msgs) {
        CAPTURE(type);
        const auto r = c.send(type, payload);
        REQUIRE_FALSE(r.empty());
        int replies = 0;
        for (const auto& m : r) replies += (m.type == "ack" || m.type == "error");
        CHECK(replies == 1);
        CHECK((r[0].type == "ack" || r[0].type == "error"));
        CHECK(r[0].payload["in_reply_to"] == c.seq);
    }
    CHECK(c.log[c.log.size() - 1].type == "ack");
}

TEST_CASE("specific error reasons") {
    Client c = ready();
    auto r = c.send("set_user_position", {{"x", 0.0}, {"y", 0.0}});
    CHECK(r[0].payload["reason"] == "payload.z required");
    r = c.send("set_user_position", {{"x", 0.0}, {"y", 0.0}, {"z", -1.0}});
    CHECK(r[0].type == "error");
    r = c.send("set_codebook", {{"digits", "0123"}});
    CHECK(r[0].type == "error");
    r = c.send("set_mode", {{"mode", "vortex"}, {"T", 0.001}});
    CHECK(r[0].payload["reason"].get<std::string>().find("refresh latency") != std::string::npos);
    // stale sequence numbers are refused
    auto [next, replies] = handle_message(c.state, ProtocolMessage{"pause", "s1", 1, json::object()});
    CHECK(replies.at(0).type == "error");
    CHECK(next.running);
}

TEST_CASE("handlers leave their input untouched") {
    Client c = ready();
    const SessionState before = c.state;
    const auto snap = before.snapshot();
    (void)handle_message(before, ProtocolMessage{"set_user_position", "s1", 99, {{"x", 0.3}, {"y", 0.1}, {"z", 1.5}}});
    (void)tick(before, 50.0);
    CHECK(before.snapshot() == snap);
    CHECK(before.clock_ms == 0.0);
}

TEST_CASE("live session replays the batch log") {
    Client c = ready();
    c.advance(3.3);
    c.advance(7.1);
    c.send("set_user_position", {{"x", 0.7}, {"y", 0.4}, {"z", 1.8}});
    for (int i = 0; i < 9; ++i) c.advance(2.9);
    c.send("set_user_position", {{"x", -0.6}, {"y", -0.3}, {"z", 1.2}});
    c.advance(25.0);
    const double end = c.state.clock_ms;
    const auto batch = run_tracking(*c.state.setup, c.state.trajectory, end);
    const auto live = events_of(c.log);
    CHECK(events_to_jsonl(live) == events_to_jsonl(batch));
    CHECK(live.size() > 20);
}

TEST_CASE("paused sessions do not advance") {
    Client c = ready();
    c.send("pause");
    CHECK(c.advance(100.0).empty());
    CHECK(c.state.clock_ms == 0.0);
}

TEST_CASE("mode changes take effect on the next slot boundary") {
    Client c = ready();
    c.advance(1.0);
    auto r = c.send("set_mode", {{"mode", "manual_codebook"}});
    CHECK(r[0].payload["effective_ms"].get<double>() == doctest::Approx(1.44));
    CHECK(c.state.pending_mode.has_value());
    c.advance(2.0);
    CHECK(c.state.mode == SessionMode::ManualCodebook);
    CHECK(c.state.mode_started_ms == doctest::Approx(1.44));
    // the boundary sample is taken once, by the new mode
    int at_boundary = 0;
    for (const auto& m : c.log) {
        if (m.type == "rssi_sample" && std::abs(m.payload["t_ms"].get<double>() - 1.44) < 1e-9) ++at_boundary;
    }
    CHECK(at_boundary == 1);
}

TEST_CASE("vortex mode steps through the schedule") {
    Client c = ready();
    auto r = c.send("set_mode", {{"mode", "vortex"}, {"l", 1}, {"Q", 4}, {"T", 0.004}});
    REQUIRE(r[0].type == "ack");
    const auto ev = c.advance(10.0);
    std::vector<int> steps;
    for (const auto& m : ev) {
        if (m.type == "vortex_step") steps.push_back(m.payload["step"].get<int>());
    }
    REQUIRE(steps.size() >= 4);
    CHECK(steps[0] == 0);
    CHECK(steps[1] == 1);
    CHECK(steps[3] == 3);
    CHECK(c.state.snapshot()["vortex"]["Q"] == 4);
    r = c.send("get_spectrum", {{"max_hz", 40}});
    REQUIRE(r.size() == 2);
    CHECK(r[1].type == "spectrum");
    CHECK(r[1].payload["offset_hz"].get<double>() == doctest::Approx(250.0).epsilon(0.01));
}

TEST_CASE("sessions are isolated") {
    Client a = ready();
    Client b = ready();
    b.state.session_id = "s2";
    a.send("set_user_position", {{"x", 0.5}, {"y", 0.2}, {"z", 1.4}});
    a.advance(20.0);
    CHECK(b.state.clock_ms == 0.0);
    CHECK(b.state.user_position.x == 0.0);
    auto r = b.send("pause");
    CHECK(r[0].session == "s2");
    // messages addressed to another session are refused
    auto [next, replies] = handle_message(b.state, ProtocolMessage{"pause", "s1", 100, json::object()});
    CHECK(replies.at(0).type == "error");
}

TEST_CASE("TCP loopback session") {
    ServerOptions opts;
    opts.port = 0;
    opts.tick_ms = 5.0;
    opts.scenario = parse_scenario(kScenario.dump());
    SessionServer server(opts);
    const auto port = server.start();

    namespace asio = boost::asio;
    asio::io_context io;
    asio::ip::tcp::socket sock(io);
    sock.connect({asio::ip::make_address("127.0.0.1"), port});
    auto send = [&](const ProtocolMessage& m) { asio::write(sock, asio::buffer(m.to_line())); };
    asio::streambuf buf;
    auto recv = [&] {
        asio::read_until(sock, buf, '\n');
        std::istream is(&buf);
        std::string line;
        std::getline(is, line);
        return parse_message(line);
    };

    send({"hello", "", 1, {{"protocol", kProtocolVersion}}});
    const auto ack = recv();
    CHECK(ack.type == "ack");
    const std::string session = ack.payload["session"];
    const auto snap = recv();
    CHECK(snap.type == "state_snapshot");
    CHECK(snap.payload["scenario_loaded"] == true);
    CHECK(snap.payload["status"] == "paused");

    asio::write(sock, asio::buffer(std::string("not json\n")));
    CHECK(recv().type == "error");

    send({"set_speed", session, 2, {{"speed", 1.0}}});
    CHECK(recv().type == "ack");
    send({"resume", session, 3, json::object()});
    CHECK(recv().type == "ack");
    bool sample = false;
    for (int i = 0; i < 50 && !sample; ++i) sample = recv().type == "rssi_sample";
    CHECK(sample);
    sock.close();
    server.stop();
}
