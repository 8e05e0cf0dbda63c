#include <cstdlib>
#include <fstream>

#include "doctest.h"
#include "ristwin/scenario.hpp"

using namespace ristwin;

namespace {

const std::filesystem::path kScenarios = std::filesystem::path(RISTWIN_SOURCE_DIR) / "scenarios";

std::filesystem::path temp_dir(const std::string& tag) {
    auto p = std::filesystem::temp_directory_path() / ("ristwin-test-" + tag + "-" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    return p;
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    return {std::istreambuf_iterator<char>(in), {}};
}

}  // namespace

TEST_CASE("empty document gives the defaults") {
    const auto s = parse_scenario("{}");
    CHECK(s.geometry.rows == 10);
    CHECK(s.tracking.config.threshold_db == -92.0);
    CHECK(s.tracking.timeline.slot_ms == 0.72);
    CHECK(s.refresh_latency_ms() == 0.72);
    CHECK(s.codebook.kind == "spot");
    CHECK(s.panel() == PanelGeometry::standard());
}

TEST_CASE("comments are accepted") {
    const auto s = parse_scenario(R"({
        // line comment
        "geometry": {"rows": 4, /* inline */ "cols": 4},
        "controlplane": {"followers": 4, "units_per_follower": 4}
    })");
    CHECK(s.geometry.rows == 4);
}

TEST_CASE("unknown keys are rejected with a suggestion") {
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"geomtry": {}})"), doctest::Contains("did you mean 'geometry'"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"tracking": {"treshold_db": -90}})"),
                         doctest::Contains("tracking.treshold_db: unknown key (did you mean 'threshold_db'?)"),
                         ConfigError);
    try {
        parse_scenario(R"({"zzzzzz": 1})");
        FAIL("expected an error");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("did you mean") == std::string::npos);
    }
}

TEST_CASE("type errors carry the key path") {
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"geometry": {"rows": "ten"}})"),
                         doctest::Contains("geometry.rows: expected an integer"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"transmitter": {"position": [0, 1]}})"),
                         doctest::Contains("transmitter.position"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"tracking": {"trajectory": [{"t_ms": 0, "position": [0,0,1]}, {"t_ms": "x"}]}})"),
                         doctest::Contains("tracking.trajectory[1].t_ms"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"seed": -1})"), doctest::Contains("seed"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"fieldmap": {"plane": "xw"}})"), doctest::Contains("fieldmap.plane"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario("{"), doctest::Contains("invalid JSON"), ConfigError);
}

TEST_CASE("cross-field checks name both fields") {
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"tracking": {"timeline": {"slot_ms": 0.5}}})"),
                         doctest::Contains("controlplane"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"vortex": {"period_s": 0.001}})"), doctest::Contains("vortex.steps"),
                         ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"codebook": {"kind": "region", "b_id": 99}})"),
                         doctest::Contains("region"), ConfigError);
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"geometry": {"rows": 8}})"), doctest::Contains("controlplane"),
                         ConfigError);
}

TEST_CASE("json round trip preserves the hash") {
    for (const auto& entry : std::filesystem::directory_iterator(kScenarios)) {
        CAPTURE(entry.path().string());
        const auto s = load_scenario(entry.path());
        const auto again = parse_scenario(scenario_to_json(s).dump());
        CHECK(scenario_hash(again) == scenario_hash(s));
        CHECK(scenario_hash(s).size() == 64);
    }
    CHECK(scenario_hash(parse_scenario("{}")) != scenario_hash(parse_scenario(R"({"seed": 2})")));
}

TEST_CASE("load errors are prefixed with the file name") {
    const auto dir = temp_dir("load");
    std::filesystem::create_directories(dir);
    std::ofstream(dir / "bad.json") << R"({"scan": {"samples": 1}})";
    CHECK_THROWS_WITH_AS(load_scenario(dir / "bad.json"), doctest::Contains("bad.json: scan.samples"), ConfigError);
    CHECK_THROWS_AS(load_scenario(dir / "missing.json"), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("schema lists every documented key") {
    const auto schema = scenario_schema();
    CHECK(schema["type"] == "object");
    CHECK(schema["additionalProperties"] == false);
    const auto& props = schema["properties"];
    for (const char* k : {"geometry", "cell", "transmitter", "region_grid", "controlplane", "tracking", "vortex",
                          "doppler", "codebook", "scan", "fieldmap", "output", "seed"}) {
        CAPTURE(k);
        CHECK(props.contains(k));
    }
    CHECK(props["tracking"]["properties"]["mode"]["enum"].size() == 2);
    CHECK(props["tracking"]["properties"]["trajectory"]["type"] == "array");
}

TEST_CASE("shipped schema file matches the generated schema") {
    const auto path = std::filesystem::path(RISTWIN_SOURCE_DIR) / "docs" / "scenario.schema.json";
    REQUIRE(std::filesystem::exists(path));
    CHECK(nlohmann::json::parse(slurp(path)) == scenario_schema());
}

TEST_CASE("selected codebook kinds") {
    auto s = parse_scenario(R"({"codebook": {"kind": "farfield", "azimuth_deg": 30}})");
    nlohmann::json prov;
    const auto cb = s.selected_codebook(&prov);
    CHECK(prov["kind"] == "farfield");
    CHECK(cb.rows() == 10);
    s = parse_scenario(R"({"codebook": {"kind": "region", "b_id": 3}})");
    CHECK(s.selected_codebook().b_id == 3);
    s = parse_scenario(R"({"codebook": {"kind": "vortex", "step": 2}})");
    CHECK(s.selected_codebook() == vortex_codebook(s.vortex, 2, s.panel()));
}

TEST_CASE("run_command writes artifacts and a manifest") {
    const auto dir = temp_dir("run");
    const auto s = load_scenario(kScenarios / "default.json");
    const auto m = run_command("frames", s, dir);
    CHECK(m.command == "frames");
    CHECK(m.scenario_hash == scenario_hash(s));
    CHECK(m.tool_version == tool_version());
    REQUIRE(m.artifacts.size() == 2);
    for (const auto& a : m.artifacts) {
        CHECK(std::filesystem::file_size(dir / a.path) == a.bytes);
        CHECK(sha256_hex(slurp(dir / a.path)) == a.sha256);
    }
    const auto manifest = nlohmann::json::parse(slurp(dir / "manifest.json"));
    CHECK(manifest["command"] == "frames");
    CHECK(manifest["manifest_hash"] == m.manifest_hash());
    RunManifest later = m;
    later.started_at = "2099-01-01T00:00:00Z";
    later.finished_at = "2099-01-01T00:00:01Z";
    CHECK(later.manifest_hash() == m.manifest_hash());
    later.seed += 1;
    CHECK(later.manifest_hash() != m.manifest_hash());
    CHECK_THROWS_WITH_AS(run_command("nope", s, dir), doctest::Contains("unknown command"), ConfigError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("track command reports BER when asked") {
    const auto dir = temp_dir("track");
    auto s = load_scenario(kScenarios / "tracking_hops.json");
    s.tracking.ber_symbols = 2000;
    const auto m = run_command("track", s, dir);
    CHECK(std::filesystem::exists(dir / "events.jsonl"));
    CHECK(std::filesystem::exists(dir / "ber.json"));
    CHECK(m.results["selected"].size() == 4);
    std::filesystem::remove_all(dir);
}

TEST_CASE("edit distance") {
    CHECK(edit_distance("kitten", "sitting") == 3);
    CHECK(edit_distance("", "abc") == 3);
    CHECK(edit_distance("same", "same") == 0);
}

TEST_CASE("tracking end must not precede the trajectory") {
    CHECK_THROWS_WITH_AS(parse_scenario(R"({"tracking": {"end_ms": -5}})"), doctest::Contains("tracking.end_ms"),
                         ConfigError);
}
