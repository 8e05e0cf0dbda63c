#include <cstdlib>
#include <iostream>
#include <functional>
#include <optional>

#include "CLI11.hpp"
#include "ristwin/service.hpp"

#ifdef RISTWIN_WITH_ACCEPTANCE
#include "criteria.hpp"
#endif

using namespace ristwin;
using nlohmann::json;

namespace {

struct Globals {
    std::string scenario;
    std::string out;
    std::optional<std::uint64_t> seed;
};

ScenarioFile load(const Globals& g) {
    ScenarioFile s = g.scenario.empty() ? parse_scenario("{}") : load_scenario(g.scenario);
    if (g.seed) s.seed = *g.seed;
    return s;
}

// --out, then the environment, then the scenario's own setting.
std::filesystem::path output_dir(const Globals& g, const ScenarioFile& s, const std::string& command) {
    std::filesystem::path base;
    if (!g.out.empty()) {
        base = g.out;
    } else if (const char* env = std::getenv(kOutputDirEnv); env && *env) {
        base = env;
    } else {
        base = s.output_directory;
    }
    return base / command;
}

int run(const Globals& g, const std::string& command, const std::function<void(ScenarioFile&)>& tweak) {
    ScenarioFile s = load(g);
    tweak(s);
    s.validate();
    const auto dir = output_dir(g, s, command);
    const RunManifest m = run_command(command, s, dir);
    json doc = m.to_json();
    doc["output_directory"] = dir.string();
    doc["manifest_hash"] = m.manifest_hash();
    std::cout << doc.dump(2) << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RIS digital twin: codebooks, fields, beam tracking, rotational Doppler"};
    app.set_version_flag("--version", std::string(tool_version()));
    app.require_subcommand(1);

    Globals g;
    std::uint64_t seed = 0;
    app.add_option("--scenario,-s", g.scenario, "Scenario JSON file (defaults when omitted)")->check(CLI::ExistingFile);
    app.add_option("--out,-o", g.out, std::string("Output directory (overrides ") + kOutputDirEnv + ")");
    auto* seed_opt = app.add_option("--seed", seed, "Override the scenario seed");

    std::function<int()> action;

    auto* cb = app.add_subcommand("codebook", "Generate the selected codebook");
    std::optional<std::string> kind;
    std::optional<double> az, el;
    cb->add_option("--kind", kind, "spot, farfield, vortex or region")
        ->check(CLI::IsMember({"spot", "farfield", "vortex", "region"}));
    cb->add_option("--azimuth", az, "Farfield azimuth, degrees");
    cb->add_option("--elevation", el, "Farfield elevation, degrees");
    cb->callback([&] {
        action = [&] {
            return run(g, "codebook", [&](ScenarioFile& s) {
                if (kind) s.codebook.kind = *kind;
                if (az) s.codebook.azimuth_deg = *az;
                if (el) s.codebook.elevation_deg = *el;
            });
        };
    });

    auto* fm = app.add_subcommand("fieldmap", "Power over a plane for the selected codebook");
    std::optional<int> nu, nv;
    fm->add_option("--nu", nu)->check(CLI::Range(2, 1024));
    fm->add_option("--nv", nv)->check(CLI::Range(2, 1024));
    fm->callback([&] {
        action = [&] {
            return run(g, "fieldmap", [&](ScenarioFile& s) {
                if (nu) s.fieldmap.nu = *nu;
                if (nv) s.fieldmap.nv = *nv;
            });
        };
    });

    auto* sc = app.add_subcommand("scan", "Power along a line segment, with peaks");
    std::optional<int> samples;
    sc->add_option("--samples", samples)->check(CLI::PositiveNumber);
    sc->callback([&] {
        action = [&] {
            return run(g, "scan", [&](ScenarioFile& s) {
                if (samples) s.scan.samples = *samples;
            });
        };
    });

    auto* tr = app.add_subcommand("track", "Run the beam-tracking loop over the scenario trajectory");
    std::optional<double> end_ms, threshold;
    std::optional<std::int64_t> ber_symbols;
    tr->add_option("--end-ms", end_ms);
    tr->add_option("--threshold-db", threshold);
    tr->add_option("--ber-symbols", ber_symbols)->check(CLI::NonNegativeNumber);
    tr->callback([&] {
        action = [&] {
            return run(g, "track", [&](ScenarioFile& s) {
                if (end_ms) s.tracking.end_ms = *end_ms;
                if (threshold) s.tracking.config.threshold_db = *threshold;
                if (ber_symbols) s.tracking.ber_symbols = *ber_symbols;
            });
        };
    });

    auto* dp = app.add_subcommand("doppler", "Synthesize the rotating-vortex signal and its spectrum");
    std::optional<int> l, q;
    std::optional<double> period;
    dp->add_option("--l", l, "Topological charge");
    dp->add_option("--Q", q, "Steps per period")->check(CLI::PositiveNumber);
    dp->add_option("--T", period, "Rotation period, seconds")->check(CLI::PositiveNumber);
    dp->callback([&] {
        action = [&] {
            return run(g, "doppler", [&](ScenarioFile& s) {
                if (l) s.vortex.mode = *l;
                if (q) s.vortex.steps = *q;
                if (period) s.vortex.period_s = *period;
            });
        };
    });

    auto* fr = app.add_subcommand("frames", "Encode the selected codebook into follower SPI frames");
    bool invert = false;
    fr->add_flag("--invert", invert, "pMOS polarity");
    fr->callback([&] {
        action = [&] {
            return run(g, "frames", [&](ScenarioFile& s) {
                if (invert) s.controlplane.invert_polarity = true;
            });
        };
    });

    auto* sv = app.add_subcommand("serve", "Serve sessions over newline-delimited JSON on TCP");
    ServerOptions opts;
    opts.handle_signals = true;
    sv->add_option("--address", opts.address);
    sv->add_option("--port", opts.port);
    sv->add_option("--tick-ms", opts.tick_ms)->check(CLI::PositiveNumber);
    sv->callback([&] {
        action = [&] {
            opts.scenario = load(g);
            SessionServer server(opts);
            const auto port = server.start();
            std::cout << json{{"listening", opts.address}, {"port", port}, {"protocol", kProtocolVersion}}.dump()
                      << std::endl;
            server.wait();
            return 0;
        };
    });

#ifdef RISTWIN_WITH_ACCEPTANCE
    auto* rp = app.add_subcommand("reproduce", "Run the acceptance criteria");
    rp->callback([&] {
        action = [&] {
            int failed = 0;
            for (const auto& r : acceptance::run_all()) {
                std::cout << acceptance::format_line(r) << std::endl;
                failed += r.passed ? 0 : 1;
            }
            return failed == 0 ? 0 : 1;
        };
    });
#endif

    auto* sch = app.add_subcommand("schema", "Print the scenario JSON Schema");
    sch->callback([&] {
        action = [] {
            std::cout << scenario_schema().dump(2) << "\n";
            return 0;
        };
    });

    auto* val = app.add_subcommand("validate", "Parse and check a scenario, print its hash");
    val->callback([&] {
        action = [&] {
            const ScenarioFile s = load(g);
            std::cout << json{{"valid", true}, {"scenario_hash", scenario_hash(s)}}.dump() << "\n";
            return 0;
        };
    });

    CLI11_PARSE(app, argc, argv);
    if (*seed_opt) g.seed = seed;
    try {
        return action();
    } catch (const std::exception& e) {
        std::cerr << json{{"error", e.what()}}.dump() << "\n";
        return 1;
    }
}
