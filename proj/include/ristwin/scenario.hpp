#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ristwin/controlplane.hpp"
#include "ristwin/doppler.hpp"
#include "ristwin/tracking.hpp"

namespace ristwin {

std::string_view tool_version();

// Fully-defaulted configuration. Every block is optional in the file.
struct ScenarioFile {
    struct Geometry {
        int rows = PanelGeometry::kDefaultRows;
        int cols = PanelGeometry::kDefaultCols;
        double frequency_hz = PanelGeometry::kDefaultFrequencyHz;
        std::optional<double> pitch_x;  // meters; 0.6λ when unset
        std::optional<double> pitch_y;
    } geometry;

    struct Cell {
        std::optional<double> guided_wavelength;  // meters; laminate default when unset
        std::optional<double> initial_length;
        std::array<double, 4> loss_db{0.3, 0.3, 0.3, 0.3};
        std::array<double, 4> phase_error_deg{0.0, 0.0, 0.0, 0.0};
    } cell;

    TransmitterSpec transmitter;
    RegionGridSpec region_grid;
    McuTopology controlplane;

    struct Tracking {
        TrackingConfig config;
        FrameTimeline timeline;
        std::vector<Waypoint> trajectory{{0.0, {0.0, 0.0, 1.0}}};
        double end_ms = 50.0;
        double ber_snr_db = 16.0;
        std::int64_t ber_symbols = 0;  // 0 skips the BER run
    } tracking;

    VortexSpec vortex;

    struct Doppler {
        SynthesisOptions synthesis;
        Vec3 receiver{0.05, 0.0, 1.0};
        Window window = Window::None;
        bool quantized = true;
    } doppler;

    // Codebook used by the codebook, fieldmap, scan and frames commands.
    struct CodebookChoice {
        std::string kind = "spot";  // spot | farfield | vortex | region
        FocusSet foci{{{0.0, 0.0, 0.4}, 1.0}};
        double azimuth_deg = 0.0;
        double elevation_deg = 0.0;
        std::optional<double> range_proxy_m;
        int step = 0;   // vortex step
        int b_id = 0;   // region index
    } codebook;

    struct Scan {
        Vec3 start{0.0, 0.0, 0.05};
        Vec3 end{0.0, 0.0, 1.0};
        int samples = 191;
        double min_prominence_db = 3.0;
    } scan;

    struct Fieldmap {
        SlicePlane plane = SlicePlane::XZ;
        double fixed = 0.0;
        double u_min = -0.5, u_max = 0.5;
        double v_min = 0.05, v_max = 1.0;
        int nu = 64, nv = 64;
    } fieldmap;

    std::string output_directory = "out";
    std::uint64_t seed = 1;

    PanelGeometry panel() const;
    UnitCellModel cell_model() const;
    double refresh_latency_ms() const { return ristwin::refresh_latency_ms(controlplane); }
    TrackingSetup tracking_setup() const;
    UserTrajectory trajectory() const { return UserTrajectory(tracking.trajectory); }
    CodingSchedule doppler_schedule() const;
    // The codebook selected by the `codebook` block, with provenance.
    Codebook selected_codebook(nlohmann::json* provenance = nullptr) const;

    // Cross-field checks; throws ConfigError naming both fields.
    void validate() const;
};

// Strict parse: `//` and `/* */` comments allowed, unknown keys rejected
// with a suggestion, every error prefixed with its key path.
ScenarioFile parse_scenario(std::string_view text);
ScenarioFile load_scenario(const std::filesystem::path& path);

nlohmann::json scenario_to_json(const ScenarioFile& scenario);
// SHA-256 of the canonical fully-defaulted JSON.
std::string scenario_hash(const ScenarioFile& scenario);
// JSON Schema (draft 2020-12) generated from the key table the parser uses.
nlohmann::json scenario_schema();

struct Artifact {
    std::string path;  // relative to the output directory
    std::string sha256;
    std::uintmax_t bytes = 0;
};

struct RunManifest {
    std::string command;
    std::string scenario_hash;
    std::string tool_version;
    std::uint64_t seed = 0;
    std::string started_at;  // ISO-8601 UTC
    std::string finished_at;
    std::vector<Artifact> artifacts;
    nlohmann::json results = nlohmann::json::object();  // headline numbers

    nlohmann::json to_json() const;
    // Hash over everything except wall-clock times.
    std::string manifest_hash() const;
};

inline constexpr const char* kOutputDirEnv = "RISTWIN_OUTPUT_DIR";

// Commands: codebook, fieldmap, scan, track, doppler, frames. Writes the
// artifacts and manifest.json into out_dir.
RunManifest run_command(std::string_view command, const ScenarioFile& scenario,
                        const std::filesystem::path& out_dir);

// Levenshtein distance, used for key suggestions.
std::size_t edit_distance(std::string_view a, std::string_view b);

}  // namespace ristwin
