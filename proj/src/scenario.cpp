#include "ristwin/scenario.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <fstream>
#include <map>
#include <sstream>

namespace ristwin {

using nlohmann::json;

namespace {

enum class Kind { Number, Integer, Boolean, String, Vec3, Number4, Object, Array };

struct KeySpec {
    std::string name;
    Kind kind;
    std::string description;
    std::vector<std::string> choices{};
};

// Schema paths: "" is the root, "a.b" a nested object, "a.b[]" array items.
const std::map<std::string, std::vector<KeySpec>>& key_table() {
    static const std::map<std::string, std::vector<KeySpec>> table{
        {"",
         {{"geometry", Kind::Object, "Panel dimensions and carrier"},
          {"cell", Kind::Object, "Unit-cell phase/loss model"},
          {"transmitter", Kind::Object, "Feed position and propagation constant"},
          {"region_grid", Kind::Object, "Half-space partition used by tracking"},
          {"controlplane", Kind::Object, "Leader/follower MCU topology"},
          {"tracking", Kind::Object, "Beam tracking protocol"},
          {"vortex", Kind::Object, "Rotating vortex schedule"},
          {"doppler", Kind::Object, "Receiver synthesis and spectrum"},
          {"codebook", Kind::Object, "Codebook used by codebook/fieldmap/scan/frames"},
          {"scan", Kind::Object, "Line scan"},
          {"fieldmap", Kind::Object, "Planar heatmap"},
          {"output", Kind::Object, "Artifact location"},
          {"seed", Kind::Integer, "RNG seed"}}},
        {"geometry",
         {{"rows", Kind::Integer, "M"},
          {"cols", Kind::Integer, "N"},
          {"frequency_hz", Kind::Number, "Carrier frequency f0"},
          {"pitch_x", Kind::Number, "Unit pitch along x, meters (default 0.6 wavelength)"},
          {"pitch_y", Kind::Number, "Unit pitch along y, meters (default 0.6 wavelength)"}}},
        {"cell",
         {{"guided_wavelength", Kind::Number, "Delay-line guided wavelength, meters"},
          {"initial_length", Kind::Number, "Delay-line offset for zero shift, meters"},
          {"loss_db", Kind::Number4, "Per-state insertion loss, dB, each in [0, 0.6]"},
          {"phase_error_deg", Kind::Number4, "Per-state phase error, degrees"}}},
        {"transmitter",
         {{"position", Kind::Vec3, "Feed position, meters"}, {"gain", Kind::Number, "Propagation constant G"}}},
        {"region_grid",
         {{"azimuth_count", Kind::Integer, ""},
          {"elevation_count", Kind::Integer, ""},
          {"range_count", Kind::Integer, ""},
          {"azimuth_min_deg", Kind::Number, ""},
          {"azimuth_max_deg", Kind::Number, ""},
          {"elevation_min_deg", Kind::Number, ""},
          {"elevation_max_deg", Kind::Number, ""},
          {"range_min_m", Kind::Number, ""},
          {"range_max_m", Kind::Number, ""}}},
        {"controlplane",
         {{"leader_pins", Kind::Integer, ""},
          {"followers", Kind::Integer, ""},
          {"pins_per_follower", Kind::Integer, ""},
          {"units_per_follower", Kind::Integer, ""},
          {"ports_per_follower", Kind::Integer, ""},
          {"port_width_bits", Kind::Integer, ""},
          {"spi_baud", Kind::Number, "SPI bit rate, bits/s"},
          {"invert_polarity", Kind::Boolean, "pMOS driver stage"}}},
        {"tracking",
         {{"threshold_db", Kind::Number, "Scan trigger threshold g_t"},
          {"mode", Kind::String, "", {"full_scan_argmax", "threshold_early_exit"}},
          {"reference_db", Kind::Number, "Offset added to every RSSI"},
          {"initial_b_id", Kind::Integer, "Codebook active before the first scan"},
          {"monitor_interval_ms", Kind::Number, "Power sampling cadence (default slot_ms)"},
          {"end_ms", Kind::Number, "Simulation end time"},
          {"timeline", Kind::Object, ""},
          {"trajectory", Kind::Array, "Waypoints, strictly increasing t_ms"},
          {"ber", Kind::Object, ""}}},
        {"tracking.timeline",
         {{"processing_delay_ms", Kind::Number, "T_d"},
          {"slot_ms", Kind::Number, "D_t"},
          {"sample_offset_ms", Kind::Number, "T_a"},
          {"sync_margin_ms", Kind::Number, "T_s - T_u (default T_d)"},
          {"clock_skew_bound_ms", Kind::Number, ""},
          {"clock_offset_ms", Kind::Number, "RIS minus user clock"}}},
        {"tracking.trajectory[]", {{"t_ms", Kind::Number, ""}, {"position", Kind::Vec3, ""}}},
        {"tracking.ber", {{"snr_db", Kind::Number, "Es/N0"}, {"symbols", Kind::Integer, "0 disables"}}},
        {"vortex",
         {{"mode", Kind::Integer, "Topological charge"},
          {"steps", Kind::Integer, "Codebooks per period"},
          {"period_s", Kind::Number, "Rotation period"},
          {"initial_phase_rad", Kind::Number, ""}}},
        {"doppler",
         {{"sample_rate_hz", Kind::Number, ""},
          {"duration_s", Kind::Number, ""},
          {"amplitude", Kind::Number, "A_e"},
          {"dead_time_s", Kind::Number, "Hold of the previous state after each switch"},
          {"start_step", Kind::Integer, "Schedule step active at t = 0"},
          {"window", Kind::String, "", {"none", "hann"}},
          {"receiver", Kind::Vec3, "Receiver position, meters"},
          {"quantized", Kind::Boolean, "false uses continuous phases"}}},
        {"codebook",
         {{"kind", Kind::String, "", {"spot", "farfield", "vortex", "region"}},
          {"foci", Kind::Array, "spot foci"},
          {"azimuth_deg", Kind::Number, "farfield direction"},
          {"elevation_deg", Kind::Number, "farfield direction"},
          {"range_proxy_m", Kind::Number, "farfield focus distance (default 10x far-field bound)"},
          {"step", Kind::Integer, "vortex step"},
          {"b_id", Kind::Integer, "region index"}}},
        {"codebook.foci[]", {{"position", Kind::Vec3, ""}, {"weight", Kind::Number, ""}}},
        {"scan",
         {{"start", Kind::Vec3, ""},
          {"end", Kind::Vec3, ""},
          {"samples", Kind::Integer, ""},
          {"min_prominence_db", Kind::Number, ""}}},
        {"fieldmap",
         {{"plane", Kind::String, "", {"xy", "xz", "yz"}},
          {"fixed", Kind::Number, "Coordinate along the plane normal"},
          {"u_min", Kind::Number, ""},
          {"u_max", Kind::Number, ""},
          {"v_min", Kind::Number, ""},
          {"v_max", Kind::Number, ""},
          {"nu", Kind::Integer, ""},
          {"nv", Kind::Integer, ""}}},
        {"output", {{"directory", Kind::String, ""}}},
    };
    return table;
}

std::string join_path(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

std::string suggestion(std::string_view key, const std::vector<KeySpec>& specs) {
    std::size_t best = std::string::npos;
    std::string best_name;
    for (const auto& s : specs) {
        const std::size_t d = edit_distance(key, s.name);
        if (d < best) {
            best = d;
            best_name = s.name;
        }
    }
    const std::size_t limit = std::max<std::size_t>(2, key.size() / 3);
    if (best_name.empty() || best > limit) return "";
    return " (did you mean '" + best_name + "'?)";
}

// A JSON object checked against one entry of the key table.
class Block {
public:
    Block(const json& doc, std::string path, std::string schema_path)
        : doc_(doc), path_(std::move(path)), schema_path_(std::move(schema_path)) {
        const auto& specs = key_table().at(schema_path_);
        if (!doc_.is_object()) throw ConfigError(label() + ": expected an object");
        for (const auto& [key, value] : doc_.items()) {
            const bool known =
                std::any_of(specs.begin(), specs.end(), [&](const KeySpec& s) { return s.name == key; });
            if (!known) {
                throw ConfigError(join_path(path_, key) + ": unknown key" + suggestion(key, specs));
            }
        }
    }

    void number(const char* key, double& out) const {
        if (const json* v = find(key, Kind::Number)) {
            if (!v->is_number()) throw type_error(key, "a number");
            out = v->get<double>();
            if (!std::isfinite(out)) throw ConfigError(join_path(path_, key) + ": must be finite");
        }
    }
    void number(const char* key, std::optional<double>& out) const {
        if (find(key, Kind::Number)) {
            double v = 0.0;
            number(key, v);
            out = v;
        }
    }
    template <class Int>
    void integer(const char* key, Int& out) const {
        if (const json* v = find(key, Kind::Integer)) {
            if (!v->is_number_integer()) throw type_error(key, "an integer");
            if constexpr (std::is_unsigned_v<Int>) {
                if (!v->is_number_unsigned()) throw type_error(key, "a non-negative integer");
            }
            out = v->get<Int>();
        }
    }
    void boolean(const char* key, bool& out) const {
        if (const json* v = find(key, Kind::Boolean)) {
            if (!v->is_boolean()) throw type_error(key, "true or false");
            out = v->get<bool>();
        }
    }
    bool string(const char* key, std::string& out) const {
        const json* v = find(key, Kind::String);
        if (!v) return false;
        if (!v->is_string()) throw type_error(key, "a string");
        out = v->get<std::string>();
        const auto& choices = spec(key).choices;
        if (!choices.empty() && std::find(choices.begin(), choices.end(), out) == choices.end()) {
            std::string list;
            for (const auto& c : choices) list += (list.empty() ? "" : ", ") + c;
            throw ConfigError(join_path(path_, key) + ": '" + out + "' is not one of " + list);
        }
        return true;
    }
    void vec3(const char* key, Vec3& out) const {
        if (const json* v = find(key, Kind::Vec3)) {
            if (!v->is_array() || v->size() != 3 ||
                !std::all_of(v->begin(), v->end(), [](const json& e) { return e.is_number(); })) {
                throw type_error(key, "[x, y, z]");
            }
            out = {(*v)[0].get<double>(), (*v)[1].get<double>(), (*v)[2].get<double>()};
        }
    }
    void number4(const char* key, std::array<double, 4>& out) const {
        if (const json* v = find(key, Kind::Number4)) {
            if (!v->is_array() || v->size() != 4 ||
                !std::all_of(v->begin(), v->end(), [](const json& e) { return e.is_number(); })) {
                throw type_error(key, "an array of 4 numbers");
            }
            for (std::size_t i = 0; i < 4; ++i) out[i] = (*v)[i].get<double>();
        }
    }
    std::optional<Block> child(const char* key) const {
        const json* v = find(key, Kind::Object);
        if (!v) return std::nullopt;
        return Block(*v, join_path(path_, key), join_path(schema_path_, key));
    }
    // Items of an array of objects; empty optional when the key is absent.
    std::optional<std::vector<Block>> items(const char* key) const {
        const json* v = find(key, Kind::Array);
        if (!v) return std::nullopt;
        if (!v->is_array()) throw type_error(key, "an array");
        std::vector<Block> out;
        for (std::size_t i = 0; i < v->size(); ++i) {
            out.emplace_back((*v)[i], join_path(path_, key) + "[" + std::to_string(i) + "]",
                             join_path(schema_path_, key) + "[]");
        }
        return out;
    }

    const std::string& path() const { return path_; }

private:
    std::string label() const { return path_.empty() ? "scenario" : path_; }

    const KeySpec& spec(const char* key) const {
        for (const auto& s : key_table().at(schema_path_)) {
            if (s.name == key) return s;
        }
        throw std::logic_error("scenario key table is missing " + join_path(schema_path_, key));
    }
    const json* find(const char* key, Kind kind) const {
        if (spec(key).kind != kind) throw std::logic_error("scenario key table kind mismatch for " + std::string(key));
        auto it = doc_.find(key);
        return it == doc_.end() ? nullptr : &*it;
    }
    ConfigError type_error(const char* key, const char* expected) const {
        return ConfigError(join_path(path_, key) + ": expected " + expected);
    }

    const json& doc_;
    std::string path_;
    std::string schema_path_;
};

json vec_json(Vec3 v) { return json::array({v.x, v.y, v.z}); }

json schema_for(const std::string& path) {
    json props = json::object();
    for (const auto& s : key_table().at(path)) {
        json p;
        const std::string sub = join_path(path, s.name);
        switch (s.kind) {
            case Kind::Number: p = {{"type", "number"}}; break;
            case Kind::Integer: p = {{"type", "integer"}}; break;
            case Kind::Boolean: p = {{"type", "boolean"}}; break;
            case Kind::String: p = {{"type", "string"}}; break;
            case Kind::Vec3:
                p = {{"type", "array"}, {"items", {{"type", "number"}}}, {"minItems", 3}, {"maxItems", 3}};
                break;
            case Kind::Number4:
                p = {{"type", "array"}, {"items", {{"type", "number"}}}, {"minItems", 4}, {"maxItems", 4}};
                break;
            case Kind::Object: p = schema_for(sub); break;
            case Kind::Array: p = {{"type", "array"}, {"items", schema_for(sub + "[]")}}; break;
        }
        if (!s.choices.empty()) p["enum"] = s.choices;
        if (!s.description.empty()) p["description"] = s.description;
        props[s.name] = std::move(p);
    }
    return {{"type", "object"}, {"additionalProperties", false}, {"properties", std::move(props)}};
}

std::string utc_now() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_artifact(const std::filesystem::path& dir, const std::string& name, const std::string& content,
                    RunManifest& manifest) {
    const auto path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write " + path.string());
    out << content;
    out.close();
    if (!out) throw ConfigError("failed writing " + path.string());
    manifest.artifacts.push_back({name, sha256_hex(content), content.size()});
}

}  // namespace

std::string_view tool_version() { return RISTWIN_VERSION; }

std::size_t edit_distance(std::string_view a, std::string_view b) {
    std::vector<std::size_t> prev(b.size() + 1), cur(b.size() + 1);
    for (std::size_t j = 0; j <= b.size(); ++j) prev[j] = j;
    for (std::size_t i = 1; i <= a.size(); ++i) {
        cur[0] = i;
        for (std::size_t j = 1; j <= b.size(); ++j) {
            const std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
            cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
        }
        std::swap(prev, cur);
    }
    return prev[b.size()];
}

PanelGeometry ScenarioFile::panel() const {
    // same association as PanelGeometry::standard so defaults compare equal
    const double default_pitch = PanelGeometry::kDefaultPitchWavelengths * kSpeedOfLight / geometry.frequency_hz;
    return PanelGeometry(geometry.rows, geometry.cols, geometry.pitch_x.value_or(default_pitch),
                         geometry.pitch_y.value_or(default_pitch), geometry.frequency_hz);
}

UnitCellModel ScenarioFile::cell_model() const {
    UnitCellModel m = UnitCellModel::standard(panel().wavelength());
    if (cell.guided_wavelength) m.guided_wavelength = *cell.guided_wavelength;
    if (cell.initial_length) m.initial_length = *cell.initial_length;
    m.loss_db = cell.loss_db;
    m.phase_error_deg = cell.phase_error_deg;
    return m;
}

TrackingSetup ScenarioFile::tracking_setup() const {
    const PanelGeometry g = panel();
    return TrackingSetup{g,
                         cell_model(),
                         transmitter,
                         region_codebooks(ristwin::region_grid(region_grid), transmitter, g),
                         tracking.config,
                         tracking.timeline,
                         refresh_latency_ms()};
}

CodingSchedule ScenarioFile::doppler_schedule() const {
    if (doppler.quantized) return rotating_schedule(vortex, panel(), cell_model(), refresh_latency_ms());
    return continuous_schedule(vortex, panel(), refresh_latency_ms());
}

Codebook ScenarioFile::selected_codebook(json* provenance) const {
    const PanelGeometry g = panel();
    json prov{{"kind", codebook.kind},
              {"transmitter", {{"position", vec_json(transmitter.position)}, {"gain", transmitter.gain}}},
              {"geometry_hash", geometry_hash(g)}};
    std::optional<Codebook> out;
    if (codebook.kind == "spot") {
        json foci = json::array();
        for (const auto& f : codebook.foci) foci.push_back({{"position", vec_json(f.point)}, {"weight", f.weight}});
        prov["foci"] = std::move(foci);
        out = spot_codebook(transmitter, codebook.foci, g);
    } else if (codebook.kind == "farfield") {
        FarFieldCodebook ff =
            codebook.range_proxy_m
                ? farfield_codebook(codebook.azimuth_deg, codebook.elevation_deg, *codebook.range_proxy_m, transmitter, g)
                : farfield_codebook(codebook.azimuth_deg, codebook.elevation_deg, transmitter, g);
        prov["azimuth_deg"] = codebook.azimuth_deg;
        prov["elevation_deg"] = codebook.elevation_deg;
        prov["focus"] = vec_json(ff.focus);
        prov["far_field_bound_m"] = ff.far_field_bound;
        if (ff.warning) prov["warning"] = *ff.warning;
        out = std::move(ff.codebook);
    } else if (codebook.kind == "vortex") {
        prov["vortex"] = {{"mode", vortex.mode},
                          {"steps", vortex.steps},
                          {"period_s", vortex.period_s},
                          {"initial_phase_rad", vortex.initial_phase},
                          {"step", codebook.step}};
        out = vortex_codebook(vortex, codebook.step, g);
    } else if (codebook.kind == "region") {
        const RegionGrid grid = ristwin::region_grid(region_grid);
        if (codebook.b_id < 0 || codebook.b_id >= grid.size()) {
            throw ConfigError("codebook.b_id " + std::to_string(codebook.b_id) + " is outside the " +
                              std::to_string(grid.size()) + " regions of region_grid");
        }
        const Region& r = grid.regions[static_cast<std::size_t>(codebook.b_id)];
        prov["region_center"] = vec_json(r.center);
        out = spot_codebook(transmitter, {{r.center, 1.0}}, g);
        out->b_id = codebook.b_id;
    } else {
        throw ConfigError("codebook.kind: unknown kind '" + codebook.kind + "'");
    }
    if (provenance) *provenance = std::move(prov);
    return std::move(*out);
}

void ScenarioFile::validate() const {
    const PanelGeometry g = panel();
    cell_model().validate();
    transmitter.validate();
    const RegionGrid grid = ristwin::region_grid(region_grid);
    try {
        controlplane.validate_for(g.unit_count());
    } catch (const ConfigError& e) {
        throw ConfigError("controlplane does not fit geometry.rows x geometry.cols (" + std::to_string(g.rows()) + "x" +
                          std::to_string(g.cols()) + "): " + e.what());
    }
    const double latency = refresh_latency_ms();

    if (tracking.timeline.slot_ms < latency) {
        throw ConfigError("tracking.timeline.slot_ms (" + format_double(tracking.timeline.slot_ms) +
                          " ms) is shorter than the refresh latency " + format_double(latency) +
                          " ms set by controlplane.followers, controlplane.ports_per_follower and "
                          "controlplane.spi_baud");
    }
    tracking.timeline.validate(latency);
    if (tracking.config.initial_b_id < 0 || tracking.config.initial_b_id >= grid.size()) {
        throw ConfigError("tracking.initial_b_id (" + std::to_string(tracking.config.initial_b_id) +
                          ") is outside the " + std::to_string(grid.size()) + " regions of region_grid");
    }
    if (tracking.config.monitor_interval_ms && !(*tracking.config.monitor_interval_ms > 0.0)) {
        throw ConfigError("tracking.monitor_interval_ms: must be > 0");
    }
    if (tracking.trajectory.empty()) throw ConfigError("tracking.trajectory: need at least one waypoint");
    if (!(tracking.end_ms >= tracking.trajectory.front().t_ms)) {
        throw ConfigError("tracking.end_ms (" + format_double(tracking.end_ms) +
                          ") is before the first tracking.trajectory waypoint");
    }
    if (tracking.ber_symbols < 0) throw ConfigError("tracking.ber.symbols: must be >= 0");
    (void)trajectory();

    vortex.validate();
    const double dwell_ms = vortex.period_s / vortex.steps * 1e3;
    if (dwell_ms < latency) {
        throw ConfigError("vortex.period_s / vortex.steps (" + format_double(dwell_ms) +
                          " ms dwell) is shorter than the controlplane refresh latency " + format_double(latency) +
                          " ms");
    }
    const auto& syn = doppler.synthesis;
    if (!(syn.sample_rate_hz > 0.0) || !(syn.duration_s > 0.0)) {
        throw ConfigError("doppler: sample_rate_hz and duration_s must be > 0");
    }
    const double shift = std::abs(vortex.mode) / vortex.period_s;
    if (!(syn.sample_rate_hz > 2.0 * shift)) {
        throw ConfigError("doppler.sample_rate_hz (" + format_double(syn.sample_rate_hz) +
                          " Hz) cannot resolve the shift |vortex.mode| / vortex.period_s = " + format_double(shift) +
                          " Hz");
    }
    if (!(syn.dead_time_s >= 0.0) || syn.dead_time_s > vortex.period_s / vortex.steps) {
        throw ConfigError("doppler.dead_time_s must lie in [0, vortex.period_s / vortex.steps]");
    }
    if (!(doppler.receiver.z > 0.0)) throw GeometryError("doppler.receiver: needs z > 0");

    if (codebook.kind == "spot" && codebook.foci.empty()) throw ConfigError("codebook.foci: need at least one focus");
    if (codebook.kind == "vortex" && (codebook.step < 0 || codebook.step >= vortex.steps)) {
        throw ConfigError("codebook.step (" + std::to_string(codebook.step) + ") is outside [0, vortex.steps)");
    }
    if (codebook.kind == "region" && (codebook.b_id < 0 || codebook.b_id >= grid.size())) {
        throw ConfigError("codebook.b_id (" + std::to_string(codebook.b_id) + ") is outside the " +
                          std::to_string(grid.size()) + " regions of region_grid");
    }
    if (scan.samples < 2) throw ConfigError("scan.samples: need at least 2");
    if (fieldmap.nu < 2 || fieldmap.nv < 2) throw ConfigError("fieldmap: nu and nv must be >= 2");
}

ScenarioFile parse_scenario(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end(), nullptr, true, true);
    } catch (const json::parse_error& e) {
        throw ConfigError(std::string("scenario: invalid JSON: ") + e.what());
    }
    ScenarioFile s;
    const Block root(doc, "", "");
    root.integer("seed", s.seed);

    if (auto b = root.child("geometry")) {
        b->integer("rows", s.geometry.rows);
        b->integer("cols", s.geometry.cols);
        b->number("frequency_hz", s.geometry.frequency_hz);
        b->number("pitch_x", s.geometry.pitch_x);
        b->number("pitch_y", s.geometry.pitch_y);
    }
    if (auto b = root.child("cell")) {
        b->number("guided_wavelength", s.cell.guided_wavelength);
        b->number("initial_length", s.cell.initial_length);
        b->number4("loss_db", s.cell.loss_db);
        b->number4("phase_error_deg", s.cell.phase_error_deg);
    }
    if (auto b = root.child("transmitter")) {
        b->vec3("position", s.transmitter.position);
        b->number("gain", s.transmitter.gain);
    }
    if (auto b = root.child("region_grid")) {
        auto& r = s.region_grid;
        b->integer("azimuth_count", r.azimuth_count);
        b->integer("elevation_count", r.elevation_count);
        b->integer("range_count", r.range_count);
        b->number("azimuth_min_deg", r.azimuth_min_deg);
        b->number("azimuth_max_deg", r.azimuth_max_deg);
        b->number("elevation_min_deg", r.elevation_min_deg);
        b->number("elevation_max_deg", r.elevation_max_deg);
        b->number("range_min_m", r.range_min_m);
        b->number("range_max_m", r.range_max_m);
    }
    if (auto b = root.child("controlplane")) {
        auto& c = s.controlplane;
        b->integer("leader_pins", c.leader_pins);
        b->integer("followers", c.followers);
        b->integer("pins_per_follower", c.pins_per_follower);
        b->integer("units_per_follower", c.units_per_follower);
        b->integer("ports_per_follower", c.ports_per_follower);
        b->integer("port_width_bits", c.port_width_bits);
        b->number("spi_baud", c.spi_baud);
        b->boolean("invert_polarity", c.invert_polarity);
    }
    if (auto b = root.child("tracking")) {
        auto& t = s.tracking;
        b->number("threshold_db", t.config.threshold_db);
        std::string mode;
        if (b->string("mode", mode)) t.config.mode = parse_scan_mode(mode);
        b->number("reference_db", t.config.reference_db);
        b->integer("initial_b_id", t.config.initial_b_id);
        b->number("monitor_interval_ms", t.config.monitor_interval_ms);
        b->number("end_ms", t.end_ms);
        if (auto tl = b->child("timeline")) {
            tl->number("processing_delay_ms", t.timeline.processing_delay_ms);
            tl->number("slot_ms", t.timeline.slot_ms);
            tl->number("sample_offset_ms", t.timeline.sample_offset_ms);
            tl->number("sync_margin_ms", t.timeline.sync_margin_ms);
            tl->number("clock_skew_bound_ms", t.timeline.clock_skew_bound_ms);
            tl->number("clock_offset_ms", t.timeline.clock_offset_ms);
        }
        if (auto items = b->items("trajectory")) {
            if (items->empty()) throw ConfigError("tracking.trajectory: need at least one waypoint");
            t.trajectory.clear();
            for (const auto& w : *items) {
                Waypoint wp;
                w.number("t_ms", wp.t_ms);
                w.vec3("position", wp.position);
                t.trajectory.push_back(wp);
            }
        }
        if (auto ber = b->child("ber")) {
            ber->number("snr_db", t.ber_snr_db);
            ber->integer("symbols", t.ber_symbols);
        }
    }
    if (auto b = root.child("vortex")) {
        b->integer("mode", s.vortex.mode);
        b->integer("steps", s.vortex.steps);
        b->number("period_s", s.vortex.period_s);
        b->number("initial_phase_rad", s.vortex.initial_phase);
    }
    if (auto b = root.child("doppler")) {
        auto& d = s.doppler;
        b->number("sample_rate_hz", d.synthesis.sample_rate_hz);
        b->number("duration_s", d.synthesis.duration_s);
        b->number("amplitude", d.synthesis.amplitude);
        b->number("dead_time_s", d.synthesis.dead_time_s);
        b->integer("start_step", d.synthesis.start_step);
        std::string window;
        if (b->string("window", window)) d.window = parse_window(window);
        b->vec3("receiver", d.receiver);
        b->boolean("quantized", d.quantized);
    }
    if (auto b = root.child("codebook")) {
        auto& c = s.codebook;
        b->string("kind", c.kind);
        if (auto items = b->items("foci")) {
            c.foci.clear();
            for (const auto& f : *items) {
                Focus focus;
                f.vec3("position", focus.point);
                f.number("weight", focus.weight);
                c.foci.push_back(focus);
            }
        }
        b->number("azimuth_deg", c.azimuth_deg);
        b->number("elevation_deg", c.elevation_deg);
        b->number("range_proxy_m", c.range_proxy_m);
        b->integer("step", c.step);
        b->integer("b_id", c.b_id);
    }
    if (auto b = root.child("scan")) {
        b->vec3("start", s.scan.start);
        b->vec3("end", s.scan.end);
        b->integer("samples", s.scan.samples);
        b->number("min_prominence_db", s.scan.min_prominence_db);
    }
    if (auto b = root.child("fieldmap")) {
        auto& f = s.fieldmap;
        std::string plane;
        if (b->string("plane", plane)) f.plane = parse_plane(plane);
        b->number("fixed", f.fixed);
        b->number("u_min", f.u_min);
        b->number("u_max", f.u_max);
        b->number("v_min", f.v_min);
        b->number("v_max", f.v_max);
        b->integer("nu", f.nu);
        b->integer("nv", f.nv);
    }
    if (auto b = root.child("output")) b->string("directory", s.output_directory);

    s.validate();
    return s;
}

ScenarioFile load_scenario(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read scenario " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    try {
        return parse_scenario(text.str());
    } catch (const ConfigError& e) {
        throw ConfigError(path.filename().string() + ": " + e.what());
    }
}

json scenario_to_json(const ScenarioFile& s) {
    json geometry{{"rows", s.geometry.rows}, {"cols", s.geometry.cols}, {"frequency_hz", s.geometry.frequency_hz}};
    if (s.geometry.pitch_x) geometry["pitch_x"] = *s.geometry.pitch_x;
    if (s.geometry.pitch_y) geometry["pitch_y"] = *s.geometry.pitch_y;

    json cell{{"loss_db", s.cell.loss_db}, {"phase_error_deg", s.cell.phase_error_deg}};
    if (s.cell.guided_wavelength) cell["guided_wavelength"] = *s.cell.guided_wavelength;
    if (s.cell.initial_length) cell["initial_length"] = *s.cell.initial_length;

    const auto& r = s.region_grid;
    const auto& c = s.controlplane;
    const auto& t = s.tracking;
    json timeline{{"processing_delay_ms", t.timeline.processing_delay_ms},
                  {"slot_ms", t.timeline.slot_ms},
                  {"sample_offset_ms", t.timeline.sample_offset_ms},
                  {"clock_skew_bound_ms", t.timeline.clock_skew_bound_ms},
                  {"clock_offset_ms", t.timeline.clock_offset_ms}};
    if (t.timeline.sync_margin_ms) timeline["sync_margin_ms"] = *t.timeline.sync_margin_ms;
    json trajectory = json::array();
    for (const auto& w : t.trajectory) trajectory.push_back({{"t_ms", w.t_ms}, {"position", vec_json(w.position)}});
    json tracking{{"threshold_db", t.config.threshold_db},
                  {"mode", scan_mode_name(t.config.mode)},
                  {"reference_db", t.config.reference_db},
                  {"initial_b_id", t.config.initial_b_id},
                  {"end_ms", t.end_ms},
                  {"timeline", std::move(timeline)},
                  {"trajectory", std::move(trajectory)},
                  {"ber", {{"snr_db", t.ber_snr_db}, {"symbols", t.ber_symbols}}}};
    if (t.config.monitor_interval_ms) tracking["monitor_interval_ms"] = *t.config.monitor_interval_ms;

    const auto& d = s.doppler;
    json foci = json::array();
    for (const auto& f : s.codebook.foci) foci.push_back({{"position", vec_json(f.point)}, {"weight", f.weight}});
    json codebook{{"kind", s.codebook.kind},
                  {"foci", std::move(foci)},
                  {"azimuth_deg", s.codebook.azimuth_deg},
                  {"elevation_deg", s.codebook.elevation_deg},
                  {"step", s.codebook.step},
                  {"b_id", s.codebook.b_id}};
    if (s.codebook.range_proxy_m) codebook["range_proxy_m"] = *s.codebook.range_proxy_m;

    const auto& f = s.fieldmap;
    return {{"geometry", std::move(geometry)},
            {"cell", std::move(cell)},
            {"transmitter", {{"position", vec_json(s.transmitter.position)}, {"gain", s.transmitter.gain}}},
            {"region_grid",
             {{"azimuth_count", r.azimuth_count},
              {"elevation_count", r.elevation_count},
              {"range_count", r.range_count},
              {"azimuth_min_deg", r.azimuth_min_deg},
              {"azimuth_max_deg", r.azimuth_max_deg},
              {"elevation_min_deg", r.elevation_min_deg},
              {"elevation_max_deg", r.elevation_max_deg},
              {"range_min_m", r.range_min_m},
              {"range_max_m", r.range_max_m}}},
            {"controlplane",
             {{"leader_pins", c.leader_pins},
              {"followers", c.followers},
              {"pins_per_follower", c.pins_per_follower},
              {"units_per_follower", c.units_per_follower},
              {"ports_per_follower", c.ports_per_follower},
              {"port_width_bits", c.port_width_bits},
              {"spi_baud", c.spi_baud},
              {"invert_polarity", c.invert_polarity}}},
            {"tracking", std::move(tracking)},
            {"vortex",
             {{"mode", s.vortex.mode},
              {"steps", s.vortex.steps},
              {"period_s", s.vortex.period_s},
              {"initial_phase_rad", s.vortex.initial_phase}}},
            {"doppler",
             {{"sample_rate_hz", d.synthesis.sample_rate_hz},
              {"duration_s", d.synthesis.duration_s},
              {"amplitude", d.synthesis.amplitude},
              {"dead_time_s", d.synthesis.dead_time_s},
              {"start_step", d.synthesis.start_step},
              {"window", d.window == Window::Hann ? "hann" : "none"},
              {"receiver", vec_json(d.receiver)},
              {"quantized", d.quantized}}},
            {"codebook", std::move(codebook)},
            {"scan",
             {{"start", vec_json(s.scan.start)},
              {"end", vec_json(s.scan.end)},
              {"samples", s.scan.samples},
              {"min_prominence_db", s.scan.min_prominence_db}}},
            {"fieldmap",
             {{"plane", plane_name(f.plane)},
              {"fixed", f.fixed},
              {"u_min", f.u_min},
              {"u_max", f.u_max},
              {"v_min", f.v_min},
              {"v_max", f.v_max},
              {"nu", f.nu},
              {"nv", f.nv}}},
            {"output", {{"directory", s.output_directory}}},
            {"seed", s.seed}};
}

std::string scenario_hash(const ScenarioFile& scenario) { return sha256_hex(scenario_to_json(scenario).dump()); }

json scenario_schema() {
    json schema = schema_for("");
    schema["$schema"] = "https://json-schema.org/draft/2020-12/schema";
    schema["title"] = "ristwin scenario";
    return schema;
}

json RunManifest::to_json() const {
    json arts = json::array();
    for (const auto& a : artifacts) arts.push_back({{"path", a.path}, {"sha256", a.sha256}, {"bytes", a.bytes}});
    return {{"command", command},
            {"scenario_hash", scenario_hash},
            {"tool_version", tool_version},
            {"seed", seed},
            {"started_at", started_at},
            {"finished_at", finished_at},
            {"artifacts", std::move(arts)},
            {"results", results}};
}

std::string RunManifest::manifest_hash() const {
    json doc = to_json();
    doc.erase("started_at");
    doc.erase("finished_at");
    return sha256_hex(doc.dump());
}

RunManifest run_command(std::string_view command, const ScenarioFile& s, const std::filesystem::path& out_dir) {
    s.validate();
    std::filesystem::create_directories(out_dir);
    RunManifest m;
    m.command = std::string(command);
    m.scenario_hash = scenario_hash(s);
    m.tool_version = std::string(tool_version());
    m.seed = s.seed;
    m.started_at = utc_now();

    const PanelGeometry g = s.panel();
    const UnitCellModel cell = s.cell_model();

    if (command == "codebook") {
        json prov;
        const Codebook cb = s.selected_codebook(&prov);
        write_artifact(out_dir, "codebook.json", codebook_to_json(cb, prov).dump(2) + "\n", m);
        write_artifact(out_dir, "codebook.txt", to_digit_grid(cb), m);
        m.results = {{"kind", s.codebook.kind}, {"digits", to_digit_grid(cb)}};
    } else if (command == "fieldmap") {
        const Codebook cb = s.selected_codebook();
        const auto& f = s.fieldmap;
        const FieldSlice slice = field_slice(f.plane, f.fixed, f.u_min, f.u_max, f.v_min, f.v_max, f.nu, f.nv,
                                             reflection_pattern(cb, cell), s.transmitter, g);
        json doc = slice_to_json(slice);
        doc["codebook"] = to_digit_grid(cb);
        write_artifact(out_dir, "fieldmap.json", doc.dump() + "\n", m);
        const auto best = std::max_element(slice.power_db.begin(), slice.power_db.end());
        m.results = {{"max_power_db", *best}};
    } else if (command == "scan") {
        const Codebook cb = s.selected_codebook();
        const ScanResult scan = scan_segment(s.scan.start, s.scan.end, s.scan.samples, cb, s.transmitter, g, cell);
        const auto peaks = find_peaks(scan, s.scan.min_prominence_db);
        json pj = json::array();
        for (const auto& p : peaks) {
            pj.push_back({{"index", p.index},
                          {"point", vec_json(p.point)},
                          {"offset_m", p.offset},
                          {"power_db", p.power_db},
                          {"prominence_db", p.prominence_db}});
        }
        write_artifact(out_dir, "scan.csv", scan_to_csv(scan), m);
        write_artifact(out_dir, "scan.json", scan_to_json(scan).dump() + "\n", m);
        write_artifact(out_dir, "peaks.json", pj.dump(2) + "\n", m);
        m.results = {{"peaks", std::move(pj)}, {"reactive_near_field", scan.reactive_near_field}};
    } else if (command == "track") {
        const auto events = run_tracking(s.tracking_setup(), s.trajectory(), s.tracking.end_ms);
        write_artifact(out_dir, "events.jsonl", events_to_jsonl(events), m);
        write_artifact(out_dir, "summary.csv", events_summary_csv(events), m);
        json selected = json::array();
        for (const auto& e : events) {
            if (const auto* b = std::get_if<event::BeamSelected>(&e)) selected.push_back(b->b_max);
        }
        m.results = {{"events", events.size()}, {"selected", std::move(selected)}};
        if (s.tracking.ber_symbols > 0) {
            const BerResult ber = ber_monte_carlo(s.tracking.ber_snr_db, s.tracking.ber_symbols, s.seed);
            json bj{{"snr_db", s.tracking.ber_snr_db},
                    {"symbols", s.tracking.ber_symbols},
                    {"seed", s.seed},
                    {"bit_errors", ber.bit_errors},
                    {"bits", ber.bits},
                    {"ber", ber.ber},
                    {"below_fec_limit", ber.ber < kFecLimit}};
            write_artifact(out_dir, "ber.json", bj.dump(2) + "\n", m);
            m.results["ber"] = ber.ber;
        }
    } else if (command == "doppler") {
        const CodingSchedule schedule = s.doppler_schedule();
        const RxTimeSeries series = synthesize_rx(schedule, s.doppler.receiver, s.transmitter, g, s.doppler.synthesis);
        const Spectrum spectrum = spectrum_of(series, s.doppler.window);
        const double offset = dominant_offset(spectrum);
        json top = json::array();
        for (std::size_t i : top_bins(spectrum, 5)) {
            top.push_back({{"f_hz", spectrum.frequency_hz[i]}, {"magnitude_db", power_db(spectrum.magnitude[i])}});
        }
        json dj{{"offset_hz", offset},
                {"expected_hz", s.vortex.mode / s.vortex.period_s},
                {"resolution_hz", spectrum.resolution_hz},
                {"dwell_ms", schedule.dwell_s() * 1e3},
                {"top_bins", top}};
        write_artifact(out_dir, "series.csv", series_to_csv(series), m);
        write_artifact(out_dir, "spectrum.csv", spectrum_to_csv(spectrum), m);
        write_artifact(out_dir, "doppler.json", dj.dump(2) + "\n", m);
        m.results = {{"offset_hz", offset}, {"resolution_hz", spectrum.resolution_hz}};
    } else if (command == "frames") {
        const Codebook cb = s.selected_codebook();
        const auto frames = pins_to_frames(codebook_to_pins(cb), s.controlplane);
        json fj{{"refresh_latency_ms", s.refresh_latency_ms()},
                {"spi_transfer_time_s", spi_transfer_time(s.controlplane, s.controlplane.frame_bytes())},
                {"invert_polarity", s.controlplane.invert_polarity},
                {"frames", json::array()}};
        for (const auto& f : frames) fj["frames"].push_back({{"follower", f.follower}, {"hex", f.hex()}});
        write_artifact(out_dir, "frames.txt", frames_to_text(frames), m);
        write_artifact(out_dir, "frames.json", fj.dump(2) + "\n", m);
        m.results = {{"refresh_latency_ms", s.refresh_latency_ms()}};
    } else {
        throw ConfigError("unknown command '" + std::string(command) +
                          "' (expected codebook, fieldmap, scan, track, doppler or frames)");
    }

    m.finished_at = utc_now();
    json manifest = m.to_json();
    manifest["manifest_hash"] = m.manifest_hash();
    std::ofstream(out_dir / "manifest.json") << manifest.dump(2) << "\n";
    return m;
}

}  // namespace ristwin
