#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ristwin/panel.hpp"

namespace ristwin {

// M x N grid of phase states. Indices are 0-based (row, col); row 0 is the
// top row (largest y), matching unit_position(m = row + 1, n = col + 1).
class Codebook {
public:
    Codebook(int rows, int cols, PhaseState fill = PhaseState::S0);
    Codebook(int rows, int cols, std::vector<PhaseState> states);

    static Codebook uniform(const PanelGeometry& geometry, PhaseState state = PhaseState::S0);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    PhaseState at(int row, int col) const { return states_[index(row, col)]; }
    void set(int row, int col, PhaseState s) { states_[index(row, col)] = s; }
    std::span<const PhaseState> states() const { return states_; }

    std::optional<int> b_id;

    bool fits(const PanelGeometry& geometry) const {
        return rows_ == geometry.rows() && cols_ == geometry.cols();
    }

    // Equality compares the state grid only, not the identifier.
    bool operator==(const Codebook& other) const {
        return rows_ == other.rows_ && cols_ == other.cols_ && states_ == other.states_;
    }

private:
    std::size_t index(int row, int col) const;

    int rows_;
    int cols_;
    std::vector<PhaseState> states_;
};

// Continuous (pre-quantization) phase per unit, radians, same layout as Codebook.
struct PhaseMatrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> values;

    double at(int row, int col) const { return values[static_cast<std::size_t>(row * cols + col)]; }
};

Codebook quantize(const PhaseMatrix& phases);

struct Focus {
    Vec3 point;
    double weight = 1.0;
};

using FocusSet = std::vector<Focus>;

struct TransmitterSpec {
    Vec3 position{0.0, 0.0, 2.5};
    double gain = 1.0;  // G

    void validate() const;
};

struct VortexSpec {
    int mode = 1;                   // topological charge l
    int steps = 12;                 // Q
    double period_s = 1.0 / 12.0;   // T
    double initial_phase = 0.0;     // Δ, radians

    void validate() const;
};

// Half-space partition in (azimuth, elevation, range). Azimuth is measured
// in the x-z plane from +z toward +x, elevation toward +y:
//   x = r cos(el) sin(az), y = r sin(el), z = r cos(el) cos(az).
struct RegionGridSpec {
    int azimuth_count = 5;
    int elevation_count = 2;
    int range_count = 2;
    double azimuth_min_deg = -60.0;
    double azimuth_max_deg = 60.0;
    double elevation_min_deg = -30.0;
    double elevation_max_deg = 30.0;
    double range_min_m = 0.3;
    double range_max_m = 3.0;
};

struct Region {
    int b_id = 0;
    Vec3 center;
    double azimuth_deg[2]{};
    double elevation_deg[2]{};
    double range_m[2]{};
};

struct RegionGrid {
    RegionGridSpec spec;
    std::vector<Region> regions;

    int size() const { return static_cast<int>(regions.size()); }
};

Vec3 direction_point(double azimuth_deg, double elevation_deg, double range_m);

// Spot-codebook building blocks.
double tx_unit_distance(const TransmitterSpec& tx, Vec3 unit);
Complex incident_field(const TransmitterSpec& tx, double distance, const PanelGeometry& geometry);
double path_difference(Vec3 unit, Vec3 focus);
Complex spot_compensation_term(const TransmitterSpec& tx, Vec3 unit, Vec3 focus,
                               const PanelGeometry& geometry);

// arg of the weighted vector sum of compensation terms over all foci.
PhaseMatrix spot_phase_matrix(const TransmitterSpec& tx, const FocusSet& foci, const PanelGeometry& geometry);
Codebook spot_codebook(const TransmitterSpec& tx, const FocusSet& foci, const PanelGeometry& geometry);

struct FarFieldCodebook {
    Codebook codebook;
    Vec3 focus;
    double far_field_bound = 0.0;  // 2D²/λ
    std::optional<std::string> warning;
};

// Steering is the single-focus spot codebook with the focus pushed out to
// range_proxy along (azimuth, elevation). A range below 2D²/λ still returns
// a codebook but carries a warning.
FarFieldCodebook farfield_codebook(double azimuth_deg, double elevation_deg, double range_proxy,
                                   const TransmitterSpec& tx, const PanelGeometry& geometry);
// Range proxy defaults to ten times the far-field bound.
FarFieldCodebook farfield_codebook(double azimuth_deg, double elevation_deg, const TransmitterSpec& tx,
                                   const PanelGeometry& geometry);

// l·φ + 2π·l·q/Q + Δ per unit; a unit exactly at the origin uses φ = 0.
PhaseMatrix vortex_phase_matrix(const VortexSpec& spec, int step, const PanelGeometry& geometry);
Codebook vortex_codebook(const VortexSpec& spec, int step, const PanelGeometry& geometry);

RegionGrid region_grid(const RegionGridSpec& spec);
// One single-focus codebook per region center, b_id = region index.
std::vector<Codebook> region_codebooks(const RegionGrid& grid, const TransmitterSpec& tx,
                                       const PanelGeometry& geometry);

// Text form: one line of digits 0-3 per row.
std::string to_digit_grid(const Codebook& codebook);
Codebook parse_digit_grid(std::string_view text);

nlohmann::json codebook_to_json(const Codebook& codebook, const nlohmann::json& provenance = nlohmann::json::object());
Codebook codebook_from_json(const nlohmann::json& doc);

}  // namespace ristwin
