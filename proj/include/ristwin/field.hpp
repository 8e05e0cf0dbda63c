#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "ristwin/codebook.hpp"

namespace ristwin {

// Per-unit complex reflection coefficients; the field solver's input.
// A codebook maps onto one through the cell model, a continuous phase
// matrix through pattern_from_phases.
struct ReflectionPattern {
    int rows = 0;
    int cols = 0;
    std::vector<Complex> gamma;

    Complex at(int row, int col) const { return gamma[static_cast<std::size_t>(row * cols + col)]; }
};

ReflectionPattern reflection_pattern(const Codebook& codebook, const UnitCellModel& cell);
ReflectionPattern pattern_from_phases(const PhaseMatrix& phases, double magnitude = 1.0);

// Two-hop superposition, incident hop scaled by G, receive hop by 1:
//   Σ (Gλ/4πd_tx) e^{-jk d_tx} Γ (λ/4πd_rx) e^{-jk d_rx}
// summed row-major so results are bitwise reproducible.
Complex field_at(Vec3 point, const ReflectionPattern& pattern, const TransmitterSpec& tx,
                 const PanelGeometry& geometry);
Complex field_at(Vec3 point, const Codebook& codebook, const TransmitterSpec& tx, const PanelGeometry& geometry,
                 const UnitCellModel& cell);

// 20·log10|E|; -infinity for an exact zero.
double power_db(Complex field);

double rssi_db(Vec3 point, const Codebook& codebook, const TransmitterSpec& tx, const PanelGeometry& geometry,
               const UnitCellModel& cell, double reference_db = 0.0);

// Metal-plate baseline: uniform S0, lossless.
Complex specular_plate_field(Vec3 point, const TransmitterSpec& tx, const PanelGeometry& geometry);

struct FieldSample {
    Vec3 point;
    Complex field;
    double power_db = 0.0;
};

struct ScanResult {
    std::vector<FieldSample> samples;
    double spacing = 0.0;  // meters between consecutive samples
    std::optional<int> b_id;
    std::string geometry_hash;
    // Set when any sample lies within one wavelength of a unit cell.
    bool reactive_near_field = false;
};

ScanResult scan_segment(Vec3 start, Vec3 end, int n_samples, const ReflectionPattern& pattern,
                        const TransmitterSpec& tx, const PanelGeometry& geometry);
ScanResult scan_segment(Vec3 start, Vec3 end, int n_samples, const Codebook& codebook, const TransmitterSpec& tx,
                        const PanelGeometry& geometry, const UnitCellModel& cell);

struct Peak {
    int index = 0;
    Vec3 point;
    double offset = 0.0;  // distance from the scan start, meters
    double power_db = 0.0;
    double prominence_db = 0.0;
};

// Interior local maxima whose topographic prominence is at least
// min_prominence_db, strongest first. A flat-topped maximum reports its
// first sample.
std::vector<Peak> find_peaks(const ScanResult& scan, double min_prominence_db);

enum class SlicePlane { XY, XZ, YZ };

struct FieldSlice {
    SlicePlane plane = SlicePlane::XZ;
    double fixed = 0.0;  // coordinate of the axis normal to the plane
    double u_min = 0.0, u_max = 0.0, v_min = 0.0, v_max = 0.0;
    int nu = 0, nv = 0;
    std::vector<double> power_db;  // row-major, nv rows of nu values, v ascending
};

// Heatmap over a plane; u/v are (x,y), (x,z) or (y,z) for XY, XZ, YZ.
FieldSlice field_slice(SlicePlane plane, double fixed, double u_min, double u_max, double v_min, double v_max, int nu,
                       int nv, const ReflectionPattern& pattern, const TransmitterSpec& tx,
                       const PanelGeometry& geometry);

SlicePlane parse_plane(std::string_view name);
std::string plane_name(SlicePlane plane);

std::string geometry_hash(const PanelGeometry& geometry);

// columns: x,y,z,re,im,power_db
std::string scan_to_csv(const ScanResult& scan);
nlohmann::json scan_to_json(const ScanResult& scan);
nlohmann::json slice_to_json(const FieldSlice& slice);

}  // namespace ristwin
