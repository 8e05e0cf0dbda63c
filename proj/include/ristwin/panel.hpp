#pragma once

#include <array>
#include <cstdint>

#include "ristwin/common.hpp"

namespace ristwin {

// Planar M x N array in the x-y plane, centered on the origin, normal +z.
// Immutable once constructed.
class PanelGeometry {
public:
    static constexpr double kDefaultFrequencyHz = 10.7e9;
    static constexpr int kDefaultRows = 10;
    static constexpr int kDefaultCols = 10;
    static constexpr double kDefaultPitchWavelengths = 0.6;

    // Throws ConfigError when any dimension or the frequency is not positive.
    PanelGeometry(int rows, int cols, double pitch_x, double pitch_y, double carrier_frequency_hz);

    // 10 x 10 at 10.7 GHz with 0.6λ pitch on both axes.
    static PanelGeometry standard();
    static PanelGeometry with_wavelength_pitch(int rows, int cols, double frequency_hz,
                                               double pitch_in_wavelengths);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    int unit_count() const { return rows_ * cols_; }
    double pitch_x() const { return pitch_x_; }
    double pitch_y() const { return pitch_y_; }
    double carrier_frequency() const { return frequency_; }
    double wavelength() const { return wavelength_; }
    double wave_number() const { return wave_number_; }

    // Largest extent of the aperture (corner-to-corner of the unit centers
    // plus one pitch), used for the 2D²/λ far-field bound.
    double aperture_diagonal() const;
    double far_field_distance() const;

    friend bool operator==(const PanelGeometry&, const PanelGeometry&) = default;

private:
    int rows_;
    int cols_;
    double pitch_x_;
    double pitch_y_;
    double frequency_;
    double wavelength_;
    double wave_number_;
};

enum class PhaseState : std::uint8_t { S0 = 0, S1 = 1, S2 = 2, S3 = 3 };

inline constexpr int index_of(PhaseState s) { return static_cast<int>(s); }
PhaseState state_from_index(int index);
// 0, π/2, π, 3π/2
double center_phase(PhaseState s);

struct UnitCellModel {
    double guided_wavelength = 0.0;  // λc, meters
    double initial_length = 0.0;     // δ, meters
    std::array<double, 4> loss_db{0.3, 0.3, 0.3, 0.3};
    std::array<double, 4> phase_error_deg{0.0, 0.0, 0.0, 0.0};

    // Informational only; never used in computation.
    struct Dimensions {
        double patch_a = 13.8e-3;
        double patch_b = 8.3e-3;
        std::array<double, 4> line_lengths{3.46e-3, 3.84e-3, 5.64e-3, 7.64e-3};
    } dims;

    static constexpr double kMaxLossDb = 0.6;

    // Nominal cell for a free-space wavelength: λc on a 2.55 permittivity
    // laminate, δ = l0.
    static UnitCellModel standard(double free_space_wavelength);
    // All four states lossless and error-free.
    static UnitCellModel ideal();

    double phase_constant() const { return kTwoPi / guided_wavelength; }

    // Throws ConfigError if a loss is negative or above kMaxLossDb, or λc <= 0.
    void validate() const;
};

// 1-based indices, m = row (top to bottom), n = column (left to right).
Vec3 unit_position(const PanelGeometry& geometry, int m, int n);

// L = Δφ·λc/(2π) + δ with Δφ wrapped into [0, 2π).
double delay_line_length(double delta_phi, const UnitCellModel& cell);

// Nearest of the four state centers. Exact ties at odd multiples of π/4
// resolve to the lower state index (the 7π/4 tie resolves to S0).
PhaseState quantize_phase(double theta);

Complex reflection_coefficient(PhaseState state, const UnitCellModel& cell);

}  // namespace ristwin
