#include "ristwin/panel.hpp"

#include <algorithm>
#include <string>

namespace ristwin {

namespace {

// Nominal relative permittivity of the TLX-8 laminate carrying the delay lines.
constexpr double kLaminatePermittivity = 2.55;

}  // namespace

PanelGeometry::PanelGeometry(int rows, int cols, double pitch_x, double pitch_y,
                             double carrier_frequency_hz)
    : rows_(rows), cols_(cols), pitch_x_(pitch_x), pitch_y_(pitch_y), frequency_(carrier_frequency_hz) {
    if (rows < 1 || cols < 1) {
        throw ConfigError("panel: rows and cols must be >= 1 (got " + std::to_string(rows) + "x" +
                          std::to_string(cols) + ")");
    }
    if (!(pitch_x > 0.0) || !(pitch_y > 0.0)) throw ConfigError("panel: pitch must be > 0");
    if (!(carrier_frequency_hz > 0.0) || !std::isfinite(carrier_frequency_hz)) {
        throw ConfigError("panel: carrier frequency must be > 0");
    }
    wavelength_ = kSpeedOfLight / frequency_;
    wave_number_ = kTwoPi / wavelength_;
}

PanelGeometry PanelGeometry::standard() {
    return with_wavelength_pitch(kDefaultRows, kDefaultCols, kDefaultFrequencyHz, kDefaultPitchWavelengths);
}

PanelGeometry PanelGeometry::with_wavelength_pitch(int rows, int cols, double frequency_hz,
                                                   double pitch_in_wavelengths) {
    if (!(frequency_hz > 0.0)) throw ConfigError("panel: carrier frequency must be > 0");
    const double pitch = pitch_in_wavelengths * kSpeedOfLight / frequency_hz;
    return PanelGeometry(rows, cols, pitch, pitch, frequency_hz);
}

double PanelGeometry::aperture_diagonal() const {
    const double wx = cols_ * pitch_x_;
    const double wy = rows_ * pitch_y_;
    return std::sqrt(wx * wx + wy * wy);
}

double PanelGeometry::far_field_distance() const {
    const double d = aperture_diagonal();
    return 2.0 * d * d / wavelength_;
}

PhaseState state_from_index(int index) {
    if (index < 0 || index > 3) throw DomainError("phase state index out of range: " + std::to_string(index));
    return static_cast<PhaseState>(index);
}

double center_phase(PhaseState s) { return index_of(s) * (kPi / 2.0); }

UnitCellModel UnitCellModel::standard(double free_space_wavelength) {
    UnitCellModel cell;
    cell.guided_wavelength = free_space_wavelength / std::sqrt(kLaminatePermittivity);
    cell.initial_length = cell.dims.line_lengths[0];
    return cell;
}

UnitCellModel UnitCellModel::ideal() {
    UnitCellModel cell = standard(kSpeedOfLight / PanelGeometry::kDefaultFrequencyHz);
    cell.loss_db = {0.0, 0.0, 0.0, 0.0};
    return cell;
}

void UnitCellModel::validate() const {
    if (!(guided_wavelength > 0.0)) throw ConfigError("cell: guided_wavelength must be > 0");
    if (!(initial_length >= 0.0)) throw ConfigError("cell: initial_length must be >= 0");
    for (int s = 0; s < 4; ++s) {
        if (!(loss_db[s] >= 0.0) || loss_db[s] > kMaxLossDb) {
            throw ConfigError("cell: loss_db[" + std::to_string(s) + "] = " + format_double(loss_db[s]) +
                              " outside [0, 0.6] dB");
        }
        if (!std::isfinite(phase_error_deg[s])) throw ConfigError("cell: phase error must be finite");
    }
}

Vec3 unit_position(const PanelGeometry& geometry, int m, int n) {
    if (m < 1 || m > geometry.rows() || n < 1 || n > geometry.cols()) {
        throw IndexError("unit (" + std::to_string(m) + "," + std::to_string(n) + ") outside " +
                         std::to_string(geometry.rows()) + "x" + std::to_string(geometry.cols()) + " panel");
    }
    const double x = (n - (geometry.cols() + 1) / 2.0) * geometry.pitch_x();
    const double y = ((geometry.rows() + 1) / 2.0 - m) * geometry.pitch_y();
    return {x, y, 0.0};
}

double delay_line_length(double delta_phi, const UnitCellModel& cell) {
    if (!std::isfinite(delta_phi)) throw DomainError("delay_line_length: phase must be finite");
    return wrap_phase(delta_phi) * cell.guided_wavelength / kTwoPi + cell.initial_length;
}

PhaseState quantize_phase(double theta) {
    if (!std::isfinite(theta)) throw DomainError("quantize_phase: phase must be finite");
    const double x = wrap_phase(theta) / (kPi / 2.0);
    const int lower = static_cast<int>(std::floor(x)) % 4;
    const int upper = (lower + 1) % 4;
    const double frac = x - std::floor(x);
    if (frac < 0.5) return state_from_index(lower);
    if (frac > 0.5) return state_from_index(upper);
    return state_from_index(std::min(lower, upper));
}

Complex reflection_coefficient(PhaseState state, const UnitCellModel& cell) {
    const int s = index_of(state);
    const double magnitude = std::pow(10.0, -cell.loss_db[s] / 20.0);
    const double argument = center_phase(state) + deg_to_rad(cell.phase_error_deg[s]);
    return std::polar(magnitude, argument);
}

}  // namespace ristwin
