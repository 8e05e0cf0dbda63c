#pragma once

#include <string>
#include <vector>

#include "ristwin/field.hpp"

namespace ristwin {

// One period of a rotating vortex: step q is held for dwell = T/Q.
struct CodingSchedule {
    VortexSpec vortex;
    std::vector<ReflectionPattern> patterns;  // one per step
    std::vector<Codebook> codebooks;          // empty for a continuous-phase schedule

    int steps() const { return static_cast<int>(patterns.size()); }
    double period_s() const { return vortex.period_s; }
    double dwell_s() const { return vortex.period_s / vortex.steps; }
};

// Quantized schedule. Throws ConfigError when the dwell is shorter than the
// control-plane refresh latency.
CodingSchedule rotating_schedule(const VortexSpec& spec, const PanelGeometry& geometry, const UnitCellModel& cell,
                                 double refresh_latency_ms = 0.72);
// Same rotation with unquantized unit-magnitude phases.
CodingSchedule continuous_schedule(const VortexSpec& spec, const PanelGeometry& geometry,
                                   double refresh_latency_ms = 0.72);

struct SynthesisOptions {
    double sample_rate_hz = 1024.0;
    double duration_s = 4.0;
    double amplitude = 1.0;   // A_e
    double dead_time_s = 0.0;  // previous state held this long after each switch
    int start_step = 0;        // schedule index active at t = 0
};

struct RxTimeSeries {
    double sample_rate_hz = 0.0;
    double duration_s = 0.0;
    std::vector<Complex> samples;  // carrier removed
};

// Piecewise-constant baseband: sample n is A_e · field_at(receiver) under the
// step active at n / f_s.
RxTimeSeries synthesize_rx(const CodingSchedule& schedule, Vec3 receiver, const TransmitterSpec& tx,
                           const PanelGeometry& geometry, const SynthesisOptions& options);

enum class Window { None, Hann };

Window parse_window(std::string_view name);

struct Spectrum {
    std::vector<double> frequency_hz;  // ascending, 0 at index size()/2
    std::vector<double> magnitude;     // |X_k| / N
    double resolution_hz = 0.0;

    std::size_t size() const { return magnitude.size(); }
};

// Magnitudes are normalized so that Σ magnitude² equals the mean power of
// the (windowed) series.
Spectrum spectrum_of(const RxTimeSeries& series, Window window = Window::None);

// Frequency of the largest bin. Equal maxima resolve to the smallest |f|,
// then to the negative side.
double dominant_offset(const Spectrum& spectrum);

// Indices of the k largest bins, strongest first.
std::vector<std::size_t> top_bins(const Spectrum& spectrum, std::size_t k);

// columns: t,re,im
std::string series_to_csv(const RxTimeSeries& series);
// columns: f_hz,magnitude_db
std::string spectrum_to_csv(const Spectrum& spectrum);

}  // namespace ristwin
