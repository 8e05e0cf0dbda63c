#include "ristwin/doppler.hpp"

#include <fftw3.h>

#include <algorithm>
#include <memory>
#include <numeric>

namespace ristwin {

namespace {

constexpr double kStepEpsilon = 1e-9;
constexpr double kTieTolerance = 1e-12;

void check_dwell(const VortexSpec& spec, double refresh_latency_ms) {
    const double dwell_ms = spec.period_s / spec.steps * 1e3;
    if (dwell_ms < refresh_latency_ms) {
        throw ConfigError("doppler: dwell " + format_double(dwell_ms) + " ms (T/Q) is shorter than the refresh latency " +
                          format_double(refresh_latency_ms) + " ms");
    }
}

struct FftwPlanDeleter {
    void operator()(fftw_plan_s* plan) const { fftw_destroy_plan(plan); }
};

struct FftwFree {
    void operator()(fftw_complex* p) const { fftw_free(p); }
};

}  // namespace

CodingSchedule rotating_schedule(const VortexSpec& spec, const PanelGeometry& geometry, const UnitCellModel& cell,
                                 double refresh_latency_ms) {
    spec.validate();
    cell.validate();
    check_dwell(spec, refresh_latency_ms);
    CodingSchedule out{spec, {}, {}};
    for (int q = 0; q < spec.steps; ++q) {
        out.codebooks.push_back(vortex_codebook(spec, q, geometry));
        out.patterns.push_back(reflection_pattern(out.codebooks.back(), cell));
    }
    return out;
}

CodingSchedule continuous_schedule(const VortexSpec& spec, const PanelGeometry& geometry,
                                   double refresh_latency_ms) {
    spec.validate();
    check_dwell(spec, refresh_latency_ms);
    CodingSchedule out{spec, {}, {}};
    for (int q = 0; q < spec.steps; ++q) out.patterns.push_back(pattern_from_phases(vortex_phase_matrix(spec, q, geometry)));
    return out;
}

RxTimeSeries synthesize_rx(const CodingSchedule& schedule, Vec3 receiver, const TransmitterSpec& tx,
                           const PanelGeometry& geometry, const SynthesisOptions& options) {
    if (schedule.patterns.empty()) throw ConfigError("synthesize_rx: empty schedule");
    if (!(options.sample_rate_hz > 0.0) || !(options.duration_s > 0.0)) {
        throw ConfigError("synthesize_rx: sample rate and duration must be > 0");
    }
    if (!(options.dead_time_s >= 0.0) || options.dead_time_s > schedule.dwell_s()) {
        throw ConfigError("synthesize_rx: dead time must lie in [0, dwell]");
    }
    const double shift = std::abs(schedule.vortex.mode) / schedule.period_s();
    if (!(options.sample_rate_hz > 2.0 * shift)) {
        throw ConfigError("synthesize_rx: sample rate " + format_double(options.sample_rate_hz) +
                          " Hz cannot resolve a shift of " + format_double(shift) + " Hz");
    }
    if (!(receiver.z > 0.0)) throw GeometryError("synthesize_rx: receiver needs z > 0");

    const int q_count = schedule.steps();
    std::vector<Complex> per_step;
    per_step.reserve(static_cast<std::size_t>(q_count));
    for (const auto& p : schedule.patterns) per_step.push_back(options.amplitude * field_at(receiver, p, tx, geometry));

    RxTimeSeries out;
    out.sample_rate_hz = options.sample_rate_hz;
    out.duration_s = options.duration_s;
    const auto n = static_cast<std::size_t>(std::llround(options.sample_rate_hz * options.duration_s));
    out.samples.reserve(n);
    const double dwell = schedule.dwell_s();
    auto step_at = [&](long long k) {
        const long long q = (k + options.start_step) % q_count;
        return static_cast<std::size_t>(q < 0 ? q + q_count : q);
    };
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / options.sample_rate_hz;
        const auto k = static_cast<long long>(std::floor(t / dwell + kStepEpsilon));
        const double into_step = t - static_cast<double>(k) * dwell;
        const bool held = options.dead_time_s > 0.0 && into_step < options.dead_time_s;
        out.samples.push_back(per_step[step_at(held ? k - 1 : k)]);
    }
    return out;
}

Window parse_window(std::string_view name) {
    if (name == "none") return Window::None;
    if (name == "hann") return Window::Hann;
    throw ConfigError("unknown window '" + std::string(name) + "' (expected none or hann)");
}

Spectrum spectrum_of(const RxTimeSeries& series, Window window) {
    const std::size_t n = series.samples.size();
    if (n < 2) throw ConfigError("spectrum_of: need at least 2 samples");
    std::unique_ptr<fftw_complex, FftwFree> buf(fftw_alloc_complex(n));
    for (std::size_t i = 0; i < n; ++i) {
        double w = 1.0;
        if (window == Window::Hann) w = 0.5 - 0.5 * std::cos(kTwoPi * static_cast<double>(i) / static_cast<double>(n));
        buf.get()[i][0] = w * series.samples[i].real();
        buf.get()[i][1] = w * series.samples[i].imag();
    }
    {
        std::unique_ptr<fftw_plan_s, FftwPlanDeleter> plan(
            fftw_plan_dft_1d(static_cast<int>(n), buf.get(), buf.get(), FFTW_FORWARD, FFTW_ESTIMATE));
        fftw_execute(plan.get());
    }

    Spectrum out;
    out.resolution_hz = series.sample_rate_hz / static_cast<double>(n);
    out.frequency_hz.reserve(n);
    out.magnitude.reserve(n);
    const auto half = static_cast<long long>(n / 2);
    const auto len = static_cast<long long>(n);
    for (long long i = 0; i < len; ++i) {
        const long long bin = i - half;
        const auto src = static_cast<std::size_t>((bin + len) % len);
        out.frequency_hz.push_back(static_cast<double>(bin) * out.resolution_hz);
        out.magnitude.push_back(std::hypot(buf.get()[src][0], buf.get()[src][1]) / static_cast<double>(n));
    }
    return out;
}

double dominant_offset(const Spectrum& spectrum) {
    if (spectrum.size() == 0) throw ConfigError("dominant_offset: empty spectrum");
    const double peak = *std::max_element(spectrum.magnitude.begin(), spectrum.magnitude.end());
    std::optional<double> best;
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        if (spectrum.magnitude[i] < peak * (1.0 - kTieTolerance)) continue;
        const double f = spectrum.frequency_hz[i];
        if (!best || std::abs(f) < std::abs(*best)) best = f;
    }
    return *best;
}

std::vector<std::size_t> top_bins(const Spectrum& spectrum, std::size_t k) {
    std::vector<std::size_t> idx(spectrum.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    k = std::min(k, idx.size());
    std::partial_sort(idx.begin(), idx.begin() + static_cast<std::ptrdiff_t>(k), idx.end(),
                      [&](std::size_t a, std::size_t b) {
                          if (spectrum.magnitude[a] != spectrum.magnitude[b]) {
                              return spectrum.magnitude[a] > spectrum.magnitude[b];
                          }
                          return a < b;
                      });
    idx.resize(k);
    return idx;
}

std::string series_to_csv(const RxTimeSeries& series) {
    std::string out = "t,re,im\n";
    for (std::size_t i = 0; i < series.samples.size(); ++i) {
        const double t = static_cast<double>(i) / series.sample_rate_hz;
        out += format_double(t) + "," + format_double(series.samples[i].real()) + "," +
               format_double(series.samples[i].imag()) + "\n";
    }
    return out;
}

std::string spectrum_to_csv(const Spectrum& spectrum) {
    std::string out = "f_hz,magnitude_db\n";
    for (std::size_t i = 0; i < spectrum.size(); ++i) {
        out += format_double(spectrum.frequency_hz[i]) + "," + format_double(power_db(spectrum.magnitude[i])) + "\n";
    }
    return out;
}

}  // namespace ristwin
