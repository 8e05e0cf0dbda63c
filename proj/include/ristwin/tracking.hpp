#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "json.hpp"
#include "ristwin/field.hpp"

namespace ristwin {

// Scan timing, all in milliseconds. The RIS starts sweeping at
// T_s = T_u + τ, holds each beam for D_t, and the user samples T_a into
// every slot.
struct FrameTimeline {
    double processing_delay_ms = 1.0;  // T_d
    double slot_ms = 0.72;             // D_t
    double sample_offset_ms = 0.36;    // T_a
    std::optional<double> sync_margin_ms;  // τ; T_d when unset
    double clock_skew_bound_ms = 1.0;
    // Constant RIS-minus-user clock offset; |offset| <= skew bound.
    double clock_offset_ms = 0.0;

    double sync_margin() const { return sync_margin_ms.value_or(processing_delay_ms); }

    // Throws ConfigError on T_a >= D_t, τ < T_d, D_t below the control-plane
    // refresh latency, or an offset outside the skew bound.
    void validate(double refresh_latency_ms) const;
};

enum class ScanMode { FullScanArgmax, ThresholdEarlyExit };

std::string scan_mode_name(ScanMode mode);
ScanMode parse_scan_mode(std::string_view name);

struct TrackingConfig {
    double threshold_db = -92.0;  // g_t
    ScanMode mode = ScanMode::FullScanArgmax;
    double reference_db = 0.0;
    int initial_b_id = 0;
    std::optional<double> monitor_interval_ms;  // D_t when unset
};

struct Waypoint {
    double t_ms = 0.0;
    Vec3 position;
};

// Piecewise-linear path with strictly increasing times and z > 0; held
// constant outside the waypoint span.
class UserTrajectory {
public:
    // Gap used to model an instantaneous relocation.
    static constexpr double kJumpMs = 1e-6;

    UserTrajectory() = default;
    explicit UserTrajectory(std::vector<Waypoint> waypoints);

    static UserTrajectory stationary(Vec3 position, double t_ms = 0.0);

    Vec3 position_at(double t_ms) const;
    const std::vector<Waypoint>& waypoints() const { return waypoints_; }
    double start_ms() const { return waypoints_.front().t_ms; }
    double end_ms() const { return waypoints_.back().t_ms; }

    // Keeps the path up to t, then relocates to `position` kJumpMs later.
    // Scripted waypoints after t are discarded.
    UserTrajectory with_jump(double t_ms, Vec3 position) const;

private:
    std::vector<Waypoint> waypoints_;
};

namespace event {
struct PowerSample {
    double t_ms;
    double p_r_db;
    int b_id;  // codebook active at the sample
};
struct BelowThreshold {
    double t_ms;
};
struct ScanRequested {
    double t_ms;  // T_u
};
struct ScanStarted {
    double t_ms;  // T_s
};
struct SlotMeasured {
    double t_ms;
    int b_id;
    double u_r_db;
};
struct BeamSelected {
    double t_ms;
    int b_max;
    double p_r_db;
};
}  // namespace event

using TrackingEvent = std::variant<event::PowerSample, event::BelowThreshold, event::ScanRequested,
                                   event::ScanStarted, event::SlotMeasured, event::BeamSelected>;

double event_time(const TrackingEvent& e);
std::string event_kind(const TrackingEvent& e);
// {"t_ms", "kind", "b_id", "value_db"}; absent fields are null.
nlohmann::json event_to_json(const TrackingEvent& e);
std::string events_to_jsonl(const std::vector<TrackingEvent>& events);
// metric,value rows: scan_count, mean_locked_rssi_db, then t_tot_ms per scan.
std::string events_summary_csv(const std::vector<TrackingEvent>& events);

struct TrackingSetup {
    PanelGeometry geometry;
    UnitCellModel cell;
    TransmitterSpec tx;
    std::vector<Codebook> codebooks;  // index = B_ID
    TrackingConfig config;
    FrameTimeline timeline;
    double refresh_latency_ms = 0.72;

    int region_count() const { return static_cast<int>(codebooks.size()); }
    double monitor_interval() const { return config.monitor_interval_ms.value_or(timeline.slot_ms); }
    double rssi(Vec3 position, int b_id) const;

    void validate() const;
};

// t_tot = T_d + P·D_t
double total_scan_time(double processing_delay_ms, int regions, double slot_ms);

struct SlotMeasurement {
    double t_ms = 0.0;
    double u_r_db = 0.0;
    int active_b_id = 0;  // codebook the RIS actually had on at t_ms
};

// Sample of slot `b_id` for a sweep that started (user clock) at
// scan_start_ms. `idle_b_id` is what the RIS shows outside the sweep.
SlotMeasurement measure_slot(const TrackingSetup& setup, const UserTrajectory& trajectory, double scan_start_ms,
                             int b_id, int idle_b_id);

// Incremental executor of the monitor / scan / lock loop. Actions are
// evaluated lazily, so replacing the trajectory's future between calls to
// advance_to gives the same log as a batch run over the final trajectory.
class TrackingEngine {
public:
    TrackingEngine(std::shared_ptr<const TrackingSetup> setup, UserTrajectory trajectory, double start_ms);

    // Executes every pending action with time <= t_ms.
    std::vector<TrackingEvent> advance_to(double t_ms);

    // Caller guarantees the new path agrees with the old one up to clock().
    void set_trajectory(UserTrajectory trajectory) { trajectory_ = std::move(trajectory); }
    const UserTrajectory& trajectory() const { return trajectory_; }

    double clock() const { return clock_; }
    double next_action_ms() const { return next_ms_; }
    int active_b_id() const { return active_b_id_; }
    bool scanning() const { return phase_ != Phase::Monitor; }
    std::optional<double> last_power_db() const { return last_power_db_; }
    const TrackingSetup& setup() const { return *setup_; }

    // Replaces the active codebook without a scan (manual override).
    void force_beam(int b_id);

private:
    enum class Phase { Monitor, ScanStart, Slot, Select };

    void step(std::vector<TrackingEvent>& out);

    std::shared_ptr<const TrackingSetup> setup_;
    UserTrajectory trajectory_;
    Phase phase_ = Phase::Monitor;
    double clock_;
    double next_ms_;
    int active_b_id_;
    std::optional<double> last_power_db_;
    // sweep state
    double scan_start_ms_ = 0.0;
    int slot_ = 0;
    int best_b_id_ = 0;
    double best_db_ = 0.0;
    std::optional<int> early_b_id_;
};

// Runs from the trajectory start through end_ms (inclusive).
std::vector<TrackingEvent> run_tracking(const TrackingSetup& setup, const UserTrajectory& trajectory, double end_ms);

struct BerResult {
    double ber = 0.0;
    std::int64_t bit_errors = 0;
    std::int64_t bits = 0;
};

// Gray-coded 16-QAM over complex AWGN at the given Es/N0.
BerResult ber_monte_carlo(double snr_db, std::int64_t n_symbols, std::uint64_t seed);

inline constexpr double kFecLimit = 3.8e-3;

}  // namespace ristwin
