#include "ristwin/tracking.hpp"

#include <algorithm>
#include <limits>
#include <random>

namespace ristwin {

namespace {

// Guards floor() against representation error at slot boundaries.
constexpr double kSlotEpsilon = 1e-9;

template <class... Ts>
struct Overloaded : Ts... {
    using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

nlohmann::json json_db(double value) { return std::isfinite(value) ? nlohmann::json(value) : nlohmann::json(-1000.0); }

}  // namespace

void FrameTimeline::validate(double refresh_latency_ms) const {
    if (!(slot_ms > 0.0)) throw ConfigError("timeline: slot_ms must be > 0");
    if (!(processing_delay_ms >= 0.0)) throw ConfigError("timeline: processing_delay_ms must be >= 0");
    if (!(sample_offset_ms >= 0.0) || !(sample_offset_ms < slot_ms)) {
        throw ConfigError("timeline: sample_offset_ms must lie in [0, slot_ms)");
    }
    if (sync_margin() < processing_delay_ms) {
        throw ConfigError("timeline: sync_margin_ms (" + format_double(sync_margin()) +
                          ") is shorter than processing_delay_ms (" + format_double(processing_delay_ms) + ")");
    }
    if (slot_ms < refresh_latency_ms) {
        throw ConfigError("timeline.slot_ms (" + format_double(slot_ms) +
                          ") is shorter than controlplane refresh latency (" + format_double(refresh_latency_ms) +
                          " ms)");
    }
    if (!(clock_skew_bound_ms >= 0.0) || !(std::abs(clock_offset_ms) <= clock_skew_bound_ms)) {
        throw ConfigError("timeline: |clock_offset_ms| exceeds clock_skew_bound_ms");
    }
}

std::string scan_mode_name(ScanMode mode) {
    return mode == ScanMode::FullScanArgmax ? "full_scan_argmax" : "threshold_early_exit";
}

ScanMode parse_scan_mode(std::string_view name) {
    if (name == "full_scan_argmax") return ScanMode::FullScanArgmax;
    if (name == "threshold_early_exit") return ScanMode::ThresholdEarlyExit;
    throw ConfigError("unknown scan mode '" + std::string(name) +
                      "' (expected full_scan_argmax or threshold_early_exit)");
}

UserTrajectory::UserTrajectory(std::vector<Waypoint> waypoints) : waypoints_(std::move(waypoints)) {
    if (waypoints_.empty()) throw ConfigError("trajectory: need at least one waypoint");
    for (std::size_t i = 0; i < waypoints_.size(); ++i) {
        const auto& w = waypoints_[i];
        if (!std::isfinite(w.t_ms)) throw ConfigError("trajectory: waypoint time is not finite");
        if (i > 0 && !(w.t_ms > waypoints_[i - 1].t_ms)) {
            throw ConfigError("trajectory: waypoint times must be strictly increasing");
        }
        if (!(w.position.z > 0.0)) {
            throw GeometryError("trajectory: waypoint " + std::to_string(i) + " needs z > 0");
        }
    }
}

UserTrajectory UserTrajectory::stationary(Vec3 position, double t_ms) { return UserTrajectory({{t_ms, position}}); }

Vec3 UserTrajectory::position_at(double t_ms) const {
    if (t_ms <= waypoints_.front().t_ms) return waypoints_.front().position;
    if (t_ms >= waypoints_.back().t_ms) return waypoints_.back().position;
    auto hi = std::upper_bound(waypoints_.begin(), waypoints_.end(), t_ms,
                               [](double t, const Waypoint& w) { return t < w.t_ms; });
    auto lo = std::prev(hi);
    const double a = (t_ms - lo->t_ms) / (hi->t_ms - lo->t_ms);
    return lo->position + a * (hi->position - lo->position);
}

UserTrajectory UserTrajectory::with_jump(double t_ms, Vec3 position) const {
    std::vector<Waypoint> kept;
    for (const auto& w : waypoints_) {
        if (w.t_ms <= t_ms) kept.push_back(w);
    }
    if (kept.empty() || kept.back().t_ms < t_ms) kept.push_back({t_ms, position_at(t_ms)});
    kept.push_back({t_ms + kJumpMs, position});
    return UserTrajectory(std::move(kept));
}

double event_time(const TrackingEvent& e) {
    return std::visit([](const auto& ev) { return ev.t_ms; }, e);
}

std::string event_kind(const TrackingEvent& e) {
    return std::visit(Overloaded{
                          [](const event::PowerSample&) { return std::string("power_sample"); },
                          [](const event::BelowThreshold&) { return std::string("below_threshold"); },
                          [](const event::ScanRequested&) { return std::string("scan_requested"); },
                          [](const event::ScanStarted&) { return std::string("scan_started"); },
                          [](const event::SlotMeasured&) { return std::string("slot_measured"); },
                          [](const event::BeamSelected&) { return std::string("beam_selected"); },
                      },
                      e);
}

nlohmann::json event_to_json(const TrackingEvent& e) {
    nlohmann::json out{{"t_ms", event_time(e)}, {"kind", event_kind(e)}, {"b_id", nullptr}, {"value_db", nullptr}};
    std::visit(Overloaded{
                   [&](const event::PowerSample& ev) {
                       out["b_id"] = ev.b_id;
                       out["value_db"] = json_db(ev.p_r_db);
                   },
                   [&](const event::SlotMeasured& ev) {
                       out["b_id"] = ev.b_id;
                       out["value_db"] = json_db(ev.u_r_db);
                   },
                   [&](const event::BeamSelected& ev) {
                       out["b_id"] = ev.b_max;
                       out["value_db"] = json_db(ev.p_r_db);
                   },
                   [](const auto&) {},
               },
               e);
    return out;
}

std::string events_to_jsonl(const std::vector<TrackingEvent>& events) {
    std::string out;
    for (const auto& e : events) out += event_to_json(e).dump() + "\n";
    return out;
}

std::string events_summary_csv(const std::vector<TrackingEvent>& events) {
    std::vector<double> t_tot;
    double locked_sum = 0.0;
    int locked = 0;
    std::optional<double> requested;
    for (const auto& e : events) {
        if (const auto* r = std::get_if<event::ScanRequested>(&e)) requested = r->t_ms;
        if (const auto* s = std::get_if<event::BeamSelected>(&e)) {
            if (requested) t_tot.push_back(s->t_ms - *requested);
            requested.reset();
            locked_sum += s->p_r_db;
            ++locked;
        }
    }
    std::string out = "metric,value\n";
    out += "scan_count," + std::to_string(t_tot.size()) + "\n";
    out += "mean_locked_rssi_db," +
           (locked ? format_double(locked_sum / locked) : std::string("nan")) + "\n";
    for (std::size_t i = 0; i < t_tot.size(); ++i) {
        out += "t_tot_ms_" + std::to_string(i) + "," + format_double(t_tot[i]) + "\n";
    }
    return out;
}

double TrackingSetup::rssi(Vec3 position, int b_id) const {
    return rssi_db(position, codebooks.at(static_cast<std::size_t>(b_id)), tx, geometry, cell, config.reference_db);
}

void TrackingSetup::validate() const {
    if (codebooks.empty()) throw ConfigError("tracking: codebook set is empty");
    for (std::size_t i = 0; i < codebooks.size(); ++i) {
        if (!codebooks[i].fits(geometry)) {
            throw ConfigError("tracking: codebook " + std::to_string(i) + " does not match the panel dimensions");
        }
    }
    if (config.initial_b_id < 0 || config.initial_b_id >= region_count()) {
        throw ConfigError("tracking: initial_b_id " + std::to_string(config.initial_b_id) + " is outside [0, " +
                          std::to_string(region_count()) + ")");
    }
    if (!(monitor_interval() > 0.0)) throw ConfigError("tracking: monitor_interval_ms must be > 0");
    if (!std::isfinite(config.threshold_db)) throw ConfigError("tracking: threshold_db must be finite");
    cell.validate();
    tx.validate();
    timeline.validate(refresh_latency_ms);
}

double total_scan_time(double processing_delay_ms, int regions, double slot_ms) {
    if (regions < 1) throw ConfigError("total_scan_time: need at least one region");
    return processing_delay_ms + regions * slot_ms;
}

SlotMeasurement measure_slot(const TrackingSetup& setup, const UserTrajectory& trajectory, double scan_start_ms,
                             int b_id, int idle_b_id) {
    const auto& tl = setup.timeline;
    const int regions = setup.region_count();
    if (b_id < 0 || b_id >= regions) throw IndexError("measure_slot: slot " + std::to_string(b_id) + " out of range");
    SlotMeasurement out;
    out.t_ms = scan_start_ms + b_id * tl.slot_ms + tl.sample_offset_ms;
    // The RIS runs its own sweep from scan_start + offset on the user clock.
    const double ris_elapsed = out.t_ms - (scan_start_ms + tl.clock_offset_ms);
    const int shown = static_cast<int>(std::floor(ris_elapsed / tl.slot_ms + kSlotEpsilon));
    if (shown < 0) {
        out.active_b_id = idle_b_id;
    } else {
        out.active_b_id = std::min(shown, regions - 1);
    }
    out.u_r_db = setup.rssi(trajectory.position_at(out.t_ms), out.active_b_id);
    return out;
}

TrackingEngine::TrackingEngine(std::shared_ptr<const TrackingSetup> setup, UserTrajectory trajectory,
                               double start_ms)
    : setup_(std::move(setup)),
      trajectory_(std::move(trajectory)),
      clock_(start_ms),
      next_ms_(start_ms),
      active_b_id_(0) {
    if (!setup_) throw ConfigError("tracking: missing setup");
    setup_->validate();
    active_b_id_ = setup_->config.initial_b_id;
}

std::vector<TrackingEvent> TrackingEngine::advance_to(double t_ms) {
    std::vector<TrackingEvent> out;
    while (next_ms_ <= t_ms) step(out);
    clock_ = std::max(clock_, t_ms);
    return out;
}

void TrackingEngine::force_beam(int b_id) {
    if (b_id < 0 || b_id >= setup_->region_count()) {
        throw IndexError("force_beam: b_id " + std::to_string(b_id) + " out of range");
    }
    active_b_id_ = b_id;
}

void TrackingEngine::step(std::vector<TrackingEvent>& out) {
    const TrackingSetup& s = *setup_;
    const auto& tl = s.timeline;
    const double now = next_ms_;
    clock_ = std::max(clock_, now);
    switch (phase_) {
        case Phase::Monitor: {
            const double p = s.rssi(trajectory_.position_at(now), active_b_id_);
            last_power_db_ = p;
            out.emplace_back(event::PowerSample{now, p, active_b_id_});
            if (p < s.config.threshold_db) {
                out.emplace_back(event::BelowThreshold{now});
                out.emplace_back(event::ScanRequested{now});
                scan_start_ms_ = now + tl.sync_margin();
                phase_ = Phase::ScanStart;
                next_ms_ = scan_start_ms_;
            } else {
                next_ms_ = now + s.monitor_interval();
            }
            break;
        }
        case Phase::ScanStart:
            out.emplace_back(event::ScanStarted{now});
            slot_ = 0;
            best_b_id_ = 0;
            best_db_ = -std::numeric_limits<double>::infinity();
            early_b_id_.reset();
            phase_ = Phase::Slot;
            next_ms_ = scan_start_ms_ + tl.sample_offset_ms;
            break;
        case Phase::Slot: {
            const SlotMeasurement m = measure_slot(s, trajectory_, scan_start_ms_, slot_, active_b_id_);
            out.emplace_back(event::SlotMeasured{now, slot_, m.u_r_db});
            // strict comparison keeps the lowest B_ID on ties
            if (m.u_r_db > best_db_ || slot_ == 0) {
                best_db_ = m.u_r_db;
                best_b_id_ = slot_;
            }
            if (s.config.mode == ScanMode::ThresholdEarlyExit && m.u_r_db >= s.config.threshold_db) {
                early_b_id_ = slot_;
                phase_ = Phase::Select;
                next_ms_ = scan_start_ms_ + (slot_ + 1) * tl.slot_ms;
                break;
            }
            ++slot_;
            if (slot_ == s.region_count()) {
                phase_ = Phase::Select;
                next_ms_ = scan_start_ms_ + s.region_count() * tl.slot_ms;
            } else {
                next_ms_ = scan_start_ms_ + slot_ * tl.slot_ms + tl.sample_offset_ms;
            }
            break;
        }
        case Phase::Select: {
            active_b_id_ = early_b_id_.value_or(best_b_id_);
            const double p = s.rssi(trajectory_.position_at(now), active_b_id_);
            last_power_db_ = p;
            out.emplace_back(event::BeamSelected{now, active_b_id_, p});
            phase_ = Phase::Monitor;
            next_ms_ = now + s.monitor_interval();
            break;
        }
    }
}

std::vector<TrackingEvent> run_tracking(const TrackingSetup& setup, const UserTrajectory& trajectory,
                                        double end_ms) {
    TrackingEngine engine(std::make_shared<const TrackingSetup>(setup), trajectory, trajectory.start_ms());
    return engine.advance_to(end_ms);
}

BerResult ber_monte_carlo(double snr_db, std::int64_t n_symbols, std::uint64_t seed) {
    if (n_symbols < 1) throw ConfigError("ber: need at least one symbol");
    if (!std::isfinite(snr_db)) throw ConfigError("ber: snr_db must be finite");
    const double scale = 1.0 / std::sqrt(10.0);
    const double n0 = std::pow(10.0, -snr_db / 10.0);
    const double sigma = std::sqrt(n0 / 2.0);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, sigma);

    // Gray map per axis: 00 -> -3, 01 -> -1, 11 -> +1, 10 -> +3.
    auto level = [](unsigned b0, unsigned b1) -> double {
        if (b0 == 0) return b1 == 0 ? -3.0 : -1.0;
        return b1 == 1 ? 1.0 : 3.0;
    };
    auto decide = [scale](double r, unsigned& b0, unsigned& b1) {
        b0 = r > 0.0 ? 1u : 0u;
        b1 = std::abs(r) < 2.0 * scale ? 1u : 0u;
    };

    BerResult out;
    for (std::int64_t i = 0; i < n_symbols; ++i) {
        const auto word = rng();
        const unsigned bits[4] = {static_cast<unsigned>(word & 1u), static_cast<unsigned>((word >> 1) & 1u),
                                  static_cast<unsigned>((word >> 2) & 1u), static_cast<unsigned>((word >> 3) & 1u)};
        const double re = level(bits[0], bits[1]) * scale + noise(rng);
        const double im = level(bits[2], bits[3]) * scale + noise(rng);
        unsigned d[4];
        decide(re, d[0], d[1]);
        decide(im, d[2], d[3]);
        for (int k = 0; k < 4; ++k) out.bit_errors += bits[k] != d[k];
    }
    out.bits = 4 * n_symbols;
    out.ber = static_cast<double>(out.bit_errors) / static_cast<double>(out.bits);
    return out;
}

}  // namespace ristwin
