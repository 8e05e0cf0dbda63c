#include "ristwin/field.hpp"

#include <algorithm>
#include <limits>

namespace ristwin {

namespace {

constexpr double kCoincidentTolerance = 1e-12;

void check_pattern(const ReflectionPattern& pattern, const PanelGeometry& geometry) {
    if (pattern.rows != geometry.rows() || pattern.cols != geometry.cols() ||
        pattern.gamma.size() != static_cast<std::size_t>(geometry.unit_count())) {
        throw ConfigError("field: reflection pattern does not match the panel dimensions");
    }
}

double min_unit_distance(Vec3 point, const PanelGeometry& geometry) {
    double best = std::numeric_limits<double>::infinity();
    for (int m = 1; m <= geometry.rows(); ++m) {
        for (int n = 1; n <= geometry.cols(); ++n) best = std::min(best, distance(point, unit_position(geometry, m, n)));
    }
    return best;
}

double json_power(double p) { return std::isfinite(p) ? p : -1000.0; }

}  // namespace

ReflectionPattern reflection_pattern(const Codebook& codebook, const UnitCellModel& cell) {
    ReflectionPattern out{codebook.rows(), codebook.cols(), {}};
    out.gamma.reserve(codebook.states().size());
    std::array<Complex, 4> table{};
    for (int s = 0; s < 4; ++s) table[s] = reflection_coefficient(static_cast<PhaseState>(s), cell);
    for (PhaseState s : codebook.states()) out.gamma.push_back(table[index_of(s)]);
    return out;
}

ReflectionPattern pattern_from_phases(const PhaseMatrix& phases, double magnitude) {
    ReflectionPattern out{phases.rows, phases.cols, {}};
    out.gamma.reserve(phases.values.size());
    for (double p : phases.values) out.gamma.push_back(std::polar(magnitude, p));
    return out;
}

Complex field_at(Vec3 point, const ReflectionPattern& pattern, const TransmitterSpec& tx,
                 const PanelGeometry& geometry) {
    check_pattern(pattern, geometry);
    if (!(point.z > 0.0)) throw GeometryError("field_at: observation point needs z > 0");
    const double lambda = geometry.wavelength();
    const double k = geometry.wave_number();
    Complex sum{0.0, 0.0};
    std::size_t i = 0;
    for (int m = 1; m <= geometry.rows(); ++m) {
        for (int n = 1; n <= geometry.cols(); ++n, ++i) {
            const Vec3 u = unit_position(geometry, m, n);
            const double d_tx = tx_unit_distance(tx, u);
            const double d_rx = distance(u, point);
            if (d_rx < kCoincidentTolerance) throw GeometryError("field_at: observation point coincides with a unit");
            const double amplitude = (tx.gain * lambda / (4.0 * kPi * d_tx)) * (lambda / (4.0 * kPi * d_rx));
            sum += std::polar(amplitude, -k * (d_tx + d_rx)) * pattern.gamma[i];
        }
    }
    return sum;
}

Complex field_at(Vec3 point, const Codebook& codebook, const TransmitterSpec& tx, const PanelGeometry& geometry,
                 const UnitCellModel& cell) {
    if (!codebook.fits(geometry)) throw ConfigError("field: codebook does not match the panel dimensions");
    return field_at(point, reflection_pattern(codebook, cell), tx, geometry);
}

double power_db(Complex field) {
    const double mag = std::abs(field);
    if (mag == 0.0) return -std::numeric_limits<double>::infinity();
    return 20.0 * std::log10(mag);
}

double rssi_db(Vec3 point, const Codebook& codebook, const TransmitterSpec& tx, const PanelGeometry& geometry,
               const UnitCellModel& cell, double reference_db) {
    return power_db(field_at(point, codebook, tx, geometry, cell)) + reference_db;
}

Complex specular_plate_field(Vec3 point, const TransmitterSpec& tx, const PanelGeometry& geometry) {
    return field_at(point, Codebook::uniform(geometry), tx, geometry, UnitCellModel::ideal());
}

ScanResult scan_segment(Vec3 start, Vec3 end, int n_samples, const ReflectionPattern& pattern,
                        const TransmitterSpec& tx, const PanelGeometry& geometry) {
    if (n_samples < 2) throw ConfigError("scan_segment: need at least 2 samples");
    const double length = distance(start, end);
    if (length == 0.0) throw ConfigError("scan_segment: start and end coincide (zero-length segment)");
    if (!(start.z > 0.0) || !(end.z > 0.0)) throw GeometryError("scan_segment: samples need z > 0");

    ScanResult out;
    out.spacing = length / (n_samples - 1);
    out.geometry_hash = geometry_hash(geometry);
    out.samples.reserve(static_cast<std::size_t>(n_samples));
    const Vec3 step = (1.0 / (n_samples - 1)) * (end - start);
    for (int i = 0; i < n_samples; ++i) {
        // endpoints are exact
        const Vec3 p = (i == n_samples - 1) ? end : start + static_cast<double>(i) * step;
        const Complex e = field_at(p, pattern, tx, geometry);
        out.samples.push_back({p, e, power_db(e)});
        if (min_unit_distance(p, geometry) < geometry.wavelength()) out.reactive_near_field = true;
    }
    return out;
}

ScanResult scan_segment(Vec3 start, Vec3 end, int n_samples, const Codebook& codebook, const TransmitterSpec& tx,
                        const PanelGeometry& geometry, const UnitCellModel& cell) {
    if (!codebook.fits(geometry)) throw ConfigError("scan_segment: codebook does not match the panel dimensions");
    ScanResult out = scan_segment(start, end, n_samples, reflection_pattern(codebook, cell), tx, geometry);
    out.b_id = codebook.b_id;
    return out;
}

std::vector<Peak> find_peaks(const ScanResult& scan, double min_prominence_db) {
    const auto& s = scan.samples;
    const int n = static_cast<int>(s.size());
    std::vector<Peak> peaks;
    for (int i = 1; i + 1 < n; ++i) {
        const double p = s[i].power_db;
        if (!(p > s[i - 1].power_db)) continue;
        // walk across a plateau to find where it ends
        int j = i;
        while (j + 1 < n && s[j + 1].power_db == p) ++j;
        if (j + 1 >= n || !(s[j + 1].power_db < p)) continue;

        double left_min = p;
        for (int k = i - 1; k >= 0 && s[k].power_db <= p; --k) {
            left_min = std::min(left_min, s[k].power_db);
        }
        double right_min = p;
        for (int k = j + 1; k < n && s[k].power_db <= p; ++k) {
            right_min = std::min(right_min, s[k].power_db);
        }
        const double prominence = p - std::max(left_min, right_min);
        if (prominence >= min_prominence_db) {
            peaks.push_back({i, s[i].point, distance(s.front().point, s[i].point), p, prominence});
        }
        i = j;
    }
    std::stable_sort(peaks.begin(), peaks.end(), [](const Peak& a, const Peak& b) { return a.power_db > b.power_db; });
    return peaks;
}

FieldSlice field_slice(SlicePlane plane, double fixed, double u_min, double u_max, double v_min, double v_max, int nu,
                       int nv, const ReflectionPattern& pattern, const TransmitterSpec& tx,
                       const PanelGeometry& geometry) {
    if (nu < 2 || nv < 2) throw ConfigError("field_slice: resolution must be at least 2x2");
    if (!(u_min < u_max) || !(v_min < v_max)) throw ConfigError("field_slice: bounds must satisfy min < max");
    FieldSlice out{plane, fixed, u_min, u_max, v_min, v_max, nu, nv, {}};
    out.power_db.reserve(static_cast<std::size_t>(nu) * static_cast<std::size_t>(nv));
    for (int iv = 0; iv < nv; ++iv) {
        const double v = v_min + (v_max - v_min) * iv / (nv - 1);
        for (int iu = 0; iu < nu; ++iu) {
            const double u = u_min + (u_max - u_min) * iu / (nu - 1);
            Vec3 p;
            switch (plane) {
                case SlicePlane::XY: p = {u, v, fixed}; break;
                case SlicePlane::XZ: p = {u, fixed, v}; break;
                case SlicePlane::YZ: p = {fixed, u, v}; break;
            }
            out.power_db.push_back(power_db(field_at(p, pattern, tx, geometry)));
        }
    }
    return out;
}

SlicePlane parse_plane(std::string_view name) {
    if (name == "xy") return SlicePlane::XY;
    if (name == "xz") return SlicePlane::XZ;
    if (name == "yz") return SlicePlane::YZ;
    throw ConfigError("unknown slice plane '" + std::string(name) + "' (expected xy, xz or yz)");
}

std::string plane_name(SlicePlane plane) {
    switch (plane) {
        case SlicePlane::XY: return "xy";
        case SlicePlane::XZ: return "xz";
        case SlicePlane::YZ: return "yz";
    }
    return "xz";
}

std::string geometry_hash(const PanelGeometry& geometry) {
    const std::string canonical = std::to_string(geometry.rows()) + "," + std::to_string(geometry.cols()) + "," +
                                  format_double(geometry.pitch_x()) + "," + format_double(geometry.pitch_y()) + "," +
                                  format_double(geometry.carrier_frequency());
    return sha256_hex(canonical).substr(0, 16);
}

std::string scan_to_csv(const ScanResult& scan) {
    std::string out = "x,y,z,re,im,power_db\n";
    for (const auto& s : scan.samples) {
        out += format_double(s.point.x) + "," + format_double(s.point.y) + "," + format_double(s.point.z) + "," +
               format_double(s.field.real()) + "," + format_double(s.field.imag()) + "," + format_double(s.power_db) +
               "\n";
    }
    return out;
}

nlohmann::json scan_to_json(const ScanResult& scan) {
    nlohmann::json samples = nlohmann::json::array();
    for (const auto& s : scan.samples) {
        samples.push_back({{"x", s.point.x},
                           {"y", s.point.y},
                           {"z", s.point.z},
                           {"re", s.field.real()},
                           {"im", s.field.imag()},
                           {"power_db", json_power(s.power_db)}});
    }
    return {{"b_id", scan.b_id ? nlohmann::json(*scan.b_id) : nlohmann::json(nullptr)},
            {"geometry_hash", scan.geometry_hash},
            {"spacing_m", scan.spacing},
            {"reactive_near_field", scan.reactive_near_field},
            {"samples", std::move(samples)}};
}

nlohmann::json slice_to_json(const FieldSlice& slice) {
    nlohmann::json values = nlohmann::json::array();
    for (double p : slice.power_db) values.push_back(json_power(p));
    return {{"plane", plane_name(slice.plane)},
            {"fixed", slice.fixed},
            {"u_min", slice.u_min},
            {"u_max", slice.u_max},
            {"v_min", slice.v_min},
            {"v_max", slice.v_max},
            {"nu", slice.nu},
            {"nv", slice.nv},
            {"power_db", std::move(values)}};
}

}  // namespace ristwin
