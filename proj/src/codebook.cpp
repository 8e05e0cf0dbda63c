#include "ristwin/codebook.hpp"

#include <algorithm>

namespace ristwin {

namespace {

// Distances shorter than this count as coincident points.
constexpr double kCoincidentTolerance = 1e-12;

}  // namespace

Codebook::Codebook(int rows, int cols, PhaseState fill) : rows_(rows), cols_(cols) {
    if (rows < 1 || cols < 1) throw ConfigError("codebook: dimensions must be >= 1");
    states_.assign(static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols), fill);
}

Codebook::Codebook(int rows, int cols, std::vector<PhaseState> states)
    : rows_(rows), cols_(cols), states_(std::move(states)) {
    if (rows < 1 || cols < 1) throw ConfigError("codebook: dimensions must be >= 1");
    if (states_.size() != static_cast<std::size_t>(rows) * static_cast<std::size_t>(cols)) {
        throw ConfigError("codebook: state count does not match dimensions");
    }
}

Codebook Codebook::uniform(const PanelGeometry& geometry, PhaseState state) {
    return Codebook(geometry.rows(), geometry.cols(), state);
}

std::size_t Codebook::index(int row, int col) const {
    if (row < 0 || row >= rows_ || col < 0 || col >= cols_) {
        throw IndexError("codebook index (" + std::to_string(row) + "," + std::to_string(col) + ") out of range");
    }
    return static_cast<std::size_t>(row) * static_cast<std::size_t>(cols_) + static_cast<std::size_t>(col);
}

Codebook quantize(const PhaseMatrix& phases) {
    std::vector<PhaseState> states;
    states.reserve(phases.values.size());
    for (double v : phases.values) states.push_back(quantize_phase(v));
    return Codebook(phases.rows, phases.cols, std::move(states));
}

void TransmitterSpec::validate() const {
    if (!(position.z > 0.0)) throw ConfigError("transmitter: z must be > 0");
    if (!(gain > 0.0) || !std::isfinite(gain)) throw ConfigError("transmitter: gain must be > 0");
}

void VortexSpec::validate() const {
    if (steps < 1) throw ConfigError("vortex: steps must be >= 1");
    if (!(period_s > 0.0) || !std::isfinite(period_s)) throw ConfigError("vortex: period must be > 0");
    if (!std::isfinite(initial_phase)) throw ConfigError("vortex: initial phase must be finite");
}

Vec3 direction_point(double azimuth_deg, double elevation_deg, double range_m) {
    const double az = deg_to_rad(azimuth_deg);
    const double el = deg_to_rad(elevation_deg);
    return {range_m * std::cos(el) * std::sin(az), range_m * std::sin(el), range_m * std::cos(el) * std::cos(az)};
}

double tx_unit_distance(const TransmitterSpec& tx, Vec3 unit) {
    const double d = distance(tx.position, unit);
    if (d < kCoincidentTolerance) throw GeometryError("transmitter coincides with a unit cell");
    return d;
}

Complex incident_field(const TransmitterSpec& tx, double d, const PanelGeometry& geometry) {
    if (!(d > 0.0)) throw DomainError("incident_field: distance must be > 0");
    const double amplitude = tx.gain * geometry.wavelength() / (4.0 * kPi * d);
    return std::polar(amplitude, -geometry.wave_number() * d);
}

double path_difference(Vec3 unit, Vec3 focus) { return distance(unit, focus) - focus.z; }

Complex spot_compensation_term(const TransmitterSpec& tx, Vec3 unit, Vec3 focus, const PanelGeometry& geometry) {
    const double d_tx = tx_unit_distance(tx, unit);
    const double d_focus = distance(unit, focus);
    if (d_focus < kCoincidentTolerance) throw GeometryError("focus coincides with a unit cell");
    const double lambda = geometry.wavelength();
    const double k = geometry.wave_number();
    const double magnitude = (4.0 * kPi) * (4.0 * kPi) * d_tx * d_focus / (tx.gain * lambda * lambda);
    return std::polar(magnitude, k * d_tx + k * path_difference(unit, focus));
}

PhaseMatrix spot_phase_matrix(const TransmitterSpec& tx, const FocusSet& foci, const PanelGeometry& geometry) {
    if (foci.empty()) throw ConfigError("spot codebook: focus set is empty");
    for (const auto& f : foci) {
        if (!(f.point.z > 0.0)) throw ConfigError("spot codebook: every focus needs z > 0");
    }
    PhaseMatrix out{geometry.rows(), geometry.cols(), {}};
    out.values.reserve(static_cast<std::size_t>(geometry.unit_count()));
    for (int m = 1; m <= geometry.rows(); ++m) {
        for (int n = 1; n <= geometry.cols(); ++n) {
            const Vec3 u = unit_position(geometry, m, n);
            Complex sum{0.0, 0.0};
            for (const auto& f : foci) sum += f.weight * spot_compensation_term(tx, u, f.point, geometry);
            out.values.push_back(std::arg(sum));
        }
    }
    return out;
}

Codebook spot_codebook(const TransmitterSpec& tx, const FocusSet& foci, const PanelGeometry& geometry) {
    return quantize(spot_phase_matrix(tx, foci, geometry));
}

FarFieldCodebook farfield_codebook(double azimuth_deg, double elevation_deg, double range_proxy,
                                   const TransmitterSpec& tx, const PanelGeometry& geometry) {
    if (!(range_proxy > 0.0)) throw ConfigError("farfield codebook: range proxy must be > 0");
    const Vec3 focus = direction_point(azimuth_deg, elevation_deg, range_proxy);
    if (!(focus.z > 0.0)) throw ConfigError("farfield codebook: direction must point into z > 0");
    FarFieldCodebook out{spot_codebook(tx, {{focus, 1.0}}, geometry), focus, geometry.far_field_distance(), {}};
    if (range_proxy < out.far_field_bound) {
        out.warning = "range proxy " + format_double(range_proxy) + " m is inside the far-field bound " +
                      format_double(out.far_field_bound) + " m";
    }
    return out;
}

FarFieldCodebook farfield_codebook(double azimuth_deg, double elevation_deg, const TransmitterSpec& tx,
                                   const PanelGeometry& geometry) {
    return farfield_codebook(azimuth_deg, elevation_deg, 10.0 * geometry.far_field_distance(), tx, geometry);
}

PhaseMatrix vortex_phase_matrix(const VortexSpec& spec, int step, const PanelGeometry& geometry) {
    spec.validate();
    if (step < 0 || step >= spec.steps) {
        throw IndexError("vortex step " + std::to_string(step) + " outside [0, " + std::to_string(spec.steps) + ")");
    }
    const double rotation = kTwoPi * spec.mode * static_cast<double>(step) / spec.steps;
    PhaseMatrix out{geometry.rows(), geometry.cols(), {}};
    out.values.reserve(static_cast<std::size_t>(geometry.unit_count()));
    for (int m = 1; m <= geometry.rows(); ++m) {
        for (int n = 1; n <= geometry.cols(); ++n) {
            const Vec3 u = unit_position(geometry, m, n);
            const double azimuth = (u.x == 0.0 && u.y == 0.0) ? 0.0 : std::atan2(u.y, u.x);
            out.values.push_back(spec.mode * azimuth + rotation + spec.initial_phase);
        }
    }
    return out;
}

Codebook vortex_codebook(const VortexSpec& spec, int step, const PanelGeometry& geometry) {
    return quantize(vortex_phase_matrix(spec, step, geometry));
}

RegionGrid region_grid(const RegionGridSpec& spec) {
    if (spec.azimuth_count < 1 || spec.elevation_count < 1 || spec.range_count < 1) {
        throw ConfigError("region grid: counts must be >= 1");
    }
    if (!(spec.azimuth_min_deg < spec.azimuth_max_deg) || !(spec.elevation_min_deg < spec.elevation_max_deg) ||
        !(spec.range_min_m < spec.range_max_m)) {
        throw ConfigError("region grid: bounds must satisfy min < max");
    }
    if (!(spec.range_min_m > 0.0)) throw ConfigError("region grid: range lower bound must be > 0");
    if (spec.azimuth_min_deg <= -90.0 || spec.azimuth_max_deg >= 90.0 || spec.elevation_min_deg <= -90.0 ||
        spec.elevation_max_deg >= 90.0) {
        throw ConfigError("region grid: angular bounds must stay inside the front half-space (|angle| < 90 deg)");
    }

    const double d_az = (spec.azimuth_max_deg - spec.azimuth_min_deg) / spec.azimuth_count;
    const double d_el = (spec.elevation_max_deg - spec.elevation_min_deg) / spec.elevation_count;
    const double d_r = (spec.range_max_m - spec.range_min_m) / spec.range_count;

    RegionGrid grid{spec, {}};
    int b_id = 0;
    // range-major, then elevation, then azimuth
    for (int ir = 0; ir < spec.range_count; ++ir) {
        for (int ie = 0; ie < spec.elevation_count; ++ie) {
            for (int ia = 0; ia < spec.azimuth_count; ++ia) {
                Region r;
                r.b_id = b_id++;
                r.azimuth_deg[0] = spec.azimuth_min_deg + ia * d_az;
                r.azimuth_deg[1] = r.azimuth_deg[0] + d_az;
                r.elevation_deg[0] = spec.elevation_min_deg + ie * d_el;
                r.elevation_deg[1] = r.elevation_deg[0] + d_el;
                r.range_m[0] = spec.range_min_m + ir * d_r;
                r.range_m[1] = r.range_m[0] + d_r;
                r.center = direction_point(r.azimuth_deg[0] + 0.5 * d_az, r.elevation_deg[0] + 0.5 * d_el,
                                           r.range_m[0] + 0.5 * d_r);
                grid.regions.push_back(r);
            }
        }
    }
    return grid;
}

std::vector<Codebook> region_codebooks(const RegionGrid& grid, const TransmitterSpec& tx,
                                       const PanelGeometry& geometry) {
    std::vector<Codebook> out;
    out.reserve(grid.regions.size());
    for (const auto& region : grid.regions) {
        Codebook cb = spot_codebook(tx, {{region.center, 1.0}}, geometry);
        cb.b_id = region.b_id;
        out.push_back(std::move(cb));
    }
    return out;
}

std::string to_digit_grid(const Codebook& codebook) {
    std::string out;
    out.reserve(static_cast<std::size_t>((codebook.cols() + 1) * codebook.rows()));
    for (int r = 0; r < codebook.rows(); ++r) {
        for (int c = 0; c < codebook.cols(); ++c) out.push_back(static_cast<char>('0' + index_of(codebook.at(r, c))));
        out.push_back('\n');
    }
    return out;
}

Codebook parse_digit_grid(std::string_view text) {
    std::vector<PhaseState> states;
    int rows = 0;
    int cols = -1;
    int line_no = 0;
    std::size_t pos = 0;
    while (pos <= text.size()) {
        const std::size_t end = std::min(text.find('\n', pos), text.size());
        std::string_view line = text.substr(pos, end - pos);
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        ++line_no;
        if (!line.empty()) {
            int width = 0;
            for (char ch : line) {
                if (ch < '0' || ch > '3') {
                    throw DecodeError("digit grid line " + std::to_string(line_no) + ": invalid character '" +
                                      std::string(1, ch) + "'");
                }
                states.push_back(static_cast<PhaseState>(ch - '0'));
                ++width;
            }
            if (cols >= 0 && width != cols) {
                throw DecodeError("digit grid line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(cols) + " digits, got " + std::to_string(width));
            }
            cols = width;
            ++rows;
        }
        if (end == text.size()) break;
        pos = end + 1;
    }
    if (rows == 0) throw DecodeError("digit grid is empty");
    return Codebook(rows, cols, std::move(states));
}

nlohmann::json codebook_to_json(const Codebook& codebook, const nlohmann::json& provenance) {
    nlohmann::json matrix = nlohmann::json::array();
    for (int r = 0; r < codebook.rows(); ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < codebook.cols(); ++c) row.push_back(index_of(codebook.at(r, c)));
        matrix.push_back(std::move(row));
    }
    nlohmann::json doc;
    doc["rows"] = codebook.rows();
    doc["cols"] = codebook.cols();
    doc["b_id"] = codebook.b_id ? nlohmann::json(*codebook.b_id) : nlohmann::json(nullptr);
    doc["matrix"] = std::move(matrix);
    doc["provenance"] = provenance;
    return doc;
}

Codebook codebook_from_json(const nlohmann::json& doc) {
    try {
        const auto& matrix = doc.at("matrix");
        const int rows = static_cast<int>(matrix.size());
        if (rows == 0) throw DecodeError("codebook json: empty matrix");
        const int cols = static_cast<int>(matrix.at(0).size());
        std::vector<PhaseState> states;
        for (const auto& row : matrix) {
            if (static_cast<int>(row.size()) != cols) throw DecodeError("codebook json: ragged matrix");
            for (const auto& v : row) states.push_back(state_from_index(v.get<int>()));
        }
        if (doc.contains("rows") && doc.at("rows").get<int>() != rows) throw DecodeError("codebook json: rows mismatch");
        if (doc.contains("cols") && doc.at("cols").get<int>() != cols) throw DecodeError("codebook json: cols mismatch");
        Codebook cb(rows, cols, std::move(states));
        if (doc.contains("b_id") && !doc.at("b_id").is_null()) cb.b_id = doc.at("b_id").get<int>();
        return cb;
    } catch (const nlohmann::json::exception& e) {
        throw DecodeError(std::string("codebook json: ") + e.what());
    } catch (const DomainError& e) {
        throw DecodeError(std::string("codebook json: ") + e.what());
    }
}

}  // namespace ristwin
