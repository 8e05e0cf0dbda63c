#include <random>

#include "../support/oracle.hpp"
#include "doctest.h"
#include "ristwin/field.hpp"

using namespace ristwin;

namespace {

ScanResult synthetic(std::vector<double> powers) {
    ScanResult s;
    for (std::size_t i = 0; i < powers.size(); ++i) {
        s.samples.push_back({{0.0, 0.0, 0.1 + 0.01 * static_cast<double>(i)}, {}, powers[i]});
    }
    return s;
}

}  // namespace

TEST_CASE("10x10 field matches the direct-sum oracle") {
    const auto g = PanelGeometry::standard();
    UnitCellModel cell = UnitCellModel::standard(g.wavelength());
    cell.loss_db = {0.2, 0.3, 0.5, 0.6};
    cell.phase_error_deg = {1.0, -4.0, 0.0, 7.0};
    std::mt19937_64 rng(11);
    Codebook cb(10, 10);
    std::vector<int> digits;
    for (int r = 0; r < 10; ++r) {
        for (int c = 0; c < 10; ++c) {
            const int d = static_cast<int>(rng() % 4);
            cb.set(r, c, state_from_index(d));
            digits.push_back(d);
        }
    }
    const TransmitterSpec tx{{0.1, 0.2, 1.3}, 3.0};
    const oracle::Panel op{10, 10, g.pitch_x(), g.pitch_y(), g.carrier_frequency()};
    for (const Vec3 p : {Vec3{0, 0, 0.3}, Vec3{-0.2, 0.1, 0.9}, Vec3{0.5, -0.4, 2.0}}) {
        const auto ref = oracle::field(op, digits, {0.1, 0.2, 1.3}, 3.0, {p.x, p.y, p.z}, cell.loss_db.data(),
                                       cell.phase_error_deg.data());
        const auto got = field_at(p, cb, tx, g, cell);
        CHECK(std::abs(got - ref) / std::abs(ref) < 1e-12);
        CHECK(power_db(got) == doctest::Approx(oracle::db(ref)).epsilon(1e-12));
    }
}

TEST_CASE("field scales linearly with transmitter gain") {
    const auto g = PanelGeometry::standard();
    const auto cell = UnitCellModel::standard(g.wavelength());
    const auto cb = Codebook::uniform(g, PhaseState::S2);
    const Vec3 p{0.1, 0.0, 0.5};
    const auto a = field_at(p, cb, {{0, 0, 1}, 1.0}, g, cell);
    const auto b = field_at(p, cb, {{0, 0, 1}, 5.0}, g, cell);
    CHECK(std::abs(b - 5.0 * a) < 1e-12 * std::abs(b));
}

TEST_CASE("codebook and pattern routes agree") {
    const auto g = PanelGeometry::standard();
    const auto cell = UnitCellModel::standard(g.wavelength());
    const auto cb = spot_codebook({}, {{{0, 0, 0.4}, 1.0}}, g);
    const Vec3 p{0.02, 0.03, 0.4};
    CHECK(std::abs(field_at(p, cb, {}, g, cell) - field_at(p, reflection_pattern(cb, cell), {}, g)) < 1e-15);
}

TEST_CASE("field rejects points on or behind the panel") {
    const auto g = PanelGeometry::standard();
    const auto cell = UnitCellModel::standard(g.wavelength());
    CHECK_THROWS_AS(field_at({0, 0, 0}, Codebook::uniform(g), {}, g, cell), GeometryError);
    CHECK_THROWS_AS(field_at({0, 0, 1}, Codebook(3, 3), {}, g, cell), ConfigError);
}

TEST_CASE("specular plate reflects toward the mirror direction") {
    const auto g = PanelGeometry::standard();
    const TransmitterSpec tx{direction_point(-20.0, 0.0, 3.0), 1.0};
    const double mirror = power_db(specular_plate_field(direction_point(20.0, 0.0, 3.0), tx, g));
    const double off = power_db(specular_plate_field(direction_point(-10.0, 0.0, 3.0), tx, g));
    CHECK(mirror > off + 6.0);
}

TEST_CASE("scan segment spacing and near-field flag") {
    const auto g = PanelGeometry::standard();
    const auto cell = UnitCellModel::standard(g.wavelength());
    const auto scan = scan_segment({0, 0, 0.01}, {0, 0, 1.01}, 101, Codebook::uniform(g), {}, g, cell);
    CHECK(scan.samples.size() == 101);
    CHECK(scan.spacing == doctest::Approx(0.01));
    CHECK(scan.reactive_near_field);
    CHECK(scan.geometry_hash == geometry_hash(g));
    const auto far = scan_segment({0, 0, 0.5}, {0, 0, 1.0}, 11, Codebook::uniform(g), {}, g, cell);
    CHECK_FALSE(far.reactive_near_field);
    CHECK_THROWS_AS(scan_segment({0, 0, 1}, {0, 0, 1}, 11, Codebook::uniform(g), {}, g, cell), ConfigError);
    CHECK_THROWS_AS(scan_segment({0, 0, 1}, {0, 0, 2}, 1, Codebook::uniform(g), {}, g, cell), ConfigError);
}

TEST_CASE("peaks are sorted by power and filtered by prominence") {
    const auto peaks = find_peaks(synthetic({0, 5, 1, 2, 1.5, 9, 9, 3, 4}), 1.0);
    REQUIRE(peaks.size() == 2);
    CHECK(peaks[0].index == 5);
    // right-hand base is the 3 before the trailing rise
    CHECK(peaks[0].prominence_db == doctest::Approx(6.0));
    CHECK(peaks[1].index == 1);
    CHECK(peaks[1].prominence_db == doctest::Approx(4.0));
    CHECK(find_peaks(synthetic({0, 5, 1, 2, 1.5, 9, 9, 3, 4}), 0.0).size() == 3);
    CHECK(find_peaks(synthetic({1, 2, 3, 4}), 0.0).empty());
}

TEST_CASE("field slice layout") {
    const auto g = PanelGeometry::standard();
    const auto cell = UnitCellModel::standard(g.wavelength());
    const auto pattern = reflection_pattern(Codebook::uniform(g), cell);
    const auto slice = field_slice(SlicePlane::XZ, 0.0, -0.2, 0.2, 0.1, 0.5, 5, 3, pattern, {}, g);
    REQUIRE(slice.power_db.size() == 15);
    // row 1 (v = 0.3), column 4 (u = 0.2)
    CHECK(slice.power_db[1 * 5 + 4] == doctest::Approx(power_db(field_at({0.2, 0.0, 0.3}, pattern, {}, g))));
    CHECK(parse_plane(plane_name(SlicePlane::YZ)) == SlicePlane::YZ);
    CHECK_THROWS_AS(parse_plane("xw"), ConfigError);
    CHECK(slice_to_json(slice)["power_db"].size() == 15);
}

TEST_CASE("geometry hash distinguishes panels") {
    CHECK(geometry_hash(PanelGeometry::standard()) == geometry_hash(PanelGeometry::standard()));
    CHECK(geometry_hash(PanelGeometry::standard()) != geometry_hash(PanelGeometry(10, 10, 0.02, 0.02, 10.7e9)));
}
