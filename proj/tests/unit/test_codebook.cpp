#include <cmath>
#include <random>

#include "../support/oracle.hpp"
#include "doctest.h"
#include "ristwin/codebook.hpp"
#include "ristwin/field.hpp"

using namespace ristwin;

namespace {

double wrapped(double a, double b) { return wrapped_distance(a, b); }

}  // namespace

TEST_CASE("direction_point axes") {
    const Vec3 ahead = direction_point(0.0, 0.0, 2.0);
    CHECK(ahead.x == doctest::Approx(0.0));
    CHECK(ahead.z == doctest::Approx(2.0));
    const Vec3 right = direction_point(30.0, 0.0, 1.0);
    CHECK(right.x == doctest::Approx(0.5));
    const Vec3 up = direction_point(0.0, 30.0, 1.0);
    CHECK(up.y == doctest::Approx(0.5));
    CHECK(up.z == doctest::Approx(std::sqrt(3.0) / 2));
}

TEST_CASE("single-focus phase matches the two-path expression") {
    const auto g = PanelGeometry::standard();
    const TransmitterSpec tx{{0.05, -0.02, 0.7}, 2.0};
    const Vec3 focus{-0.03, 0.04, 0.35};
    const auto phases = spot_phase_matrix(tx, {{focus, 1.0}}, g);
    const oracle::Panel op{g.rows(), g.cols(), g.pitch_x(), g.pitch_y(), g.carrier_frequency()};
    const double k = 2 * oracle::kPi / op.lambda();
    for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) {
            const auto u = op.unit(r, c);
            const double want = k * (oracle::dist({0.05, -0.02, 0.7}, u) + oracle::dist(u, {-0.03, 0.04, 0.35}) - 0.35);
            CHECK(wrapped(phases.at(r, c), want) < 1e-9);
        }
    }
}

TEST_CASE("gain rescaling leaves spot phases unchanged") {
    const auto g = PanelGeometry::standard();
    const FocusSet foci{{{0.0, 0.0, 0.2}, 1.0}, {{0.0, 0.0, 0.5}, 1.0}};
    const auto a = spot_codebook({{0, 0, 1}, 1.0}, foci, g);
    const auto b = spot_codebook({{0, 0, 1}, 40.0}, foci, g);
    CHECK(a == b);
}

TEST_CASE("spot codebook raises power at its focus over a uniform panel") {
    const auto g = PanelGeometry::standard();
    const TransmitterSpec tx;
    const auto cell = UnitCellModel::standard(g.wavelength());
    const Vec3 focus{0.05, 0.0, 0.4};
    const auto spot = spot_codebook(tx, {{focus, 1.0}}, g);
    const double gain = rssi_db(focus, spot, tx, g, cell) - rssi_db(focus, Codebook::uniform(g), tx, g, cell);
    CHECK(gain > 6.0);
}

TEST_CASE("spot codebook rejects bad foci") {
    const auto g = PanelGeometry::standard();
    CHECK_THROWS_AS(spot_codebook({}, {}, g), ConfigError);
    CHECK_THROWS_AS(spot_codebook({}, {{{0, 0, -1}, 1.0}}, g), ConfigError);
}

TEST_CASE("farfield codebook warns inside the far-field bound") {
    const auto g = PanelGeometry::standard();
    const auto near = farfield_codebook(20.0, 0.0, 0.5, TransmitterSpec{}, g);
    CHECK(near.warning.has_value());
    const auto far = farfield_codebook(20.0, 0.0, TransmitterSpec{}, g);
    CHECK_FALSE(far.warning.has_value());
    CHECK(far.far_field_bound == doctest::Approx(2 * g.aperture_diagonal() * g.aperture_diagonal() / g.wavelength()));
    CHECK_THROWS_AS(farfield_codebook(0.0, 0.0, -1.0, TransmitterSpec{}, g), ConfigError);
}

TEST_CASE("vortex phase follows azimuth, step rotation and offset") {
    const auto g = PanelGeometry::standard();
    VortexSpec spec;
    spec.mode = 2;
    spec.steps = 8;
    spec.initial_phase = 0.3;
    const auto ph = vortex_phase_matrix(spec, 3, g);
    for (int m = 1; m <= g.rows(); ++m) {
        for (int n = 1; n <= g.cols(); ++n) {
            const Vec3 u = unit_position(g, m, n);
            const double want = 2 * std::atan2(u.y, u.x) + 2 * kTwoPi * 3 / 8 + 0.3;
            CHECK(wrapped(ph.at(m - 1, n - 1), want) < 1e-12);
        }
    }
    CHECK_THROWS_AS(vortex_phase_matrix(spec, 8, g), IndexError);
}

TEST_CASE("each quarter-turn vortex step advances every unit by one state") {
    const auto g = PanelGeometry::standard();
    VortexSpec spec;
    spec.mode = 1;
    spec.steps = 4;
    spec.initial_phase = 0.1;  // keeps diagonal units off the quantizer ties
    // l*2pi*q/Q with Q=4 is a quarter turn per step: one 2-bit state.
    const auto c0 = vortex_codebook(spec, 0, g);
    const auto c1 = vortex_codebook(spec, 1, g);
    for (int r = 0; r < g.rows(); ++r) {
        for (int c = 0; c < g.cols(); ++c) CHECK(index_of(c1.at(r, c)) == (index_of(c0.at(r, c)) + 1) % 4);
    }
}

TEST_CASE("region grid is range-major then elevation then azimuth") {
    RegionGridSpec spec;
    spec.azimuth_count = 3;
    spec.elevation_count = 2;
    spec.range_count = 2;
    const auto grid = region_grid(spec);
    REQUIRE(grid.size() == 12);
    for (int i = 0; i < grid.size(); ++i) CHECK(grid.regions[static_cast<std::size_t>(i)].b_id == i);
    CHECK(grid.regions[1].azimuth_deg[0] > grid.regions[0].azimuth_deg[0]);
    CHECK(grid.regions[3].elevation_deg[0] > grid.regions[0].elevation_deg[0]);
    CHECK(grid.regions[6].range_m[0] > grid.regions[0].range_m[0]);
    CHECK(grid.regions[6].azimuth_deg[0] == grid.regions[0].azimuth_deg[0]);
    CHECK(grid.regions[0].center.norm() == doctest::Approx(0.3 + 2.7 / 4));
}

TEST_CASE("region grid validation") {
    RegionGridSpec spec;
    spec.azimuth_count = 0;
    CHECK_THROWS_AS(region_grid(spec), ConfigError);
    spec = {};
    spec.azimuth_max_deg = 90.0;
    CHECK_THROWS_AS(region_grid(spec), ConfigError);
    spec = {};
    spec.range_min_m = 0.0;
    CHECK_THROWS_AS(region_grid(spec), ConfigError);
}

TEST_CASE("region codebooks carry their B_ID") {
    RegionGridSpec spec;
    spec.azimuth_count = 2;
    spec.elevation_count = 1;
    spec.range_count = 1;
    const auto books = region_codebooks(region_grid(spec), TransmitterSpec{}, PanelGeometry::standard());
    REQUIRE(books.size() == 2);
    CHECK(books[0].b_id == 0);
    CHECK(books[1].b_id == 1);
    CHECK_FALSE(books[0] == books[1]);
}

TEST_CASE("digit grid and json round trips") {
    std::mt19937 rng(3);
    Codebook cb(4, 6);
    for (int r = 0; r < 4; ++r) {
        for (int c = 0; c < 6; ++c) cb.set(r, c, state_from_index(static_cast<int>(rng() % 4)));
    }
    cb.b_id = 5;
    CHECK(parse_digit_grid(to_digit_grid(cb)) == cb);
    const auto back = codebook_from_json(codebook_to_json(cb));
    CHECK(back == cb);
    CHECK(back.b_id == 5);
    CHECK(parse_digit_grid("01\r\n23\n") == Codebook(2, 2, {PhaseState::S0, PhaseState::S1, PhaseState::S2, PhaseState::S3}));
}

TEST_CASE("digit grid errors name the line") {
    CHECK_THROWS_WITH_AS(parse_digit_grid("012\n014\n"), doctest::Contains("line 2"), DecodeError);
    CHECK_THROWS_WITH_AS(parse_digit_grid("012\n01\n"), doctest::Contains("expected 3"), DecodeError);
    CHECK_THROWS_AS(parse_digit_grid(""), DecodeError);
    CHECK_THROWS_AS(codebook_from_json(nlohmann::json{{"matrix", {{0, 5}}}}), DecodeError);
}
