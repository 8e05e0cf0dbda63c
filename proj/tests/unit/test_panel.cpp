#include <random>

#include "doctest.h"
#include "ristwin/panel.hpp"

using namespace ristwin;

TEST_CASE("standard panel dimensions") {
    const auto g = PanelGeometry::standard();
    CHECK(g.rows() == 10);
    CHECK(g.cols() == 10);
    CHECK(g.unit_count() == 100);
    CHECK(g.wavelength() == doctest::Approx(299792458.0 / 10.7e9).epsilon(1e-15));
    CHECK(g.pitch_x() == doctest::Approx(0.6 * g.wavelength()).epsilon(1e-15));
    CHECK(g.pitch_y() == g.pitch_x());
}

TEST_CASE("invalid panel dimensions throw") {
    CHECK_THROWS_AS(PanelGeometry(0, 10, 0.01, 0.01, 10.7e9), ConfigError);
    CHECK_THROWS_AS(PanelGeometry(10, 10, -0.01, 0.01, 10.7e9), ConfigError);
    CHECK_THROWS_AS(PanelGeometry(10, 10, 0.01, 0.01, 0.0), ConfigError);
}

TEST_CASE("unit positions are 1-based, centered, first row on top") {
    const PanelGeometry g(3, 4, 0.02, 0.01, 10e9);
    const Vec3 tl = unit_position(g, 1, 1);
    const Vec3 br = unit_position(g, 3, 4);
    CHECK(tl.x == doctest::Approx(-0.03));
    CHECK(tl.y == doctest::Approx(0.01));
    CHECK(br.x == doctest::Approx(0.03));
    CHECK(br.y == doctest::Approx(-0.01));
    CHECK(tl.z == 0.0);
    CHECK_THROWS_AS(unit_position(g, 4, 1), IndexError);
    CHECK_THROWS_AS(unit_position(g, 0, 1), IndexError);
}

TEST_CASE("quantizer maps the state centers onto themselves") {
    for (int s = 0; s < 4; ++s) {
        const PhaseState st = state_from_index(s);
        CHECK(quantize_phase(center_phase(st)) == st);
        CHECK(quantize_phase(center_phase(st) + kTwoPi) == st);
        CHECK(quantize_phase(center_phase(st) - 3 * kTwoPi) == st);
    }
}

TEST_CASE("quantizer ties go to the lower index") {
    CHECK(quantize_phase(kPi / 4) == PhaseState::S0);
    CHECK(quantize_phase(3 * kPi / 4) == PhaseState::S1);
    CHECK(quantize_phase(5 * kPi / 4) == PhaseState::S2);
    CHECK(quantize_phase(7 * kPi / 4) == PhaseState::S0);
}

TEST_CASE("quantizer error never exceeds a quarter-step") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> d(-50.0, 50.0);
    for (int i = 0; i < 20000; ++i) {
        const double th = d(rng);
        CHECK(wrapped_distance(center_phase(quantize_phase(th)), th) <= kPi / 4 + 1e-12);
    }
    CHECK_THROWS_AS(quantize_phase(std::nan("")), DomainError);
}

TEST_CASE("delay lines step by a quarter guided wavelength") {
    const auto cell = UnitCellModel::standard(PanelGeometry::standard().wavelength());
    const double l0 = delay_line_length(0.0, cell);
    CHECK(l0 == doctest::Approx(cell.initial_length));
    for (int s = 1; s < 4; ++s) {
        CHECK(delay_line_length(s * kPi / 2, cell) - l0 == doctest::Approx(s * cell.guided_wavelength / 4));
    }
}

TEST_CASE("reflection coefficient magnitude and phase") {
    UnitCellModel cell = UnitCellModel::ideal();
    cell.loss_db = {0.0, 0.3, 0.6, 0.1};
    cell.phase_error_deg = {0.0, 10.0, 0.0, -5.0};
    CHECK(std::abs(reflection_coefficient(PhaseState::S0, cell)) == doctest::Approx(1.0));
    CHECK(std::abs(reflection_coefficient(PhaseState::S1, cell)) == doctest::Approx(std::pow(10.0, -0.015)));
    CHECK(std::arg(reflection_coefficient(PhaseState::S1, cell)) == doctest::Approx(kPi / 2 + deg_to_rad(10.0)));
    CHECK(std::arg(reflection_coefficient(PhaseState::S2, cell)) == doctest::Approx(kPi));
    cell.loss_db[2] = 0.7;
    CHECK_THROWS_AS(cell.validate(), ConfigError);
}

TEST_CASE("wrap_phase lands in [0, 2pi)") {
    CHECK(wrap_phase(-kPi / 2) == doctest::Approx(3 * kPi / 2));
    CHECK(wrap_phase(kTwoPi) == doctest::Approx(0.0));
    CHECK(wrapped_distance(0.1, kTwoPi - 0.1) == doctest::Approx(0.2));
}
