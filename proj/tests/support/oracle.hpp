#pragma once

// Reference computations written from the physical model directly, without
// calling the library's geometry or field code. Tests compare against these.

#include <cmath>
#include <complex>
#include <vector>

namespace oracle {

constexpr double kC = 299792458.0;
constexpr double kPi = 3.14159265358979323846;

struct Point {
    double x, y, z;
};

inline double dist(Point a, Point b) {
    return std::sqrt((a.x - b.x) * (a.x - b.x) + (a.y - b.y) * (a.y - b.y) + (a.z - b.z) * (a.z - b.z));
}

struct Panel {
    int rows;
    int cols;
    double pitch_x;
    double pitch_y;
    double freq_hz;

    double lambda() const { return kC / freq_hz; }
    // 0-based row r from the top, column c from the left.
    Point unit(int r, int c) const {
        return {(c - (cols - 1) / 2.0) * pitch_x, ((rows - 1) / 2.0 - r) * pitch_y, 0.0};
    }
};

// states: row-major digits 0..3; loss/error per state.
inline std::complex<double> field(const Panel& p, const std::vector<int>& states, Point tx, double gain, Point rx,
                                  const double loss_db[4], const double error_deg[4]) {
    const double lam = p.lambda();
    const double k = 2.0 * kPi / lam;
    std::complex<double> acc(0.0, 0.0);
    for (int r = 0; r < p.rows; ++r) {
        for (int c = 0; c < p.cols; ++c) {
            const int s = states[static_cast<std::size_t>(r * p.cols + c)];
            const Point u = p.unit(r, c);
            const double a = dist(tx, u);
            const double b = dist(u, rx);
            const double mag = std::pow(10.0, -loss_db[s] / 20.0);
            const double arg = s * kPi / 2.0 + error_deg[s] * kPi / 180.0;
            const std::complex<double> refl = std::polar(mag, arg);
            const std::complex<double> hop1 = gain * lam / (4.0 * kPi * a) * std::exp(std::complex<double>(0.0, -k * a));
            const std::complex<double> hop2 = lam / (4.0 * kPi * b) * std::exp(std::complex<double>(0.0, -k * b));
            acc += hop1 * refl * hop2;
        }
    }
    return acc;
}

inline double db(std::complex<double> e) { return 20.0 * std::log10(std::abs(e)); }

// Per-axis Gray 4-PAM bit error probability for 16-QAM at Es/N0 (linear),
// Es = 1: average over the two bits of each axis.
inline double qam16_ber(double es_n0) {
    const double a = 1.0 / std::sqrt(10.0);
    const double sigma = std::sqrt(1.0 / es_n0 / 2.0);
    auto q = [](double x) { return 0.5 * std::erfc(x / std::sqrt(2.0)); };
    const double q1 = q(a / sigma), q3 = q(3.0 * a / sigma), q5 = q(5.0 * a / sigma);
    return (3.0 * q1 + 2.0 * q3 - q5) / 4.0;
}

}  // namespace oracle
