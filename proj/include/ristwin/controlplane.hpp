#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ristwin/codebook.hpp"

namespace ristwin {

// Leader/follower MCU fabric. All panel units are driven by followers in
// row-major blocks of units_per_follower; the leader's own GPIOs are spares.
struct McuTopology {
    int leader_pins = 20;
    int followers = 10;
    int pins_per_follower = 50;
    int units_per_follower = 10;
    int ports_per_follower = 9;
    int port_width_bits = 8;
    double spi_baud = 1e6;
    bool invert_polarity = false;  // pMOS stage: logical 1 drives 0 V

    int total_pins() const { return leader_pins + followers * pins_per_follower; }
    int frame_bytes() const { return ports_per_follower * port_width_bits / 8; }

    // Throws ConfigError when the topology cannot drive the panel.
    void validate_for(int unit_count) const;
};

// Three diode bits per unit (delay lines l1, l2, l3), flattened in unit order.
struct PinState {
    std::vector<std::uint8_t> bits;  // 0 or 1, logical (pre-polarity)
    bool inverted = false;

    int unit_count() const { return static_cast<int>(bits.size() / 3); }
    int on_count() const;
};

struct FollowerFrame {
    int follower = 0;
    std::vector<std::uint8_t> payload;

    // Uppercase, no separators: "800000000000000000".
    std::string hex() const;
};

// S0 -> 000, S1 -> 100, S2 -> 010, S3 -> 001.
PinState codebook_to_pins(const Codebook& codebook);

// Inverts every bit and toggles the flag; applying it twice is identity.
PinState apply_polarity(const PinState& pins);

// Expects logical (non-inverted) pins. Packs each follower's pin bits
// MSB-first into its frame, zero padded. With invert_polarity, used bits
// are inverted after packing; pad bits stay zero.
std::vector<FollowerFrame> pins_to_frames(const PinState& pins, const McuTopology& topology);

// Exact inverse of pins_to_frames(codebook_to_pins(.)).
Codebook frames_to_codebook(const std::vector<FollowerFrame>& frames, const McuTopology& topology, int rows, int cols);

double spi_transfer_time(const McuTopology& topology, int bytes_per_follower);  // seconds
double refresh_latency_ms(const McuTopology& topology);

// Golden hand-off format, one follower per line: "0:80 00 00 00 00 00 00 00 00".
std::string frames_to_text(const std::vector<FollowerFrame>& frames);
std::vector<FollowerFrame> frames_from_text(std::string_view text);

}  // namespace ristwin
