#include "ristwin/controlplane.hpp"

#include <charconv>

namespace ristwin {

namespace {

constexpr std::array<std::array<std::uint8_t, 3>, 4> kDiodePattern{{
    {0, 0, 0},  // S0: l0 path only
    {1, 0, 0},  // S1: l1
    {0, 1, 0},  // S2: l2
    {0, 0, 1},  // S3: l3
}};

constexpr char kHexDigits[] = "0123456789ABCDEF";

std::string byte_hex(std::uint8_t b) { return {kHexDigits[b >> 4], kHexDigits[b & 0x0f]}; }

}  // namespace

void McuTopology::validate_for(int unit_count) const {
    if (followers < 1 || units_per_follower < 1) throw ConfigError("topology: need at least one follower and unit");
    if (!(spi_baud > 0.0)) throw ConfigError("topology: spi_baud must be > 0");
    if (port_width_bits % 8 != 0 || ports_per_follower < 1) {
        throw ConfigError("topology: ports must be whole bytes");
    }
    if (followers * units_per_follower != unit_count) {
        throw ConfigError("topology: followers x units_per_follower = " +
                          std::to_string(followers * units_per_follower) + " does not cover " +
                          std::to_string(unit_count) + " units");
    }
    if (3 * unit_count > total_pins()) {
        throw ConfigError("topology: " + std::to_string(3 * unit_count) + " diode pins exceed " +
                          std::to_string(total_pins()) + " output pins");
    }
    if (3 * units_per_follower > pins_per_follower) {
        throw ConfigError("topology: follower drives more pins than it has GPIOs");
    }
    if (3 * units_per_follower > 8 * frame_bytes()) {
        throw ConfigError("topology: follower pin bits do not fit in one frame");
    }
}

int PinState::on_count() const {
    int n = 0;
    for (auto b : bits) n += b;
    return n;
}

std::string FollowerFrame::hex() const {
    std::string out;
    out.reserve(payload.size() * 2);
    for (auto b : payload) out += byte_hex(b);
    return out;
}

PinState codebook_to_pins(const Codebook& codebook) {
    PinState pins;
    pins.bits.reserve(codebook.states().size() * 3);
    for (PhaseState s : codebook.states()) {
        const auto& p = kDiodePattern[index_of(s)];
        pins.bits.insert(pins.bits.end(), p.begin(), p.end());
    }
    return pins;
}

PinState apply_polarity(const PinState& pins) {
    PinState out{pins.bits, !pins.inverted};
    for (auto& b : out.bits) b ^= 1u;
    return out;
}

std::vector<FollowerFrame> pins_to_frames(const PinState& pins, const McuTopology& topology) {
    if (pins.inverted) throw ConfigError("pins_to_frames: expects logical pins; polarity comes from the topology");
    if (pins.bits.size() % 3 != 0) throw ConfigError("pins_to_frames: pin count is not a multiple of 3");
    topology.validate_for(pins.unit_count());
    const int bits_per_follower = 3 * topology.units_per_follower;
    std::vector<FollowerFrame> frames;
    frames.reserve(static_cast<std::size_t>(topology.followers));
    for (int f = 0; f < topology.followers; ++f) {
        FollowerFrame frame{f, std::vector<std::uint8_t>(static_cast<std::size_t>(topology.frame_bytes()), 0)};
        for (int b = 0; b < bits_per_follower; ++b) {
            std::uint8_t bit = pins.bits[static_cast<std::size_t>(f * bits_per_follower + b)];
            if (topology.invert_polarity) bit ^= 1;
            if (bit) frame.payload[static_cast<std::size_t>(b / 8)] |= static_cast<std::uint8_t>(0x80u >> (b % 8));
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

Codebook frames_to_codebook(const std::vector<FollowerFrame>& frames, const McuTopology& topology, int rows,
                            int cols) {
    topology.validate_for(rows * cols);
    if (static_cast<int>(frames.size()) != topology.followers) {
        throw DecodeError("expected " + std::to_string(topology.followers) + " frames, got " +
                          std::to_string(frames.size()));
    }
    std::vector<PhaseState> states(static_cast<std::size_t>(rows * cols), PhaseState::S0);
    for (std::size_t i = 0; i < frames.size(); ++i) {
        const auto& frame = frames[i];
        if (frame.follower != static_cast<int>(i)) {
            throw DecodeError("frame " + std::to_string(i) + " carries follower index " + std::to_string(frame.follower));
        }
        if (static_cast<int>(frame.payload.size()) != topology.frame_bytes()) {
            throw DecodeError("follower " + std::to_string(i) + ": payload is " + std::to_string(frame.payload.size()) +
                              " bytes, expected " + std::to_string(topology.frame_bytes()));
        }
        auto bit_at = [&](int b) -> std::uint8_t {
            std::uint8_t v = (frame.payload[static_cast<std::size_t>(b / 8)] >> (7 - b % 8)) & 1u;
            return topology.invert_polarity ? static_cast<std::uint8_t>(v ^ 1u) : v;
        };
        const int used = 3 * topology.units_per_follower;
        for (int b = used; b < 8 * topology.frame_bytes(); ++b) {
            if ((frame.payload[static_cast<std::size_t>(b / 8)] >> (7 - b % 8)) & 1u) {
                throw DecodeError("follower " + std::to_string(i) + ": nonzero pad bit " + std::to_string(b));
            }
        }
        for (int u = 0; u < topology.units_per_follower; ++u) {
            const std::array<std::uint8_t, 3> triple{bit_at(3 * u), bit_at(3 * u + 1), bit_at(3 * u + 2)};
            int state = -1;
            for (int s = 0; s < 4; ++s) {
                if (kDiodePattern[static_cast<std::size_t>(s)] == triple) state = s;
            }
            if (state < 0) {
                throw DecodeError("follower " + std::to_string(i) + ", unit " + std::to_string(u) + ": invalid triple " +
                                  std::to_string(triple[0]) + std::to_string(triple[1]) + std::to_string(triple[2]));
            }
            states[static_cast<std::size_t>(static_cast<int>(i) * topology.units_per_follower + u)] =
                static_cast<PhaseState>(state);
        }
    }
    return Codebook(rows, cols, std::move(states));
}

double spi_transfer_time(const McuTopology& topology, int bytes_per_follower) {
    if (!(topology.spi_baud > 0.0)) throw ConfigError("topology: spi_baud must be > 0");
    return static_cast<double>(topology.followers) * bytes_per_follower * 8.0 / topology.spi_baud;
}

double refresh_latency_ms(const McuTopology& topology) {
    if (!(topology.spi_baud > 0.0)) throw ConfigError("topology: spi_baud must be > 0");
    // Scale the bit count, not the seconds, so 720 bits at 1 Mbps is exactly 0.72.
    return static_cast<double>(topology.followers) * topology.frame_bytes() * 8.0 * 1e3 / topology.spi_baud;
}

std::string frames_to_text(const std::vector<FollowerFrame>& frames) {
    std::string out;
    for (const auto& f : frames) {
        out += std::to_string(f.follower) + ":";
        for (std::size_t i = 0; i < f.payload.size(); ++i) {
            if (i) out += ' ';
            out += byte_hex(f.payload[i]);
        }
        out += '\n';
    }
    return out;
}

std::vector<FollowerFrame> frames_from_text(std::string_view text) {
    std::vector<FollowerFrame> frames;
    std::size_t pos = 0;
    int line_no = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
        if (line.empty()) continue;
        const auto colon = line.find(':');
        if (colon == std::string_view::npos) throw DecodeError("frame line " + std::to_string(line_no) + ": missing ':'");
        FollowerFrame frame;
        auto [p, ec] = std::from_chars(line.data(), line.data() + colon, frame.follower);
        if (ec != std::errc{} || p != line.data() + colon) {
            throw DecodeError("frame line " + std::to_string(line_no) + ": bad follower index");
        }
        std::string_view rest = line.substr(colon + 1);
        std::size_t i = 0;
        while (i < rest.size()) {
            if (rest[i] == ' ') {
                ++i;
                continue;
            }
            if (i + 2 > rest.size()) throw DecodeError("frame line " + std::to_string(line_no) + ": truncated byte");
            unsigned value = 0;
            auto [q, ec2] = std::from_chars(rest.data() + i, rest.data() + i + 2, value, 16);
            if (ec2 != std::errc{} || q != rest.data() + i + 2) {
                throw DecodeError("frame line " + std::to_string(line_no) + ": bad hex byte");
            }
            frame.payload.push_back(static_cast<std::uint8_t>(value));
            i += 2;
        }
        frames.push_back(std::move(frame));
    }
    return frames;
}

}  // namespace ristwin
