#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ristwin/service.hpp"

namespace py = pybind11;
using namespace ristwin;
using nlohmann::json;

// Structured results cross the boundary as JSON text; the Python package decodes them.
namespace {

Codebook digits_to_codebook(const std::vector<std::vector<int>>& rows) {
    if (rows.empty()) throw ConfigError("codebook: no rows");
    std::vector<PhaseState> states;
    for (const auto& r : rows) {
        if (r.size() != rows.front().size()) throw ConfigError("codebook: ragged rows");
        for (int d : r) states.push_back(state_from_index(d));
    }
    return Codebook(static_cast<int>(rows.size()), static_cast<int>(rows.front().size()), std::move(states));
}

std::string events_json(const std::vector<TrackingEvent>& events) {
    json out = json::array();
    for (const auto& e : events) out.push_back(event_to_json(e));
    return out.dump();
}

class PySession {
public:
    explicit PySession(const std::string& id) : state_(id) {}

    std::vector<std::string> handle(const std::string& line) {
        ProtocolMessage msg;
        try {
            msg = parse_message(line);
        } catch (const DecodeError& e) {
            return {ProtocolMessage{"error", state_.session_id, ++state_.server_seq, {{"reason", e.what()}}}.to_json().dump()};
        }
        return apply(handle_message(state_, msg));
    }
    std::vector<std::string> tick(double wall_ms) { return apply(ristwin::tick(state_, wall_ms)); }
    std::string snapshot() const { return state_.snapshot().dump(); }

private:
    std::vector<std::string> apply(Transition t) {
        state_ = std::move(t.first);
        std::vector<std::string> out;
        for (const auto& m : t.second) out.push_back(m.to_json().dump());
        return out;
    }
    SessionState state_;
};

}  // namespace

PYBIND11_MODULE(_ristwin, m) {
    m.doc() = "ristwin native core";

    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<DecodeError>(m, "DecodeError", PyExc_ValueError);
    py::register_exception<GeometryError>(m, "GeometryError", PyExc_ValueError);
    py::register_exception<DomainError>(m, "DomainError", PyExc_ValueError);
    py::register_exception<IndexError>(m, "IndexError", PyExc_IndexError);

    m.def("version", [] { return std::string(tool_version()); });
    m.def("protocol_version", [] { return std::string(kProtocolVersion); });

    m.def("normalize_scenario", [](const std::string& text) { return scenario_to_json(parse_scenario(text)).dump(); });
    m.def("scenario_hash", [](const std::string& text) { return scenario_hash(parse_scenario(text)); });
    m.def("scenario_schema", [] { return scenario_schema().dump(); });

    m.def("quantize_phase", [](double theta) { return index_of(quantize_phase(theta)); });

    m.def("codebook", [](const std::string& text) {
        const ScenarioFile s = parse_scenario(text);
        json prov;
        const Codebook cb = s.selected_codebook(&prov);
        return codebook_to_json(cb, prov).dump();
    });

    m.def(
        "field_power_db",
        [](const std::string& text, const std::vector<std::vector<int>>& digits, std::array<double, 3> point) {
            const ScenarioFile s = parse_scenario(text);
            return rssi_db({point[0], point[1], point[2]}, digits_to_codebook(digits), s.transmitter, s.panel(),
                           s.cell_model());
        },
        py::arg("scenario"), py::arg("digits"), py::arg("point"));

    m.def("scan", [](const std::string& text) {
        const ScenarioFile s = parse_scenario(text);
        const ScanResult scan = scan_segment(s.scan.start, s.scan.end, s.scan.samples, s.selected_codebook(),
                                             s.transmitter, s.panel(), s.cell_model());
        json doc = scan_to_json(scan);
        json peaks = json::array();
        for (const auto& p : find_peaks(scan, s.scan.min_prominence_db)) {
            peaks.push_back({{"index", p.index}, {"offset_m", p.offset}, {"power_db", p.power_db}});
        }
        doc["peaks"] = peaks;
        return doc.dump();
    });

    m.def("track", [](const std::string& text) {
        const ScenarioFile s = parse_scenario(text);
        return events_json(run_tracking(s.tracking_setup(), s.trajectory(), s.tracking.end_ms));
    });

    m.def("doppler", [](const std::string& text) {
        const ScenarioFile s = parse_scenario(text);
        const auto series =
            synthesize_rx(s.doppler_schedule(), s.doppler.receiver, s.transmitter, s.panel(), s.doppler.synthesis);
        const Spectrum sp = spectrum_of(series, s.doppler.window);
        return json{{"offset_hz", dominant_offset(sp)},
                    {"expected_hz", s.vortex.mode / s.vortex.period_s},
                    {"resolution_hz", sp.resolution_hz}}
            .dump();
    });

    m.def(
        "encode_frames",
        [](const std::vector<std::vector<int>>& digits, bool invert) {
            McuTopology topo;
            topo.invert_polarity = invert;
            std::vector<std::string> out;
            for (const auto& f : pins_to_frames(codebook_to_pins(digits_to_codebook(digits)), topo)) {
                out.push_back(f.hex());
            }
            return out;
        },
        py::arg("digits"), py::arg("invert") = false);

    m.def(
        "decode_frames",
        [](const std::vector<std::string>& hex, bool invert, int rows, int cols) {
            McuTopology topo;
            topo.invert_polarity = invert;
            std::string text;
            for (std::size_t i = 0; i < hex.size(); ++i) text += std::to_string(i) + ":" + hex[i] + "\n";
            const Codebook cb = frames_to_codebook(frames_from_text(text), topo, rows, cols);
            std::vector<std::vector<int>> out(static_cast<std::size_t>(rows));
            for (int r = 0; r < rows; ++r) {
                for (int c = 0; c < cols; ++c) out[static_cast<std::size_t>(r)].push_back(index_of(cb.at(r, c)));
            }
            return out;
        },
        py::arg("frames"), py::arg("invert") = false, py::arg("rows") = 10, py::arg("cols") = 10);

    m.def("total_scan_time", &total_scan_time, py::arg("processing_delay_ms"), py::arg("regions"),
          py::arg("slot_ms"));

    m.def(
        "ber",
        [](double snr_db, std::int64_t symbols, std::uint64_t seed) {
            const BerResult r = ber_monte_carlo(snr_db, symbols, seed);
            return json{{"ber", r.ber}, {"bit_errors", r.bit_errors}, {"bits", r.bits}}.dump();
        },
        py::arg("snr_db"), py::arg("symbols"), py::arg("seed") = 1);

    m.def(
        "run_command",
        [](const std::string& command, const std::string& text, const std::string& out_dir) {
            py::gil_scoped_release release;
            return run_command(command, parse_scenario(text), out_dir).to_json().dump();
        },
        py::arg("command"), py::arg("scenario"), py::arg("out_dir"));

    py::class_<PySession>(m, "Session")
        .def(py::init<const std::string&>(), py::arg("session_id") = "s1")
        .def("handle", &PySession::handle, py::arg("line"))
        .def("tick", &PySession::tick, py::arg("wall_ms"))
        .def("snapshot", &PySession::snapshot);
}
