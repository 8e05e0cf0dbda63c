"""Python front end for the ristwin RIS digital twin."""

import json
from os import PathLike
from typing import Any, Mapping, Union

from . import _ristwin
from ._ristwin import (
    ConfigError,
    DecodeError,
    DomainError,
    GeometryError,
    decode_frames,
    encode_frames,
    quantize_phase,
    total_scan_time,
)

__version__ = _ristwin.version()
PROTOCOL_VERSION = _ristwin.protocol_version()

Scenario = Union[str, Mapping[str, Any], None]

__all__ = [
    "ConfigError",
    "DecodeError",
    "DomainError",
    "GeometryError",
    "PROTOCOL_VERSION",
    "Session",
    "ber",
    "codebook",
    "decode_frames",
    "doppler",
    "encode_frames",
    "field_power_db",
    "load_text",
    "normalize_scenario",
    "quantize_phase",
    "run_command",
    "scan",
    "scenario_hash",
    "scenario_schema",
    "total_scan_time",
    "track",
]


def _text(scenario: Scenario) -> str:
    if scenario is None:
        return "{}"
    if isinstance(scenario, str):
        return scenario
    return json.dumps(scenario)


def load_text(path: Union[str, PathLike]) -> str:
    with open(path, encoding="utf-8") as fh:
        return fh.read()


def normalize_scenario(scenario: Scenario = None) -> dict:
    return json.loads(_ristwin.normalize_scenario(_text(scenario)))


def scenario_hash(scenario: Scenario = None) -> str:
    return _ristwin.scenario_hash(_text(scenario))


def scenario_schema() -> dict:
    return json.loads(_ristwin.scenario_schema())


def codebook(scenario: Scenario = None) -> dict:
    return json.loads(_ristwin.codebook(_text(scenario)))


def field_power_db(digits, point, scenario: Scenario = None) -> float:
    return _ristwin.field_power_db(_text(scenario), [list(r) for r in digits], list(point))


def scan(scenario: Scenario = None) -> dict:
    return json.loads(_ristwin.scan(_text(scenario)))


def track(scenario: Scenario = None) -> list:
    return json.loads(_ristwin.track(_text(scenario)))


def doppler(scenario: Scenario = None) -> dict:
    return json.loads(_ristwin.doppler(_text(scenario)))


def ber(snr_db: float, symbols: int, seed: int = 1) -> dict:
    return json.loads(_ristwin.ber(snr_db, symbols, seed))


def run_command(command: str, scenario: Scenario, out_dir: Union[str, PathLike]) -> dict:
    return json.loads(_ristwin.run_command(command, _text(scenario), str(out_dir)))


class Session:
    """In-process session speaking the line protocol, without a socket."""

    def __init__(self, session_id: str = "s1"):
        self._native = _ristwin.Session(session_id)

    def send(self, message: Mapping[str, Any]) -> list:
        return [json.loads(r) for r in self._native.handle(json.dumps(message))]

    def tick(self, wall_ms: float) -> list:
        return [json.loads(r) for r in self._native.tick(wall_ms)]

    def snapshot(self) -> dict:
        return json.loads(self._native.snapshot())
