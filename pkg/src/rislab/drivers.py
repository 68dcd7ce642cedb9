"""Instrument command generation, the RIS wire frame and line-oriented transports.

The command mnemonics below are this package's canonical SCPI dialect.
Hardware adapters that need other spellings should translate explicitly
rather than edit these generators; the golden tests pin them.
"""
from __future__ import annotations

import os
import socket
import time
from dataclasses import dataclass
from decimal import Decimal
from typing import Protocol

from .pattern import RisPattern, encode

TRACE_MODES = {"max-hold": "MAXH", "clear-write": "WRIT"}

ENDPOINT_ENV_VARS = {
    "analyzer": "RIG_ANALYZER",
    "generator": "RIG_GENERATOR",
    "ris": "RIG_RIS",
    "positioner": "RIG_POSITIONER",
}


class TransportError(RuntimeError):
    pass


class ScriptExhausted(TransportError):
    """A :class:`RecordingTransport` was queried with no scripted response left."""


@dataclass(frozen=True)
class AnalyzerSettings:
    span: float = 0.0  # [Hz]
    rbw: float = 500.0  # [Hz]
    sweep_time: float = 0.05  # [s]
    reference_level: float = -30.0  # [dBm]
    center_frequency: float = 5.5e9  # [Hz]
    trace_mode: str = "max-hold"

    def __post_init__(self):
        if self.trace_mode not in TRACE_MODES:
            raise ValueError(f"trace_mode must be one of {sorted(TRACE_MODES)}, got {self.trace_mode!r}")
        if self.span < 0 or self.rbw <= 0 or self.sweep_time <= 0 or self.center_frequency <= 0:
            raise ValueError("span must be >= 0; rbw, sweep_time and center_frequency must be > 0")


@dataclass(frozen=True)
class GeneratorSettings:
    frequency: float = 5.5e9  # [Hz]
    level: float = -10.0  # [dBm]
    rf_enabled: bool = True


@dataclass(frozen=True)
class DeviceEndpoint:
    host: str
    port: int
    newline: str = "\n"

    def __post_init__(self):
        if not 1 <= self.port <= 65535:
            raise ValueError(f"port must be in 1..65535, got {self.port}")


def parse_endpoint(text: str) -> DeviceEndpoint:
    host, sep, port = text.strip().rpartition(":")
    if not sep or not host or not port.isdigit():
        raise ValueError(f"endpoint must look like host:port, got {text!r}")
    return DeviceEndpoint(host, int(port))


def endpoints_from_env(environ=None) -> dict[str, DeviceEndpoint]:
    """Endpoints configured through the ``RIG_*`` environment variables that are set."""
    environ = os.environ if environ is None else environ
    return {
        role: parse_endpoint(environ[var])
        for role, var in ENDPOINT_ENV_VARS.items()
        if environ.get(var)
    }


def render_number(x: float) -> str:
    """Shortest decimal that round-trips ``x``, never in exponent form.

    >>> render_number(5.5e9), render_number(0.05), render_number(-30.0)
    ('5500000000', '0.05', '-30')
    """
    d = Decimal(repr(float(x)))
    if d == d.to_integral_value():
        return str(int(d))
    return format(d.normalize(), "f")


def analyzer_setup_commands(s: AnalyzerSettings) -> list[str]:
    return [
        f"FREQ:CENT {render_number(s.center_frequency)}",
        f"FREQ:SPAN {render_number(s.span)}",
        f"BAND:RES {render_number(s.rbw)}",
        f"SWE:TIME {render_number(s.sweep_time)}",
        f"DISP:TRAC:Y:RLEV {render_number(s.reference_level)}",
        f"DISP:TRAC:MODE {TRACE_MODES[s.trace_mode]}",
    ]


def generator_setup_commands(s: GeneratorSettings) -> list[str]:
    return [
        f"FREQ {render_number(s.frequency)}",
        f"POW {render_number(s.level)}",
        f"OUTP {'ON' if s.rf_enabled else 'OFF'}",
    ]


def ris_frame(p: RisPattern) -> bytes:
    """ASCII control string plus a single LF terminator (68 bytes)."""
    return encode(p).encode("ascii") + b"\n"


class Transport(Protocol):
    def send_line(self, line: str) -> None: ...

    def query_line(self, line: str) -> str: ...


class RecordingTransport:
    """In-memory transport that logs every line written and replays scripted replies."""

    def __init__(self, responses=(), newline: str = "\n"):
        self.newline = newline
        self.log: list[bytes] = []
        self._responses = list(responses)

    @property
    def lines(self) -> list[str]:
        return [raw.decode("ascii")[: -len(self.newline)] for raw in self.log]

    def script(self, *responses: str) -> None:
        self._responses.extend(responses)

    def send_line(self, line: str) -> None:
        self.log.append((line + self.newline).encode("ascii"))

    def query_line(self, line: str) -> str:
        self.send_line(line)
        if not self._responses:
            raise ScriptExhausted(f"no scripted response left for query {line!r}")
        return self._responses.pop(0)


def recording_transport(responses=()) -> RecordingTransport:
    return RecordingTransport(responses)


class TcpTransport:
    """Line-oriented text over a raw TCP socket (one connection, one user)."""

    def __init__(self, endpoint: DeviceEndpoint, timeout: float = 5.0):
        self.endpoint = endpoint
        self.timeout = timeout
        self._sock: socket.socket | None = None
        self._buffer = b""

    def connect(self) -> None:
        try:
            self._sock = socket.create_connection((self.endpoint.host, self.endpoint.port), self.timeout)
        except OSError as exc:
            raise TransportError(f"cannot connect to {self.endpoint.host}:{self.endpoint.port}: {exc}") from exc

    def close(self) -> None:
        if self._sock is not None:
            self._sock.close()
            self._sock = None

    def __enter__(self):
        self.connect()
        return self

    def __exit__(self, *exc):
        self.close()

    def send_line(self, line: str) -> None:
        if self._sock is None:
            self.connect()
        try:
            self._sock.sendall((line + self.endpoint.newline).encode("ascii"))
        except OSError as exc:
            raise TransportError(f"send failed: {exc}") from exc

    def query_line(self, line: str) -> str:
        self.send_line(line)
        term = self.endpoint.newline.encode("ascii")
        try:
            while term not in self._buffer:
                chunk = self._sock.recv(4096)
                if not chunk:
                    raise TransportError("connection closed by instrument")
                self._buffer += chunk
        except OSError as exc:
            raise TransportError(f"receive failed: {exc}") from exc
        reply, _, self._buffer = self._buffer.partition(term)
        return reply.decode("ascii").strip()


class ScpiSignalSource:
    """Signal generator port speaking the canonical dialect."""

    def __init__(self, transport: Transport):
        self.transport = transport

    def configure(self, s: GeneratorSettings) -> None:
        for line in generator_setup_commands(s):
            self.transport.send_line(line)

    def set_frequency(self, hz: float) -> None:
        self.transport.send_line(f"FREQ {render_number(hz)}")

    def set_level(self, dbm: float) -> None:
        self.transport.send_line(f"POW {render_number(dbm)}")

    def rf_on(self) -> None:
        self.transport.send_line("OUTP ON")

    def rf_off(self) -> None:
        self.transport.send_line("OUTP OFF")


class ScpiPowerSensor:
    """Spectrum analyzer used as a zero-span power meter.

    In max-hold mode each read clears the held trace, waits ``hold_time``
    seconds and then reads the peak marker.
    """

    def __init__(self, transport: Transport, hold_time: float = 0.15, sleep=time.sleep):
        self.transport = transport
        self.hold_time = hold_time
        self._sleep = sleep
        self.settings: AnalyzerSettings | None = None

    def configure(self, s: AnalyzerSettings) -> None:
        for line in analyzer_setup_commands(s):
            self.transport.send_line(line)
        self.settings = s

    def read_power(self) -> float:
        if self.settings is None:
            raise TransportError("analyzer read before configure")
        if self.settings.trace_mode == "max-hold":
            self.transport.send_line("DISP:TRAC:MODE WRIT")
            self.transport.send_line("DISP:TRAC:MODE MAXH")
            self._sleep(self.hold_time)
        self.transport.send_line("CALC:MARK:MAX")
        reply = self.transport.query_line("CALC:MARK:Y?")
        try:
            return float(reply)
        except ValueError as exc:
            raise TransportError(f"unparseable power reading {reply!r}") from exc


class LineRisController:
    """RIS controller fed one control string per line."""

    def __init__(self, transport: Transport):
        self.transport = transport
        self.last: str | None = None

    def apply(self, control_string: str) -> None:
        self.transport.send_line(control_string)
        self.last = control_string
