"""Sweep plans, the measurement campaign engine and the simulated rig.

The engine talks to four instrument ports (signal source, power sensor,
positioner, RIS controller).  The simulated rig implements them on top of
:mod:`rislab.fieldsim`; hardware adapters implement the same methods.
"""
from __future__ import annotations

import json
import logging
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Callable, Protocol, Sequence

from .drivers import AnalyzerSettings
from .fieldsim import SimConfig, received_power
from .geometry import Pose, Scene
from .pattern import RisPattern, decode, encode

log = logging.getLogger(__name__)

_GRID_TOL = 1e-9


@dataclass(frozen=True)
class SweepPlan:
    """Rectangular azimuth x elevation grid in degrees, plus per-point dwell in ms."""

    az_start: float = 0.0
    az_stop: float = 180.0
    az_step: float = 1.8
    el_start: float = 0.0
    el_stop: float = 0.0
    el_step: float = 9.0
    dwell: float = 150.0

    def __post_init__(self):
        _axis_count("azimuth", self.az_start, self.az_stop, self.az_step)
        _axis_count("elevation", self.el_start, self.el_stop, self.el_step)
        if self.dwell < 0:
            raise ValueError("dwell must be >= 0")

    def azimuths(self) -> list[float]:
        return _axis(self.az_start, self.az_stop, self.az_step)

    def elevations(self) -> list[float]:
        return _axis(self.el_start, self.el_stop, self.el_step)

    def poses(self) -> list[Pose]:
        """Elevation-major, azimuth-minor, both ascending."""
        return [Pose(az, el) for el in self.elevations() for az in self.azimuths()]

    def __len__(self):
        return len(self.azimuths()) * len(self.elevations())


def plan_2d(dwell: float = 150.0) -> SweepPlan:
    return SweepPlan(0.0, 180.0, 1.8, 0.0, 0.0, 9.0, dwell)


def plan_3d(dwell: float = 150.0) -> SweepPlan:
    return SweepPlan(0.0, 180.0, 1.8, -27.0, 27.0, 9.0, dwell)


def single_pose_plan(pose: Pose) -> SweepPlan:
    return SweepPlan(pose.azimuth, pose.azimuth, 1.0, pose.elevation, pose.elevation, 1.0, 0.0)


def _axis_count(name, start, stop, step) -> int:
    if start == stop:
        return 1
    if step <= 0:
        raise ValueError(f"{name} step must be > 0")
    n = (stop - start) / step
    if n < 0 or abs(n - round(n)) > _GRID_TOL:
        raise ValueError(f"{name} range {start}..{stop} is not a whole number of {step} steps")
    return int(round(n)) + 1


def _axis(start, stop, step) -> list[float]:
    # Index-based with rounding, so no drift accumulates towards the stop value.
    n = _axis_count("axis", start, stop, step)
    return [round(start + i * step, 10) for i in range(n)]


@dataclass(frozen=True)
class MeasurementRecord:
    pattern_id: str
    control_string: str
    azimuth: float
    elevation: float
    power: float  # [dBm]
    sequence: int
    timestamp: datetime


@dataclass(frozen=True)
class ProgressEvent:
    pattern_index: int
    pattern_id: str
    pose_index: int
    pose: Pose
    total: int


class SignalSource(Protocol):
    def set_frequency(self, hz: float) -> None: ...
    def set_level(self, dbm: float) -> None: ...
    def rf_on(self) -> None: ...
    def rf_off(self) -> None: ...


class PowerSensor(Protocol):
    def configure(self, settings: AnalyzerSettings) -> None: ...
    def read_power(self) -> float: ...


class Positioner(Protocol):
    def move_to(self, pose: Pose) -> None: ...
    def current_pose(self) -> Pose | None: ...


class RisController(Protocol):
    def apply(self, control_string: str) -> None: ...


def _no_wait(seconds: float) -> None:
    pass


@dataclass
class InstrumentPorts:
    source: SignalSource
    sensor: PowerSensor
    positioner: Positioner
    ris: RisController
    # Called with the dwell in seconds after every move.
    settle: Callable[[float], None] = _no_wait


class RigNotReady(RuntimeError):
    pass


class CampaignAborted(RuntimeError):
    """A port failed mid-campaign; ``records`` holds everything completed before ``step``."""

    def __init__(self, records: list[MeasurementRecord], step: int, stage: str, cause: BaseException):
        super().__init__(f"campaign aborted at step {step} during {stage}: {cause!r}")
        self.records = records
        self.step = step
        self.stage = stage
        self.cause = cause


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def run_campaign(
    ports: InstrumentPorts,
    scene: Scene,
    plan: SweepPlan,
    patterns: Sequence[tuple[str, RisPattern]],
    *,
    analyzer: AnalyzerSettings | None = None,
    clock: Callable[[], datetime] = utc_now,
    on_progress: Callable[[ProgressEvent], None] | None = None,
) -> list[MeasurementRecord]:
    """Measure every pattern over every pose of ``plan``.

    Loop order is pattern (outer), elevation, azimuth (inner).  The RIS is
    programmed once per pattern; for each pose the positioner moves, the rig
    settles for ``plan.dwell`` and the sensor is read.

    Raises
    ------
    CampaignAborted
        When any port call fails.  ``records`` on the exception are the
        measurements completed before the failing step.
    """
    if not patterns:
        raise ValueError("at least one pattern is required")
    ids = [pid for pid, _ in patterns]
    if len(set(ids)) != len(ids):
        raise ValueError("pattern ids must be unique")
    analyzer = analyzer or AnalyzerSettings(center_frequency=scene.frequency)
    poses = plan.poses()
    total = len(poses) * len(patterns)
    records: list[MeasurementRecord] = []
    stage = "setup"

    try:
        stage = "source setup"
        ports.source.set_frequency(scene.frequency)
        ports.source.set_level(scene.tx_power)
        ports.source.rf_on()
        stage = "sensor setup"
        ports.sensor.configure(analyzer)
        for pi, (pid, pattern) in enumerate(patterns):
            control = encode(pattern)
            stage = f"apply pattern {pid}"
            ports.ris.apply(control)
            log.info("pattern %s (%d/%d): %s", pid, pi + 1, len(patterns), control)
            for k, pose in enumerate(poses):
                stage = f"move to {pose}"
                ports.positioner.move_to(pose)
                ports.settle(plan.dwell / 1000.0)
                stage = f"read power at {pose}"
                power = ports.sensor.read_power()
                records.append(
                    MeasurementRecord(pid, control, pose.azimuth, pose.elevation, float(power), len(records), clock())
                )
                if on_progress is not None:
                    on_progress(ProgressEvent(pi, pid, k, pose, total))
        stage = "source shutdown"
        ports.source.rf_off()
    except Exception as exc:
        if stage != "source shutdown":
            try:
                ports.source.rf_off()
            except Exception:
                log.warning("rf_off failed while aborting", exc_info=True)
        raise CampaignAborted(records, len(records), stage, exc) from exc
    return records


class SimulatedSource:
    def __init__(self):
        self.frequency: float | None = None
        self.level: float | None = None
        self.rf_enabled = False

    def set_frequency(self, hz: float) -> None:
        self.frequency = hz

    def set_level(self, dbm: float) -> None:
        self.level = dbm

    def rf_on(self) -> None:
        self.rf_enabled = True

    def rf_off(self) -> None:
        self.rf_enabled = False


class SimulatedPositioner:
    """Moves instantly; ``move_to`` returns with the pose reached."""

    def __init__(self):
        self.pose: Pose | None = None
        self.moves = 0

    def move_to(self, pose: Pose) -> None:
        self.pose = pose
        self.moves += 1

    def current_pose(self) -> Pose | None:
        return self.pose


class SimulatedRis:
    def __init__(self):
        self.pattern: RisPattern | None = None

    def apply(self, control_string: str) -> None:
        self.pattern = decode(control_string)


class SimulatedSensor:
    """Power sensor backed by the field simulator.

    The simulator is deterministic, so the max-hold value over the dwell
    window equals the instantaneous value.
    """

    def __init__(self, scene: Scene, cfg: SimConfig, positioner: SimulatedPositioner, ris: SimulatedRis):
        self.scene = scene
        self.cfg = cfg
        self.positioner = positioner
        self.ris = ris
        self.settings: AnalyzerSettings | None = None

    def configure(self, settings: AnalyzerSettings) -> None:
        self.settings = settings

    def read_power(self) -> float:
        if self.ris.pattern is None:
            raise RigNotReady("no pattern applied")
        if self.positioner.pose is None:
            raise RigNotReady("positioner has not moved")
        return received_power(self.scene, self.positioner.pose, self.ris.pattern, self.cfg).power


def simulated_rig(scene: Scene, cfg: SimConfig | None = None) -> InstrumentPorts:
    cfg = cfg or SimConfig()
    positioner = SimulatedPositioner()
    ris = SimulatedRis()
    return InstrumentPorts(
        source=SimulatedSource(),
        sensor=SimulatedSensor(scene, cfg, positioner, ris),
        positioner=positioner,
        ris=ris,
    )


def campaign_manifest(scene: Scene, plan: SweepPlan, patterns, cfg: SimConfig | None = None) -> dict:
    return {
        "scene": asdict(scene),
        "plan": asdict(plan),
        "patterns": [{"id": pid, "control_string": encode(p)} for pid, p in patterns],
        "sim_config": asdict(cfg or SimConfig()),
    }


def load_manifest(data: dict) -> tuple[Scene, SweepPlan, list[tuple[str, RisPattern]], SimConfig]:
    return (
        Scene(**data["scene"]),
        SweepPlan(**data["plan"]),
        [(entry["id"], decode(entry["control_string"])) for entry in data["patterns"]],
        SimConfig(**data["sim_config"]),
    )


def write_manifest(path, manifest: dict) -> None:
    Path(path).write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def read_manifest(path):
    return load_manifest(json.loads(Path(path).read_text()))
