"""Bistatic measurement scene: fixed TX/RX antennas and a rotating RIS plate.

Frame: origin at the plate centre, +y towards the antenna line, +x from TX
towards RX, +z up.  TX sits at ``(-L, D, 0)`` and RX at ``(+L, D, 0)``.  At
azimuth 90 deg / elevation 0 the plate lies in the x-z plane facing +y.

A pose is applied as a tilt by the elevation angle about the plate's own
horizontal axis, followed by a yaw of ``azimuth - 90`` deg about global z.
Angles are degrees at every public boundary and radians internally.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0


@dataclass(frozen=True)
class Scene:
    antenna_offset: float = 1.0  # L, half the TX-RX separation [m]
    standoff: float = 1.5  # D, antenna line to plate [m]
    mount_height: float = 1.3  # [m], metadata only
    element_spacing: float | None = None  # [m], None -> half wavelength
    rows: int = 16
    cols: int = 16
    frequency: float = 5.5e9  # [Hz]
    tx_power: float = -10.0  # [dBm]

    def __post_init__(self):
        if self.antenna_offset <= 0 or self.standoff <= 0:
            raise ValueError("antenna_offset and standoff must be positive")
        if self.frequency <= 0:
            raise ValueError("frequency must be positive")
        if self.element_spacing is None:
            object.__setattr__(self, "element_spacing", self.wavelength / 2)
        if self.element_spacing <= 0:
            raise ValueError("element_spacing must be positive")
        if self.rows < 1 or self.cols < 1:
            raise ValueError("rows and cols must be at least 1")

    @property
    def wavelength(self) -> float:
        return SPEED_OF_LIGHT / self.frequency

    @property
    def wavenumber(self) -> float:
        return 2 * math.pi * self.frequency / SPEED_OF_LIGHT

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols

    @property
    def tx(self) -> np.ndarray:
        return np.array([-self.antenna_offset, self.standoff, 0.0])

    @property
    def rx(self) -> np.ndarray:
        return np.array([self.antenna_offset, self.standoff, 0.0])

    @property
    def center_distance(self) -> float:
        """Distance from either antenna to the plate centre."""
        return math.hypot(self.antenna_offset, self.standoff)

    def with_(self, **changes) -> Scene:
        return replace(self, **changes)

    def to_config(self) -> str:
        return "".join(f"{k}={v}\n" for k, v in asdict(self).items())

    @classmethod
    def from_config(cls, text: str) -> Scene:
        """Parse ``key=value`` lines; ``#`` starts a comment, unknown keys are rejected."""
        types = {f.name: f.type for f in fields(cls)}
        kwargs = {}
        for lineno, raw in enumerate(text.splitlines(), 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key, value = key.strip(), value.strip()
            if not sep or key not in types:
                raise ValueError(f"line {lineno}: expected one of {sorted(types)} as key=value: {raw!r}")
            kwargs[key] = int(value) if key in ("rows", "cols") else float(value)
        return cls(**kwargs)

    @classmethod
    def load(cls, path) -> Scene:
        return cls.from_config(Path(path).read_text())


def default_scene() -> Scene:
    return Scene()


@dataclass(frozen=True)
class Pose:
    """Plate orientation in degrees; azimuth 90 puts the plate parallel to the antenna line."""

    azimuth: float = 90.0
    elevation: float = 0.0

    def __post_init__(self):
        if not -1e-9 <= self.azimuth <= 180 + 1e-9:
            raise ValueError(f"azimuth must be within [0, 180] degrees, got {self.azimuth}")
        object.__setattr__(self, "azimuth", float(self.azimuth))
        object.__setattr__(self, "elevation", float(self.elevation))

    def sort_key(self) -> tuple[float, float]:
        return (self.elevation, self.azimuth)


def rotation_matrix(pose: Pose) -> np.ndarray:
    """Plate-to-world rotation: elevation about local x, then ``azimuth - 90`` about z."""
    el = math.radians(pose.elevation)
    yaw = math.radians(pose.azimuth - 90.0)
    ce, se = math.cos(el), math.sin(el)
    cy, sy = math.cos(yaw), math.sin(yaw)
    rot_x = np.array([[1.0, 0.0, 0.0], [0.0, ce, -se], [0.0, se, ce]])
    rot_z = np.array([[cy, -sy, 0.0], [sy, cy, 0.0], [0.0, 0.0, 1.0]])
    return rot_z @ rot_x


def local_grid(scene: Scene) -> np.ndarray:
    """Element coordinates on the untilted plate, shape ``(rows*cols, 3)``, row-major."""
    r, c = np.indices((scene.rows, scene.cols))
    u = (c - (scene.cols - 1) / 2) * scene.element_spacing
    w = ((scene.rows - 1) / 2 - r) * scene.element_spacing
    return np.stack([u.ravel(), np.zeros(scene.n_elements), w.ravel()], axis=1)


def element_positions(scene: Scene, pose: Pose) -> np.ndarray:
    """World coordinates of every element at ``pose``, shape ``(rows*cols, 3)``."""
    return local_grid(scene) @ rotation_matrix(pose).T


def plate_normal(pose: Pose) -> np.ndarray:
    return rotation_matrix(pose) @ np.array([0.0, 1.0, 0.0])


def aim_angle(scene: Scene) -> float:
    """Angle in degrees between the antenna line and the line from an antenna to the plate centre."""
    return math.degrees(math.atan2(scene.standoff, scene.antenna_offset))


def path_lengths(scene: Scene, pose: Pose) -> tuple[np.ndarray, np.ndarray]:
    """Per-element distances ``(d_tx, d_rx)`` in metres."""
    pos = element_positions(scene, pose)
    d_tx = np.linalg.norm(pos - scene.tx, axis=1)
    d_rx = np.linalg.norm(pos - scene.rx, axis=1)
    return d_tx, d_rx
