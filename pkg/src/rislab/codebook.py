"""1-bit steering codebooks.

For a target pose the best 1-bit pattern maximises ``|sum_n a_n s_n e^{j phi_n}|``
over ``s_n in {+1, -1}``, where ``phi_n`` is the element's propagation phase.
For any reference direction ``psi`` the sign rule ``s_n = sign(cos(phi_n - psi))``
gives a candidate, and the optimum is one of them: with ``psi`` the argument of
the optimal sum, flipping any element that disagrees with the rule would
increase the magnitude.  The rule only changes when ``psi`` crosses some
``phi_n +/- pi/2``, so evaluating it once inside each of the (at most 2N) arcs
between those boundaries finds the exact optimum in O(N^2).
"""
from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .fieldsim import SimConfig, path_terms, received_power
from .geometry import Pose, Scene
from .pattern import COLS, ROWS, RisPattern, decode, encode
from .sweep import SweepPlan

TWO_PI = 2 * math.pi
ORACLE_MAX_ELEMENTS = 20


class OracleTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class PhaseProfile:
    phases: np.ndarray  # [rad] in [0, 2pi), row-major
    rows: int
    cols: int

    def __post_init__(self):
        if len(self.phases) != self.rows * self.cols:
            raise ValueError("phase count does not match plate size")

    def __len__(self):
        return len(self.phases)


def propagation_phase(scene: Scene, pose: Pose) -> np.ndarray:
    """Unreduced ``-k (d_tx + d_rx)`` per element [rad]."""
    return path_terms(scene, pose)[1]


def phase_profile(scene: Scene, pose: Pose) -> PhaseProfile:
    phases = np.mod(propagation_phase(scene, pose), TWO_PI)
    return PhaseProfile(phases, scene.rows, scene.cols)


def _magnitude(signs, phases, weights) -> float:
    return float(abs(np.sum(weights * signs * np.exp(1j * phases))))


def binarize_signs(phases, weights=None) -> tuple[np.ndarray, float]:
    """Exact optimal +/-1 signs for ``|sum w_n s_n exp(j phases_n)|``.

    Returns the sign vector (normalised so the first element is +1; the
    complement reaches the same magnitude) and the achieved magnitude.
    """
    phases = np.mod(np.asarray(phases, dtype=float), TWO_PI)
    n = len(phases)
    if n == 0:
        raise ValueError("empty phase profile")
    weights = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    if weights.shape != (n,) or np.any(weights < 0):
        raise ValueError("weights must be non-negative, one per element")

    bounds = np.unique(np.mod(np.concatenate([phases + math.pi / 2, phases - math.pi / 2]), TWO_PI))
    nxt = np.append(bounds[1:], bounds[0] + TWO_PI)
    psi = (bounds + nxt) / 2

    c = np.cos(phases[None, :] - psi[:, None])
    signs = np.where(c >= 0, 1.0, -1.0)  # a tie goes to +1
    sums = (signs * weights) @ np.exp(1j * phases)
    best = signs[int(np.argmax(np.abs(sums)))]
    if best[0] < 0:
        best = -best
    return best, _magnitude(best, phases, weights)


def binarize(profile: PhaseProfile, weights=None) -> tuple[RisPattern, float]:
    """Optimal 16x16 pattern for ``profile``; bit 1 wherever the sign is -1."""
    if (profile.rows, profile.cols) != (ROWS, COLS):
        raise ValueError(f"binarize needs a {ROWS}x{COLS} profile; use binarize_signs for other sizes")
    signs, mag = binarize_signs(profile.phases, weights)
    return RisPattern((signs < 0).astype(np.uint8)), mag


def exhaustive_optimum(profile, weights=None) -> tuple[np.ndarray, float]:
    """Brute force over all 2^N sign vectors (N <= 20)."""
    phases = np.asarray(getattr(profile, "phases", profile), dtype=float)
    n = len(phases)
    if n > ORACLE_MAX_ELEMENTS:
        raise OracleTooLarge(f"exhaustive search limited to {ORACLE_MAX_ELEMENTS} elements, got {n}")
    if n == 0:
        raise ValueError("empty phase profile")
    w = np.ones(n) if weights is None else np.asarray(weights, dtype=float)
    z = w * np.exp(1j * phases)

    def all_signs(m):
        idx = np.arange(2**m)[:, None] >> np.arange(m)[::-1][None, :]
        return 1.0 - 2.0 * (idx & 1)

    # Split in halves so 2^20 candidates are a 1024 x 1024 outer sum.
    h = n // 2
    left, right = all_signs(h), all_signs(n - h)
    total = (left @ z[:h])[:, None] + (right @ z[h:])[None, :]
    i, j = np.unravel_index(int(np.argmax(np.abs(total))), total.shape)
    signs = np.concatenate([left[i], right[j]])
    return signs, float(abs(total[i, j]))


@dataclass(frozen=True)
class CodebookEntry:
    pose: Pose
    pattern: RisPattern
    predicted_power: float  # [dBm]


class Codebook:
    """Target pose -> best pattern, ordered by (elevation, azimuth)."""

    def __init__(self, scene: Scene, entries, cfg: SimConfig | None = None):
        self.scene = scene
        self.cfg = cfg or SimConfig()
        self.entries: dict[Pose, CodebookEntry] = {
            e.pose: e for e in sorted(entries, key=lambda e: e.pose.sort_key())
        }

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries.values())

    def __getitem__(self, pose: Pose) -> CodebookEntry:
        return self.entries[pose]

    def lookup(self, pose: Pose) -> CodebookEntry:
        """Exact entry if present, else the nearest target (Euclidean in degrees)."""
        if pose in self.entries:
            return self.entries[pose]
        if not self.entries:
            raise KeyError("empty codebook")
        return min(
            self.entries.values(),
            key=lambda e: math.hypot(e.pose.azimuth - pose.azimuth, e.pose.elevation - pose.elevation),
        )

    def to_json(self) -> dict:
        return {
            "scene": asdict(self.scene),
            "sim_config": asdict(self.cfg),
            "entries": [
                {
                    "azimuth": e.pose.azimuth,
                    "elevation": e.pose.elevation,
                    "control_string": encode(e.pattern),
                    "predicted_power": e.predicted_power,
                }
                for e in self
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> Codebook:
        entries = [
            CodebookEntry(Pose(d["azimuth"], d["elevation"]), decode(d["control_string"]), float(d["predicted_power"]))
            for d in data["entries"]
        ]
        return cls(Scene(**data["scene"]), entries, SimConfig(**data.get("sim_config", {})))

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> Codebook:
        return cls.from_json(json.loads(Path(path).read_text()))


def build_codebook(
    scene: Scene, targets: SweepPlan, cfg: SimConfig | None = None, weighted: bool = False
) -> Codebook:
    """One optimal pattern per pose of ``targets``.

    ``weighted=True`` puts the simulator's per-element amplitudes inside the
    objective; the default uses unit amplitudes.
    """
    cfg = cfg or SimConfig()
    if (scene.rows, scene.cols) != (ROWS, COLS):
        raise ValueError(f"codebooks are built for the {ROWS}x{COLS} plate")
    entries = []
    for pose in targets.poses():
        amp, phase = path_terms(scene, pose, cfg)
        profile = PhaseProfile(np.mod(phase, TWO_PI), scene.rows, scene.cols)
        pattern, _ = binarize(profile, amp if weighted else None)
        entries.append(CodebookEntry(pose, pattern, received_power(scene, pose, pattern, cfg).power))
    return Codebook(scene, entries, cfg)
