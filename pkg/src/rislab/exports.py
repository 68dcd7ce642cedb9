"""Records CSV, heatmap and polar exports, and a minimal polar SVG renderer."""
from __future__ import annotations

import csv
import io
import math
import os
import tempfile
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Sequence

RECORDS_HEADER = ["pattern_id", "azimuth_deg", "elevation_deg", "power_dbm", "sequence", "timestamp_utc"]
HEATMAP_CORNER = "elevation_deg\\azimuth_deg"


@dataclass(frozen=True)
class RecordRow:
    """One line of a records file, at the file's precision."""

    pattern_id: str
    azimuth: float
    elevation: float
    power: float
    sequence: int
    timestamp: datetime

    @classmethod
    def from_record(cls, rec) -> RecordRow:
        return cls(
            rec.pattern_id,
            round(rec.azimuth, 1),
            round(rec.elevation, 1),
            round(rec.power, 3),
            rec.sequence,
            rec.timestamp,
        )


def format_timestamp(ts: datetime) -> str:
    return ts.astimezone(timezone.utc).strftime("%Y-%m-%dT%H:%M:%S.%fZ")


def parse_timestamp(text: str) -> datetime:
    """RFC3339 timestamp; a missing offset is taken as UTC."""
    ts = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc)


def atomic_write(path, data: str | bytes) -> None:
    """Write to a temporary file next to ``path`` and rename it into place."""
    path = Path(path)
    mode = "wb" if isinstance(data, bytes) else "w"
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, mode, **({} if mode == "wb" else {"newline": ""})) as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def records_csv(records: Iterable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(RECORDS_HEADER)
    for r in sorted(records, key=lambda r: r.sequence):
        w.writerow([
            r.pattern_id,
            f"{r.azimuth:.1f}",
            f"{r.elevation:.1f}",
            f"{r.power:.3f}",
            r.sequence,
            format_timestamp(r.timestamp),
        ])
    return buf.getvalue()


def write_records(path, records: Iterable) -> None:
    atomic_write(path, records_csv(records))


def read_records(path) -> list[RecordRow]:
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header != RECORDS_HEADER:
            raise ValueError(f"{path}: unexpected header {header}")
        return [
            RecordRow(pid, float(az), float(el), float(p), int(seq), parse_timestamp(ts))
            for pid, az, el, p, seq, ts in reader
        ]


def heatmap_csv(azimuths: Sequence[float], elevations: Sequence[float], power) -> str:
    """Matrix layout: azimuth grid across the first row, elevation grid down the first column."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow([HEATMAP_CORNER] + [f"{a:.1f}" for a in azimuths])
    for el, row in zip(elevations, power):
        w.writerow([f"{el:.1f}"] + [f"{p:.3f}" for p in row])
    return buf.getvalue()


def polar_csv(azimuths: Sequence[float], power: Sequence[float]) -> str:
    lines = ["azimuth_deg,power_dbm"]
    lines += [f"{a:.1f},{p:.3f}" for a, p in zip(azimuths, power)]
    return "\n".join(lines) + "\n"


def polar_svg(azimuths: Sequence[float], power: Sequence[float], floor: float = -110.0, title: str = "") -> str:
    """Half-disc polar plot of power against azimuth (0 deg right, 180 deg left).

    The radial axis spans 50 dB below the next multiple of 10 above the peak,
    never below ``floor``; lower values are drawn at the centre.
    """
    if len(azimuths) == 0 or len(azimuths) != len(power):
        raise ValueError("need matching, non-empty azimuth and power sequences")
    size, margin = 400.0, 30.0
    radius = size / 2 - margin
    cx, cy = size / 2, size / 2 + margin / 2
    top = 10.0 * math.ceil(max(power) / 10.0)
    bottom = max(floor, top - 50.0)
    if top <= bottom:
        top = bottom + 10.0

    def xy(angle_deg, dbm):
        r = radius * (min(max(dbm, bottom), top) - bottom) / (top - bottom)
        a = math.radians(angle_deg)
        return cx + r * math.cos(a), cy - r * math.sin(a)

    out = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size:.0f}" height="{size / 2 + 2 * margin:.0f}" '
        f'viewBox="0 0 {size:.0f} {size / 2 + 2 * margin:.0f}">',
        f"<title>{_escape(title)}</title>",
        '<g fill="none" stroke="#bbb" stroke-width="0.5">',
    ]
    level = top
    while level >= bottom - 1e-9:
        r = radius * (level - bottom) / (top - bottom)
        if r > 0:
            out.append(f'<path d="M {cx - r:.2f} {cy:.2f} A {r:.2f} {r:.2f} 0 0 1 {cx + r:.2f} {cy:.2f}"/>')
        level -= 10.0
    for spoke in range(0, 181, 30):
        x, y = xy(spoke, top)
        out.append(f'<line x1="{cx:.2f}" y1="{cy:.2f}" x2="{x:.2f}" y2="{y:.2f}"/>')
    out.append("</g>")
    out.append('<g font-family="sans-serif" font-size="9" fill="#555">')
    level = top
    while level >= bottom - 1e-9:
        x = cx + radius * (level - bottom) / (top - bottom)
        out.append(f'<text x="{x:.2f}" y="{cy + 11:.2f}" text-anchor="middle">{level:.0f}</text>')
        level -= 10.0
    for spoke in range(0, 181, 30):
        a = math.radians(spoke)
        x, y = cx + 1.08 * radius * math.cos(a), cy - 1.08 * radius * math.sin(a)
        out.append(f'<text x="{x:.2f}" y="{y:.2f}" text-anchor="middle">{spoke}</text>')
    out.append("</g>")
    points = " ".join("{:.2f},{:.2f}".format(*xy(a, p)) for a, p in zip(azimuths, power))
    out.append(f'<polyline class="data" fill="none" stroke="#1f4e9c" stroke-width="1.2" points="{points}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
