"""Command line interface: ``rislab {encode,decode,simulate,codebook,polar-svg}``.

Exit status is 0 on success, 2 for usage errors (bad flags or pattern
specs) and 1 for runtime failures.
"""
from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from dataclasses import replace
from pathlib import Path

from . import pattern as pat
from .codebook import Codebook, build_codebook
from .exports import (
    atomic_write,
    heatmap_csv,
    parse_timestamp,
    polar_csv,
    polar_svg,
    read_records,
    records_csv,
)
from .fieldsim import SimConfig
from .geometry import Pose, Scene
from .sweep import SweepPlan, campaign_manifest, plan_2d, plan_3d, run_campaign, simulated_rig

log = logging.getLogger("rislab")

PATTERN_HELP = (
    "uniform:on|off, stripes:v|h:<width>[:<first bit>], checker:<block>, random[:<seed>], "
    "single:<row>,<col>, a !0X control string, or a path to a 16x16 grid file"
)


class UsageError(ValueError):
    pass


def parse_pattern_source(source: str, seed: int = 0) -> tuple[str, pat.RisPattern]:
    """Resolve a pattern spec from the builder mini-language to ``(pattern_id, pattern)``."""
    if source.upper().startswith(pat.PREFIX):
        return source.upper(), pat.decode(source)
    head, _, rest = source.partition(":")
    args = rest.split(":") if rest else []
    try:
        if head == "uniform" and len(args) == 1:
            state = {"on": 1, "1": 1, "off": 0, "0": 0}[args[0]]
            return source, pat.uniform(state)
        if head == "stripes" and len(args) in (2, 3):
            orient = {"v": "vertical", "vertical": "vertical", "h": "horizontal", "horizontal": "horizontal"}[args[0]]
            first = int(args[2]) if len(args) == 3 else 1
            return source, pat.stripes(orient, int(args[1]), first)
        if head in ("checker", "checkerboard") and len(args) == 1:
            return source, pat.checkerboard(int(args[0]))
        if head == "random" and len(args) <= 1:
            s = int(args[0]) if args else seed
            return f"random:{s}", pat.random_pattern(s)
        if head == "single" and len(args) == 1:
            r, c = (int(v) for v in args[0].split(","))
            if not (0 <= r < pat.ROWS and 0 <= c < pat.COLS):
                raise ValueError("cell out of range")
            return source, pat.single_element(r, c)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"bad pattern spec {source!r}: {exc}") from exc
    if head in ("uniform", "stripes", "checker", "checkerboard", "random", "single"):
        raise UsageError(f"bad pattern spec {source!r}; expected {PATTERN_HELP}")
    path = Path(source)
    if not path.is_file():
        raise UsageError(f"unknown pattern spec or missing grid file {source!r}; expected {PATTERN_HELP}")
    return path.stem, pat.RisPattern.from_file(path)


def safe_name(pattern_id: str) -> str:
    return re.sub(r"[^A-Za-z0-9_.-]+", "-", pattern_id).strip("-") or "pattern"


def _scene_from_args(args) -> Scene:
    scene = Scene.load(args.scene) if args.scene else Scene()
    changes = {}
    if args.freq is not None:
        changes["frequency"] = args.freq
        if args.spacing is None:
            changes["element_spacing"] = None  # half wavelength at the new frequency
    if args.spacing is not None:
        changes["element_spacing"] = args.spacing
    if args.tx_power is not None:
        changes["tx_power"] = args.tx_power
    return replace(scene, **changes) if changes else scene


def _config_from_args(args) -> SimConfig:
    return SimConfig(wave_model=args.wave_model, element_factor_exponent=args.q, power_offset=args.offset)


def _fixed_clock(args):
    if not args.fixed_clock:
        return None
    ts = parse_timestamp(args.fixed_clock)
    return lambda: ts


def cmd_encode(args) -> int:
    _, p = parse_pattern_source(args.source, args.seed)
    print(pat.encode(p))
    return 0


def cmd_decode(args) -> int:
    sys.stdout.write(pat.decode(args.control_string).to_text())
    return 0


def cmd_simulate(args) -> int:
    scene = _scene_from_args(args)
    cfg = _config_from_args(args)
    plan = plan_2d(args.dwell) if args.scenario == "2d" else plan_3d(args.dwell)
    patterns = [parse_pattern_source(s, args.seed) for s in args.patterns]
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    kwargs = {}
    clock = _fixed_clock(args)
    if clock is not None:
        kwargs["clock"] = clock
    records = run_campaign(simulated_rig(scene, cfg), scene, plan, patterns, **kwargs)

    atomic_write(out / "records.csv", records_csv(records))
    manifest = campaign_manifest(scene, plan, patterns, cfg)
    atomic_write(out / "manifest.json", json.dumps(manifest, indent=2, sort_keys=True) + "\n")

    azs, els = plan.azimuths(), plan.elevations()
    for pid, _ in patterns:
        recs = [r for r in records if r.pattern_id == pid]
        grid = [[r.power for r in recs[i * len(azs):(i + 1) * len(azs)]] for i in range(len(els))]
        name = safe_name(pid)
        if args.scenario == "3d":
            atomic_write(out / f"heatmap_{name}.csv", heatmap_csv(azs, els, grid))
        if 0.0 in els:
            row = grid[els.index(0.0)]
            atomic_write(out / f"polar_{name}.csv", polar_csv(azs, row))
            atomic_write(out / f"polar_{name}.svg", polar_svg(azs, row, cfg.floor, pid))
        best = max(recs, key=lambda r: r.power)
        print(
            f"{pid}: peak {best.power:.3f} dBm at azimuth {best.azimuth:.1f} deg, "
            f"elevation {best.elevation:.1f} deg"
        )
    print(f"wrote {len(records)} records to {out / 'records.csv'}")
    return 0


def cmd_codebook_build(args) -> int:
    scene = _scene_from_args(args)
    cfg = _config_from_args(args)
    if args.targets == "2d":
        targets = plan_2d()
    elif args.targets == "3d":
        targets = plan_3d()
    else:
        try:
            values = [float(v) for v in args.targets.split(",")]
            targets = SweepPlan(*values, dwell=0.0)
        except (TypeError, ValueError) as exc:
            raise UsageError(
                f"--targets must be 2d, 3d or az_start,az_stop,az_step[,el_start,el_stop,el_step]: {exc}"
            ) from exc
    cb = build_codebook(scene, targets, cfg, weighted=args.weighted)
    atomic_write(args.out, json.dumps(cb.to_json(), indent=2) + "\n")
    print(f"wrote {len(cb)} entries to {args.out}")
    return 0


def cmd_codebook_query(args) -> int:
    cb = Codebook.load(args.codebook)
    e = cb.lookup(Pose(args.azimuth, args.elevation))
    print(json.dumps({
        "azimuth": e.pose.azimuth,
        "elevation": e.pose.elevation,
        "control_string": pat.encode(e.pattern),
        "predicted_power": e.predicted_power,
    }))
    return 0


def cmd_polar_svg(args) -> int:
    rows = [r for r in read_records(args.records) if r.pattern_id == args.pattern]
    if args.elevation is not None:
        rows = [r for r in rows if abs(r.elevation - args.elevation) < 1e-9]
    if not rows:
        raise RuntimeError(f"no records for pattern {args.pattern!r} in {args.records}")
    if len({r.elevation for r in rows}) > 1:
        raise RuntimeError("records span several elevations; pick one with --elevation")
    rows.sort(key=lambda r: r.azimuth)
    svg = polar_svg([r.azimuth for r in rows], [r.power for r in rows], args.floor, args.pattern)
    atomic_write(args.out, svg)
    return 0


def _add_scene_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("scene and simulator")
    g.add_argument("--scene", help="key=value scene file")
    g.add_argument("--spacing", type=float, help="element spacing [m] (default: half wavelength)")
    g.add_argument("--freq", type=float, help="carrier frequency [Hz]")
    g.add_argument("--tx-power", type=float, help="generator level [dBm]")
    g.add_argument("--offset", type=float, default=0.0, help="power calibration offset [dB]")
    g.add_argument("--wave-model", choices=("spherical", "planar"), default="spherical")
    g.add_argument("--q", type=float, default=0.0, help="element cos^q taper exponent")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rislab", description="1-bit RIS measurement campaign toolkit")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="print the control string of a pattern")
    p.add_argument("source", help=PATTERN_HELP)
    p.add_argument("--seed", type=int, default=0, help="seed for a bare 'random' spec")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="print a control string as a 16x16 grid")
    p.add_argument("control_string")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("simulate", help="run a 2D or 3D sweep on the simulated rig")
    p.add_argument("scenario", choices=("2d", "3d"))
    p.add_argument("patterns", nargs="+", help=PATTERN_HELP)
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--dwell", type=float, default=150.0, help="dwell per pose [ms]")
    p.add_argument("--fixed-clock", help="RFC3339 timestamp stamped on every record")
    _add_scene_flags(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("codebook", help="build or query a steering codebook")
    csub = p.add_subparsers(dest="action", required=True)
    b = csub.add_parser("build")
    b.add_argument("--targets", default="2d", help="2d, 3d or az_start,az_stop,az_step[,el_start,el_stop,el_step]")
    b.add_argument("--out", required=True)
    b.add_argument("--weighted", action="store_true", help="amplitude-weighted objective")
    _add_scene_flags(b)
    b.set_defaults(func=cmd_codebook_build)
    q = csub.add_parser("query")
    q.add_argument("--codebook", required=True)
    q.add_argument("--azimuth", type=float, required=True)
    q.add_argument("--elevation", type=float, default=0.0)
    q.set_defaults(func=cmd_codebook_query)

    p = sub.add_parser("polar-svg", help="render one pattern's records as a polar SVG")
    p.add_argument("records")
    p.add_argument("--pattern", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--elevation", type=float)
    p.add_argument("--floor", type=float, default=-110.0)
    p.set_defaults(func=cmd_polar_svg)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"rislab: error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:
        log.debug("command failed", exc_info=True)
        print(f"rislab: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
