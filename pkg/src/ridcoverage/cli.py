"""Command-line front end: ``ridcov {analytic,mc-verify,urban,hybrid,ingest-check}``.

Units: radii in metres (or idealised units for ``analytic``/``mc-verify``),
altitudes in feet, angles in radians.

Exit codes: 0 success, 1 usage or configuration error, 2 data error,
3 convergence failure (quadrature, planning, or receiver-count search).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import os
import sys
from dataclasses import replace
from pathlib import Path

import jsonschema
import numpy as np

from ._io import OutputSet
from .expectation import QuadratureError, difference_curve
from .geo import GeoDataError, Theme, build_occupancy_grid, load_city, load_roi_lonlat, parse_theme_geojson, project_geometry
from .geo import RegionOfInterest, _read
from .hybrid import REPORT_SCHEMA, hybrid_report, pack_roi, simulated_coverage_at_centers
from .montecarlo import REFERENCE_RC_FRACTIONS, REFERENCE_RE_GRID, sweep_to_csv, verification_sweep
from .planning import OdPair, Planner, PlanningError, RrtStarParams, Trajectory, plan_rrt_star, plan_slpp
from .rng import RngStream
from .urban import ReceiverCountError, ReceiverTech, ScenarioConfig, evaluate_scenario, find_receiver_count, running_means_csv

log = logging.getLogger("ridcoverage")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_CONVERGENCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


_RRT_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "max_iterations": {"type": "integer", "minimum": 1},
        "step_size": {"type": "number", "exclusiveMinimum": 0},
        "goal_bias": {"type": "number", "minimum": 0, "exclusiveMaximum": 1},
        "goal_radius": {"type": "number", "exclusiveMinimum": 0},
        "rewire_radius_gamma": {"type": "number", "exclusiveMinimum": 0},
        "collision_check_resolution": {"type": "number", "exclusiveMinimum": 0},
    },
}

_CITY_PROPS = {
    "buildings": {"type": "string"},
    "vendors": {"type": "string"},
    "residential": {"type": "string"},
    "roi": {"type": "string"},
    "n_customers": {"type": "integer", "minimum": 1},
    "cell_size": {"type": "number", "exclusiveMinimum": 0},
    "default_height_m": {"type": "number", "minimum": 0},
    "seed": {"type": "integer", "minimum": 0},
}

URBAN_CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["buildings", "vendors", "residential"],
    "properties": {
        **_CITY_PROPS,
        "altitude_ft": {"type": "number", "minimum": 0},
        "tech": {"enum": [t.name for t in ReceiverTech]},
        "planner": {"enum": [p.value for p in Planner]},
        "n_receivers": {"type": "integer", "minimum": 0},
        "trajectories_per_trial": {"type": "integer", "minimum": 1},
        "n_trials": {"type": "integer", "minimum": 1},
        "fixed_deployment": {"type": "boolean"},
        "targets": {"type": "array", "items": {"type": "number", "minimum": 0, "exclusiveMaximum": 1}},
        "search": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"lower": {"type": "integer", "minimum": 1}, "upper": {"type": "integer", "minimum": 1}},
        },
        "convergence": {
            "type": "object",
            "additionalProperties": False,
            "properties": {"window": {"type": "integer", "minimum": 1}, "tolerance": {"type": "number", "minimum": 0}},
        },
        "rrt": _RRT_SCHEMA,
    },
}

HYBRID_CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["roi", "r_e"],
    "properties": {
        **_CITY_PROPS,
        "r_e": {"type": "number", "exclusiveMinimum": 0},
        "r_c": {"type": "number", "exclusiveMinimum": 0},
        "tech": {"enum": [t.name for t in ReceiverTech]},
        "case": {"enum": ["UDE", "UDM"]},
        "trajectories": {"type": "string"},
        "n_trajectories": {"type": "integer", "minimum": 1},
        "planner": {"enum": [p.value for p in Planner]},
        "altitude_ft": {"type": "number", "minimum": 0},
        "compare_simulation": {"type": "boolean"},
        "rrt": _RRT_SCHEMA,
    },
}


def _load_config(path, schema) -> tuple[dict, Path]:
    path = Path(path)
    try:
        cfg = json.loads(path.read_text())
    except FileNotFoundError:
        raise GeoDataError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: invalid JSON: {exc}") from None
    try:
        jsonschema.validate(cfg, schema)
    except jsonschema.ValidationError as exc:
        where = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise UsageError(f"{path}: invalid config at {where}: {exc.message}") from None
    return cfg, path.parent


def _resolve(base: Path, p):
    if p is None:
        return None
    p = Path(p)
    return p if p.is_absolute() else base / p


def _city_from_config(cfg: dict, base: Path):
    return load_city(
        _resolve(base, cfg["buildings"]),
        _resolve(base, cfg["vendors"]),
        _resolve(base, cfg["residential"]),
        _resolve(base, cfg.get("roi")),
        n_customers=cfg.get("n_customers", 1000),
        rng=RngStream(cfg.get("seed", 0), 7),
        cell_size=cfg.get("cell_size", 10.0),
        default_height=cfg.get("default_height_m", 8.0),
    )


def _fmt(v: float) -> str:
    return f"{v:.10g}"


# --- analytic ---------------------------------------------------------------


def _parse_sweep(spec: str) -> np.ndarray:
    try:
        start, stop, step = (float(x) for x in spec.split(":"))
    except ValueError:
        raise UsageError(f"--rho-sweep expects start:stop:step, got {spec!r}") from None
    if step <= 0 or stop < start or start < 0 or stop > 1:
        raise UsageError("--rho-sweep needs 0 <= start <= stop <= 1 and step > 0")
    n = int(round((stop - start) / step))
    return np.round(start + step * np.arange(n + 1), 12)


def cmd_analytic(args) -> int:
    if args.rho_sweep:
        rhos = _parse_sweep(args.rho_sweep)
        r_e = 1.0
    else:
        if args.rc is None or args.re is None:
            raise UsageError("give --rc and --re, or --rho-sweep")
        if not (0 < args.rc <= args.re):
            raise UsageError(f"need 0 < rc <= re (got rc={args.rc}, re={args.re})")
        rhos = np.array([args.rc / args.re])
        r_e = args.re
    curve = difference_curve(rhos)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["rho", "r_c", "r_e", "ude", "udm", "delta"])
    for rho, u, m, d in curve:
        w.writerow([_fmt(rho), _fmt(rho * r_e), _fmt(r_e), _fmt(u), _fmt(m), _fmt(d)])
    text = buf.getvalue()
    sys.stdout.write(text)
    if args.out:
        out = OutputSet("analytic", vars_for_manifest(args), None, _manifest_for(args.out))
        out.add(args.out, text)
        out.commit()
    return EXIT_OK


# --- mc-verify --------------------------------------------------------------


def _floats(spec: str) -> list[float]:
    try:
        vals = [float(x) for x in spec.split(",") if x.strip()]
    except ValueError:
        raise UsageError(f"expected comma-separated numbers, got {spec!r}") from None
    if not vals:
        raise UsageError("empty grid")
    return vals


def cmd_mc_verify(args) -> int:
    re_grid = _floats(args.re_grid)
    fractions = _floats(args.fractions)
    if any(r <= 0 for r in re_grid) or any(not 0 < f <= 1 for f in fractions):
        raise UsageError("radii must be positive and fractions in (0, 1]")
    if args.n_trials < 2:
        raise UsageError("--n-trials must be at least 2")
    rows = verification_sweep(re_grid, fractions, args.n_trials, RngStream(args.seed), threads=args.threads)
    text = sweep_to_csv(rows)
    if args.out:
        out = OutputSet("mc-verify", vars_for_manifest(args), args.seed, _manifest_for(args.out))
        out.add(args.out, text)
        out.commit()
    else:
        sys.stdout.write(text)
    bad = [r for r in rows if not r.consistent and r.error is None]
    if bad:
        log.warning("%d cell(s) outside the 4-standard-error band", len(bad))
    if any(r.error for r in rows):
        return EXIT_CONVERGENCE
    return EXIT_OK


# --- urban ---------------------------------------------------------------------


def _scenario_from(cfg: dict, args) -> ScenarioConfig:
    conv = cfg.get("convergence", {})
    sc = ScenarioConfig(
        altitude_ft=cfg.get("altitude_ft", 200.0),
        tech=cfg.get("tech", "R1000"),
        planner=cfg.get("planner", "SLPP"),
        n_receivers=cfg.get("n_receivers", 30),
        trajectories_per_trial=cfg.get("trajectories_per_trial", 1000),
        n_trials=cfg.get("n_trials", 20),
        seed=cfg.get("seed", 0),
        fixed_deployment=cfg.get("fixed_deployment", False),
        rrt=RrtStarParams(**cfg.get("rrt", {})),
        convergence_window=conv.get("window", 50),
        convergence_tolerance=conv.get("tolerance", 0.03),
    )
    overrides = {
        "tech": args.tech,
        "planner": args.planner,
        "altitude_ft": args.altitude_ft,
        "n_receivers": args.n_receivers,
        "n_trials": args.trials,
        "trajectories_per_trial": args.trajectories,
        "seed": args.seed,
    }
    return replace(sc, **{k: v for k, v in overrides.items() if v is not None})


def cmd_urban(args) -> int:
    cfg, base = _load_config(args.config, URBAN_CONFIG_SCHEMA)
    if args.seed is not None:
        cfg["seed"] = args.seed
    sc = _scenario_from(cfg, args)
    world = _city_from_config(cfg, base)
    out_dir = Path(args.out_dir)
    snapshot = {**cfg, "resolved": {k: str(v) for k, v in sc.__dict__.items()}}
    out = OutputSet("urban", snapshot, sc.seed, out_dir / "manifest.json")

    targets = [args.find_target] if args.find_target is not None else cfg.get("targets")
    search = cfg.get("search", {})
    if targets:
        entries = []
        last = None
        for target in targets:
            n, achieved = find_receiver_count(
                target, sc, world, lower=search.get("lower", 1), upper=search.get("upper"), threads=args.threads
            )
            last = evaluate_scenario(replace(sc, n_receivers=n), world, args.threads)
            entries.append(
                {
                    "tech": sc.tech.name,
                    "target": target,
                    "n_receivers": n,
                    "achieved_mean": achieved,
                    "trials": sc.n_trials,
                    "failures": last.failures,
                }
            )
            print(f"{sc.tech.name} target {target:.3f}: n={n} achieved={achieved:.4f}")
        out.add(out_dir / "summary.json", json.dumps(entries if len(entries) > 1 else entries[0], indent=2) + "\n")
        out.add(out_dir / "running_means.csv", running_means_csv(last.running_means))
    else:
        result = evaluate_scenario(sc, world, args.threads)
        out.add(out_dir / "summary.json", json.dumps(result.summary(sc), indent=2) + "\n")
        out.add(out_dir / "running_means.csv", running_means_csv(result.running_means))
        print(
            f"{sc.tech.name} {sc.planner.value} n={sc.n_receivers}: mean={result.overall_mean:.4f} "
            f"converged={result.converged} failures={result.failures}"
        )
    out.commit()
    return EXIT_OK


# --- hybrid --------------------------------------------------------------------


def _hybrid_trajectories(cfg: dict, base: Path, reference):
    if "trajectories" in cfg:
        lines = _resolve(base, cfg["trajectories"]).read_text().splitlines()
        return [Trajectory.from_json(line) for line in lines if line.strip()], None
    missing = [k for k in ("buildings", "vendors", "residential") if k not in cfg]
    if missing:
        raise UsageError(f"hybrid config needs 'trajectories' or city files (missing {missing})")
    world = _city_from_config(cfg, base)
    gen = RngStream(cfg.get("seed", 0), 11).generator()
    planner = Planner(cfg.get("planner", "SLPP"))
    trajs = []
    attempt = 0
    while len(trajs) < cfg.get("n_trajectories", 200):
        o = world.vendors[gen.integers(world.vendors.shape[0])]
        d = world.customers[gen.integers(world.customers.shape[0])]
        if np.all(o == d):
            continue
        od = OdPair(o, d)
        if planner is Planner.SLPP:
            trajs.append(plan_slpp(od))
        else:
            params = RrtStarParams(**cfg.get("rrt", {}), rng=RngStream(cfg.get("seed", 0), 12, (attempt,)))
            attempt += 1
            try:
                trajs.append(plan_rrt_star(od, world.grid(cfg.get("altitude_ft", 200.0)), params))
            except PlanningError:
                continue
    return trajs, world


def cmd_hybrid(args) -> int:
    cfg, base = _load_config(args.config, HYBRID_CONFIG_SCHEMA)
    if "r_c" in cfg:
        r_c = float(cfg["r_c"])
    elif "tech" in cfg:
        r_c = ReceiverTech.parse(cfg["tech"]).radius
    else:
        raise UsageError("hybrid config needs 'r_c' or 'tech'")
    if cfg["r_e"] < r_c:
        raise UsageError(f"r_e={cfg['r_e']} must be at least r_c={r_c}")
    roi_ll = load_roi_lonlat(_resolve(base, cfg["roi"]))
    c = roi_ll.centroid
    reference = (c.x, c.y)
    roi = RegionOfInterest.from_boundary(project_geometry(roi_ll, reference))
    trajs, world = _hybrid_trajectories(cfg, base, reference)
    if world is not None and world.reference != reference:
        raise GeoDataError("ROI reference differs from the city reference")
    packing = pack_roi(roi, float(cfg["r_e"]), r_c)
    report = hybrid_report(trajs, packing, cfg.get("case", "UDE"))
    if cfg.get("compare_simulation", True) and packing.K:
        sim = simulated_coverage_at_centers(trajs, packing)
        report["simulated_mean"] = sim
        report["abs_difference"] = abs(sim - report["estimate"])
    jsonschema.validate(report, REPORT_SCHEMA)
    out_dir = Path(args.out_dir)
    out = OutputSet("hybrid", cfg, cfg.get("seed"), out_dir / "manifest.json")
    out.add(out_dir / "hybrid_report.json", json.dumps(report, indent=2) + "\n")
    out.commit()
    print(f"K={packing.K} estimate={report['estimate']:.4f} epsilon={report['epsilon']:.4f}")
    return EXIT_OK


# --- ingest-check -------------------------------------------------------------


def cmd_ingest_check(args) -> int:
    b = parse_theme_geojson(_read(args.buildings), Theme.BUILDINGS, args.default_height)
    v = parse_theme_geojson(_read(args.vendors), Theme.VENDORS)
    r = parse_theme_geojson(_read(args.residential), Theme.RESIDENTIAL)
    report = {
        "buildings": len(b.geometries),
        "buildings_missing_height": b.missing_height,
        "vendors": len(v.geometries),
        "residential_polygons": len(r.geometries),
        "skipped": {"buildings": b.skipped, "vendors": v.skipped, "residential": r.skipped},
    }
    if args.dump_grid or args.altitude_ft is not None:
        world = load_city(
            args.buildings,
            args.vendors,
            args.residential,
            args.roi,
            n_customers=1,
            cell_size=args.cell_size,
            default_height=args.default_height,
        )
        alt = 200.0 if args.altitude_ft is None else args.altitude_ft
        grid = build_occupancy_grid(world.buildings, world.roi, alt, args.cell_size)
        report["retained_buildings"] = len(world.buildings)
        report["vendors_in_roi"] = int(world.vendors.shape[0])
        report["grid"] = grid.header()
        if args.dump_grid:
            d = Path(args.dump_grid)
            out = OutputSet("ingest-check", vars_for_manifest(args), None, d / "manifest.json")
            stem = f"occupancy_{alt:g}ft"
            out.add(d / f"{stem}.pgm", grid.to_pgm())
            out.add(d / f"{stem}.json", json.dumps(grid.header(), indent=2) + "\n")
            out.commit()
    print(json.dumps(report, indent=2))
    return EXIT_OK


# --- wiring ----------------------------------------------------------------------


def vars_for_manifest(args) -> dict:
    return {k: v for k, v in vars(args).items() if k != "func"}


def _manifest_for(out_path) -> Path:
    p = Path(out_path)
    return p.with_name(p.name + ".manifest.json")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="ridcov", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    p.add_argument("-v", "--verbose", action="store_true")
    p.add_argument("--threads", type=int, default=os.cpu_count() or 1, help="worker threads (default: all cores)")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    a = sub.add_parser("analytic", help="expected coverage for both chord laws and their difference")
    a.add_argument("--rc", type=float, help="coverage radius")
    a.add_argument("--re", type=float, help="environment radius")
    a.add_argument("--rho-sweep", metavar="START:STOP:STEP", help="sweep rho=rc/re with re=1")
    a.add_argument("--out", help="also write the CSV here")
    a.set_defaults(func=cmd_analytic)

    m = sub.add_parser("mc-verify", help="Monte Carlo check of the analytic expectations")
    m.add_argument("--re-grid", default=",".join(map(str, REFERENCE_RE_GRID)), help="environment radii")
    m.add_argument("--fractions", default=",".join(map(str, REFERENCE_RC_FRACTIONS)), help="r_c/r_e values")
    m.add_argument("--n-trials", type=int, default=10_000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--out", help="CSV path (default: stdout)")
    m.set_defaults(func=cmd_mc_verify)

    u = sub.add_parser("urban", help="city-scale scenario evaluation or receiver-count search")
    u.add_argument("config", help="scenario JSON")
    u.add_argument("--out-dir", default="urban_out")
    u.add_argument("--find-target", type=float, help="search the receiver count reaching this mean coverage")
    u.add_argument("--tech", choices=[t.name for t in ReceiverTech])
    u.add_argument("--planner", choices=[pl.value for pl in Planner])
    u.add_argument("--altitude-ft", type=float)
    u.add_argument("--n-receivers", type=int)
    u.add_argument("--trials", type=int)
    u.add_argument("--trajectories", type=int)
    u.add_argument("--seed", type=int)
    u.set_defaults(func=cmd_urban)

    h = sub.add_parser("hybrid", help="packing-based analytic coverage estimate")
    h.add_argument("config", help="hybrid JSON")
    h.add_argument("--out-dir", default="hybrid_out")
    h.set_defaults(func=cmd_hybrid)

    g = sub.add_parser("ingest-check", help="parse city GeoJSON and optionally dump an occupancy grid")
    g.add_argument("--buildings", required=True)
    g.add_argument("--vendors", required=True)
    g.add_argument("--residential", required=True)
    g.add_argument("--roi")
    g.add_argument("--altitude-ft", type=float)
    g.add_argument("--cell-size", type=float, default=10.0)
    g.add_argument("--default-height", type=float, default=8.0)
    g.add_argument("--dump-grid", metavar="DIR")
    g.set_defaults(func=cmd_ingest_check)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    if args.threads < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"ridcov: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (GeoDataError, OSError) as exc:
        print(f"ridcov: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (QuadratureError, PlanningError, ReceiverCountError) as exc:
        print(f"ridcov: {exc}", file=sys.stderr)
        return EXIT_CONVERGENCE
    except ValueError as exc:
        print(f"ridcov: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
