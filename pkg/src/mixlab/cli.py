"""mixlab: command-line experiment harness.

Loads a roof file (JSON: map parameters plus the Fourier coefficients of
the roof), dispatches one experiment, and writes plot-ready CSV plus a
JSON report.  Every run also writes a ``*_summary.json`` with the fully
resolved configuration, the library version, the list of outputs, and
the wall time; identical configuration and seed reproduce the data
files byte for byte, for any ``--workers`` value.

Exit codes: 0 success, 2 invalid configuration or input file, 3 numeric
failure (resonant divisor, nonzero obstruction, non-positive roof, ...).
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
from importlib import resources
from typing import Dict, List, Optional, Sequence

import numpy as np

from . import __version__, cohomology, skewshift, specialflow
from .errors import InvalidRoofFile, MixlabError
from .skewshift import SkewShift, TorusPoint, midgrid, project
from .trigpoly import FiberedTrigPoly


def _fmt(v: float) -> str:
    """17 significant digits, '.' decimal; reproducible across runs."""
    return f"{v:.17g}"


def _parse_floats(text: str) -> List[float]:
    return [float(tok) for tok in text.split(",") if tok]


def _parse_ints(text: str) -> List[int]:
    return [int(tok) for tok in text.split(",") if tok]


def bundled_roof_path(name: str) -> str:
    """Path of one of the shipped roof files (example1..3, constant,
    coboundary)."""
    return str(resources.files("mixlab").joinpath("data", f"{name}.json"))


def _load(args) -> tuple[SkewShift, FiberedTrigPoly]:
    f, phi = skewshift.load_roof(args.roof)
    alpha = f.alpha if args.alpha is None else args.alpha
    beta = f.beta if args.beta is None else args.beta
    return SkewShift(alpha, beta, precision=args.precision), phi


def _write_csv(path: str, header: Sequence[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(
                ",".join(
                    _fmt(v) if isinstance(v, float) else str(v) for v in row
                )
                + "\n"
            )


def _write_json(path: str, doc: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh, indent=2, sort_keys=True)
        fh.write("\n")


class _Run:
    """Collects output files and writes the run summary."""

    def __init__(self, args):
        self.args = args
        self.outputs: List[str] = []
        self.started = time.perf_counter()
        os.makedirs(args.out, exist_ok=True)

    def path(self, name: str) -> str:
        full = os.path.join(self.args.out, name)
        self.outputs.append(name)
        return full

    def finish(self, extra: Optional[dict] = None) -> None:
        config = {
            k: v
            for k, v in vars(self.args).items()
            if k != "func" and not k.startswith("_")
        }
        doc = {
            "experiment": self.args.command,
            "config": config,
            "version": __version__,
            "outputs": self.outputs,
            "wall_time_s": time.perf_counter() - self.started,
        }
        if extra:
            doc.update(extra)
        summary = os.path.join(self.args.out, f"{self.args.command}_summary.json")
        _write_json(summary, doc)


def _transfer_function(f: SkewShift, phi: FiberedTrigPoly, tol: float):
    """Full transfer u and mean with u o f - u = Phi - mean.

    Solves block by block on the zero-fiber-average part and through the
    circle-rotation divisors on the fiber average.  Raises
    ObstructionNonzero on a block with a large invariant functional and
    SmallDivisor on a resonant circle frequency.
    """
    osc, perp = project(phi)
    _, components = cohomology.decompose_components(osc)
    modes: Dict[tuple, complex] = {}
    for S in components:
        u = cohomology.solve_component(f, S, tol=tol)
        n = u.label.n
        for j, c in u.coeffs.items():
            key = (u.label.m + j * n, n)
            modes[key] = modes.get(key, 0.0) + c
    g, mean = skewshift.rotation_transfer(perp, f.alpha)
    for m, c in g.coeffs.items():
        modes[(m, 0)] = modes.get((m, 0), 0.0) + c
    u_total = FiberedTrigPoly.from_modes(modes, real=False)
    if phi.real:
        # conjugate symmetry holds to rounding; rebuild with the flag
        sym = {}
        for (m, k), c in modes.items():
            sym[(m, k)] = 0.5 * (c + modes.get((-m, -k), 0.0).conjugate())
        u_total = FiberedTrigPoly.from_modes(sym, real=True)
    return u_total, float(np.real(mean))


# ---------------------------------------------------------------- commands


def cmd_classify(args) -> int:
    run = _Run(args)
    f, phi = _load(args)
    report = cohomology.classify_roof(f, phi, tol=args.tol)
    _write_json(run.path("classify_report.json"), report.to_json_dict())
    run.finish({"verdict": report.verdict})
    print(report.verdict)
    return 0


def cmd_solve(args) -> int:
    run = _Run(args)
    f, phi = _load(args)
    u, mean = _transfer_function(f, phi, args.tol)
    skewshift.save_roof(run.path("transfer_u.json"), f, u)
    xs = midgrid(128)
    residual = skewshift.skew_coboundary(u, f) - (
        phi + FiberedTrigPoly.constant(-mean)
    )
    sup = float(np.max(np.abs(residual.evaluate(xs[:, None], xs[None, :]))))
    _write_json(
        run.path("solve_report.json"),
        {"mean": mean, "residual_sup_128": sup},
    )
    run.finish({"mean": mean})
    print(_fmt(mean))
    return 0


def cmd_stretch(args) -> int:
    """Decay of the measure of {|phi_n| < C} along a list of n."""
    run = _Run(args)
    f, phi = _load(args)
    osc, _ = project(phi)
    ns = sorted(set(args.n))
    _, mats = skewshift.fiber_coefficients_on_grid(
        f, osc, ns, grid=args.grid, workers=args.workers
    )
    ks = sorted(osc.fiber.keys())
    ys = midgrid(args.grid)
    ky = np.exp(2j * np.pi * np.outer(ks, ys))
    rows = []
    errors = {}
    for n in ns:
        vals = (mats[n].T @ ky).real
        est = skewshift.sublevel_measure(vals, args.C)
        rows.append((n, est.value))
        errors[str(n)] = est.error
    _write_csv(run.path("stretch.csv"), ("n", "measure"), rows)
    run.finish({"grid_errors": errors})
    return 0


def cmd_sublevel(args) -> int:
    """Small-value measure of phi_n against thresholds, with a log-log slope."""
    run = _Run(args)
    f, phi = _load(args)
    osc, _ = project(phi)
    vals = skewshift.birkhoff_grid(f, osc, args.n, args.grid)
    sup = float(np.max(np.abs(vals)))
    if sup == 0.0:
        raise MixlabError("oscillating part is identically zero")
    vals = vals / sup
    rows = []
    logs = []
    for delta in sorted(args.deltas, reverse=True):
        est = skewshift.sublevel_measure(np.abs(vals), delta)
        rows.append((delta, est.value))
        if est.value > 0:
            logs.append((math.log(delta), math.log(est.value)))
    slope = None
    if len(logs) >= 2:
        xs = np.array([p[0] for p in logs])
        ysv = np.array([p[1] for p in logs])
        slope = float(np.polyfit(xs, ysv, 1)[0])
    _write_csv(run.path("sublevel.csv"), ("delta", "measure"), rows)
    run.finish({"slope": slope, "sup_norm_used": sup})
    return 0


def cmd_visits(args) -> int:
    run = _Run(args)
    f, phi = _load(args)
    p = TorusPoint(args.x, args.y)
    rows = [
        (N, skewshift.visit_fraction(f, phi, p, args.C, N))
        for N in sorted(set(args.N))
    ]
    _write_csv(run.path("visits.csv"), ("n", "measure"), rows)
    run.finish()
    return 0


def cmd_correlate(args) -> int:
    run = _Run(args)
    f, phi = _load(args)
    roof = specialflow.certify_roof(phi)
    c = args.cube
    cube = specialflow.Cube(c[0], c[1], c[2], c[3], c[4])
    rows = []
    for t in args.t:
        est = specialflow.correlate_cubes(
            roof, f, cube, cube, t, args.samples, args.seed, workers=args.workers
        )
        rows.append((t, est.value, est.std_error, est.samples, est.seed))
    _write_csv(
        run.path("correlate.csv"),
        ("t", "value", "stderr", "samples", "seed"),
        rows,
    )
    run.finish({"mu_cube": specialflow.cube_measure(roof, cube)})
    return 0


def cmd_fiber_profile(args) -> int:
    run = _Run(args)
    f, phi = _load(args)
    roof = specialflow.certify_roof(phi)
    c = args.cube
    cube = specialflow.Cube(c[0], c[1], c[2], c[3], c[4])
    rows = []
    for t in args.t:
        val = specialflow.fiber_mixing_profile(
            roof, f, args.x, (args.arc[0], args.arc[1]), cube, t,
            resolution=args.resolution,
        )
        rows.append((t, val))
    _write_csv(run.path("fiber_profile.csv"), ("t", "measure"), rows)
    run.finish(
        {
            "target": (args.arc[1] - args.arc[0])
            * specialflow.cube_measure(roof, cube)
        }
    )
    return 0


def cmd_hitting(args) -> int:
    run = _Run(args)
    f, phi = _load(args)
    roof = specialflow.certify_roof(phi)
    rows = []
    for t in args.t:
        val = specialflow.hitting_complement_measure(
            roof, f, t, args.C, grid=args.grid,
            y_resolution=args.y_resolution, workers=args.workers,
        )
        rows.append((t, val))
    _write_csv(run.path("hitting.csv"), ("t", "measure"), rows)
    run.finish()
    return 0


def cmd_weyl(args) -> int:
    run = _Run(args)
    f, phi = _load(args)
    osc, _ = project(phi)
    times = cohomology.convergent_times(f.alpha, args.levels)
    rows = []
    for ell, N in enumerate(times.denominators, start=1):
        val = cohomology.uniform_bound_scan(
            f, osc, N, grid=args.grid, workers=args.workers
        )
        rows.append((ell, N, val))
    _write_csv(run.path("weyl.csv"), ("ell", "N", "value"), rows)
    run.finish({"partial_quotients": list(times.partial_quotients)})
    return 0


def cmd_l2(args) -> int:
    run = _Run(args)
    f, phi = _load(args)
    osc, _ = project(phi)
    _, components = cohomology.decompose_components(osc)
    rows = []
    for N in sorted(set(args.N)):
        total = sum(cohomology.ergodic_sum_l2(f, S, N) for S in components)
        rows.append((N, total))
    _write_csv(run.path("l2.csv"), ("n", "measure"), rows)
    run.finish({"components": len(components)})
    return 0


def cmd_return_check(args) -> int:
    from .heisenberg import AlgebraVector, poincare_return, poincare_return_numeric

    run = _Run(args)
    w = AlgebraVector(args.wx, args.wy, args.wz)
    rng = np.random.Generator(
        np.random.Philox(key=np.array([args.seed, 0], dtype=np.uint64))
    )
    rows = []
    worst_xy = worst_t = 0.0
    for i in range(args.count):
        x, z = float(rng.random()), float(rng.random())
        want = poincare_return(w, x, z)
        got = poincare_return_numeric(w, x, z)

        def circ(a, b):
            d = abs(a - b) % 1.0
            return min(d, 1.0 - d)

        err = max(circ(got.x, want[0]), circ(got.z, want[1]))
        terr = abs(got.time - 1.0 / w.w_y)
        worst_xy, worst_t = max(worst_xy, err), max(worst_t, terr)
        rows.append((i, err, terr))
    _write_csv(run.path("return_check.csv"), ("i", "coord_err", "time_err"), rows)
    run.finish({"max_coord_err": worst_xy, "max_time_err": worst_t})
    return 0


def cmd_conjugacy(args) -> int:
    run = _Run(args)
    f, phi = _load(args)
    roof = specialflow.certify_roof(phi)
    u, mean = _transfer_function(f, phi, args.tol)
    rows = []
    for t in args.t:
        dev = specialflow.trivial_conjugacy_check(
            roof, f, u, mean, t, points=args.points, seed=args.seed
        )
        rows.append((t, dev))
    _write_csv(run.path("conjugacy.csv"), ("t", "measure"), rows)
    run.finish({"mean": mean})
    return 0


# ------------------------------------------------------------------ parser


def _add_common(sp, roof=True):
    if roof:
        sp.add_argument("--roof", required=True, help="roof JSON file")
        sp.add_argument("--alpha", type=float, default=None,
                        help="override the file's alpha")
        sp.add_argument("--beta", type=float, default=None,
                        help="override the file's beta")
    sp.add_argument("--precision", choices=skewshift.PRECISIONS,
                    default="double")
    sp.add_argument("--out", default=".", help="output directory")
    sp.add_argument(
        "--workers",
        type=int,
        default=int(os.environ.get("MIXLAB_WORKERS", "1")),
        help="parallel workers for grid sweeps and sampling "
             "(default: MIXLAB_WORKERS or 1)",
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="mixlab",
        description="Experiments on special flows over linear skew-shifts.",
    )
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("classify", help="mixing/trivial verdict for a roof")
    _add_common(sp)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.set_defaults(func=cmd_classify)

    sp = sub.add_parser("solve", help="emit the transfer function u")
    _add_common(sp)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.set_defaults(func=cmd_solve)

    sp = sub.add_parser("stretch", help="sublevel-measure decay along n")
    _add_common(sp)
    sp.add_argument("--C", type=float, required=True)
    sp.add_argument("--n", type=_parse_ints, required=True,
                    help="comma-separated Birkhoff lengths")
    sp.add_argument("--grid", type=int, default=2048)
    sp.set_defaults(func=cmd_stretch)

    sp = sub.add_parser("sublevel", help="small-value measure vs threshold")
    _add_common(sp)
    sp.add_argument("--n", type=int, default=1)
    sp.add_argument("--deltas", type=_parse_floats,
                    default=[1e-1, 1e-2, 1e-3, 1e-4])
    sp.add_argument("--grid", type=int, default=1024)
    sp.set_defaults(func=cmd_sublevel)

    sp = sub.add_parser("visits", help="orbit fraction with small phi_n")
    _add_common(sp)
    sp.add_argument("--C", type=float, required=True)
    sp.add_argument("--N", type=_parse_ints, required=True)
    sp.add_argument("--x", type=float, default=0.1)
    sp.add_argument("--y", type=float, default=0.2)
    sp.set_defaults(func=cmd_visits)

    sp = sub.add_parser("correlate", help="Monte-Carlo mixing curve")
    _add_common(sp)
    sp.add_argument("--cube", type=_parse_floats, required=True,
                    help="x1,x2,y1,y2,h")
    sp.add_argument("--t", type=_parse_floats, required=True)
    sp.add_argument("--samples", type=int, default=1_000_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_correlate)

    sp = sub.add_parser("fiber-profile", help="fiber arc mass carried into a cube")
    _add_common(sp)
    sp.add_argument("--x", type=float, required=True)
    sp.add_argument("--arc", type=_parse_floats, required=True, help="y1,y2")
    sp.add_argument("--cube", type=_parse_floats, required=True,
                    help="x1,x2,y1,y2,h")
    sp.add_argument("--t", type=_parse_floats, required=True)
    sp.add_argument("--resolution", type=int, default=512)
    sp.set_defaults(func=cmd_fiber_profile)

    sp = sub.add_parser("hitting", help="measure of fibers without large phi")
    _add_common(sp)
    sp.add_argument("--C", type=float, required=True)
    sp.add_argument("--t", type=_parse_floats, required=True)
    sp.add_argument("--grid", type=int, default=256)
    sp.add_argument("--y-resolution", dest="y_resolution", type=int, default=64)
    sp.set_defaults(func=cmd_hitting)

    sp = sub.add_parser("weyl", help="sup |phi_N|/sqrt(N) along denominators")
    _add_common(sp)
    sp.add_argument("--levels", type=int, default=20)
    sp.add_argument("--grid", type=int, default=256)
    sp.set_defaults(func=cmd_weyl)

    sp = sub.add_parser("l2", help="exact squared L2 norms of Birkhoff sums")
    _add_common(sp)
    sp.add_argument("--N", type=_parse_ints, required=True)
    sp.set_defaults(func=cmd_l2)

    sp = sub.add_parser("return-check", help="section return map cross-check")
    _add_common(sp, roof=False)
    sp.add_argument("--wx", type=float, required=True)
    sp.add_argument("--wy", type=float, required=True)
    sp.add_argument("--wz", type=float, required=True)
    sp.add_argument("--count", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.set_defaults(func=cmd_return_check)

    sp = sub.add_parser("conjugacy", help="shear conjugacy check for trivial roofs")
    _add_common(sp)
    sp.add_argument("--t", type=_parse_floats, required=True)
    sp.add_argument("--points", type=int, default=100)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=1e-9)
    sp.set_defaults(func=cmd_conjugacy)

    return ap


def main(argv: Optional[Sequence[str]] = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        _validate(args)
        return args.func(args)
    except (InvalidRoofFile, FileNotFoundError, ValueError) as exc:
        print(f"mixlab: invalid configuration: {exc}", file=sys.stderr)
        return 2
    except MixlabError as exc:
        print(f"mixlab: numeric failure: {exc.__class__.__name__}: {exc}",
              file=sys.stderr)
        return 3


def _validate(args) -> None:
    if getattr(args, "workers", 1) < 1:
        raise ValueError("--workers must be >= 1")
    for name in ("grid", "samples", "points", "count", "levels", "resolution",
                 "y_resolution"):
        v = getattr(args, name, None)
        if v is not None and v < 1:
            raise ValueError(f"--{name.replace('_', '-')} must be positive")
    cube = getattr(args, "cube", None)
    if cube is not None and len(cube) != 5:
        raise ValueError("--cube needs exactly x1,x2,y1,y2,h")
    arc = getattr(args, "arc", None)
    if arc is not None and len(arc) != 2:
        raise ValueError("--arc needs exactly y1,y2")
    for name in ("C", "tol"):
        v = getattr(args, name, None)
        if v is not None and v <= 0:
            raise ValueError(f"--{name} must be positive")
    ns = getattr(args, "n", None)
    if isinstance(ns, list) and any(n < 1 for n in ns):
        raise ValueError("--n entries must be >= 1")
    Ns = getattr(args, "N", None)
    if Ns is not None and any(n < 1 for n in Ns):
        raise ValueError("--N entries must be >= 1")


if __name__ == "__main__":
    sys.exit(main())
