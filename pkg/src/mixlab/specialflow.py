"""Special flows over the skew-shift: the unit-speed vertical flow under a
positive roof function, its invariant measure, and the mixing estimators.

A roof Phi > 0 turns the base map f into a flow on {(x, y, z): 0 <= z <
Phi(x, y)} by moving up at unit speed and dropping to (f(x,y), 0) at the
roof.  The number of base steps taken by time t from height z is the
largest n with Phi_n(x, y) < t + z; large oscillation of Phi_n along
y-fibers shears vertical segments across many fundamental domains, which
is the mechanism the estimators here quantify.

All Monte-Carlo paths use counter-based streams (one Philox key per
fixed-size sample block), so estimates are bit-identical for any worker
count or scheduling.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .errors import NonPositiveRoof, NotACoboundary
from .phases import frac
from .skewshift import (
    OrbitLanes,
    SkewShift,
    TorusPoint,
    fiber_coefficients_on_grid,
    midgrid,
    project,
    skew_coboundary,
    stretch,
    vfrac,
)
from .trigpoly import FiberedTrigPoly

# Fixed Monte-Carlo block size; the per-block Philox key makes sample i
# depend only on (seed, i // _BLOCK, i % _BLOCK).
_BLOCK = 65536


@dataclass(frozen=True)
class Roof:
    """A certified-positive roof function with its global bounds.

    certified_min <= Phi <= certified_max everywhere, with certified_min
    > 0; ``slack`` is the width of the certification margin actually
    achieved by the grid + Lipschitz bound.
    """

    phi: FiberedTrigPoly
    certified_min: float
    certified_max: float
    mean: float
    slack: float

    def evaluate(self, x, y):
        return self.phi.evaluate(x, y)


def certify_roof(phi: FiberedTrigPoly, slack_target: float = 1e-3) -> Roof:
    """Certify global bounds of a real roof by dense grids plus Lipschitz slack.

    Per-axis Lipschitz constants come from the coefficients
    (L = 2 pi sum |freq| |c|); the per-axis grid is sized so the combined
    slack meets ``slack_target`` (relaxed only if that would exceed the
    evaluation budget).  Raises NonPositiveRoof when the certified lower
    bound is not positive.
    """
    if not phi.real:
        raise ValueError("roof must be real-flagged")
    lip_x = 2.0 * math.pi * sum(abs(m) * abs(c) for m, _, c in phi.modes())
    lip_y = 2.0 * math.pi * sum(abs(k) * abs(c) for _, k, c in phi.modes())

    def grids(target: float) -> Tuple[int, int]:
        gx = max(16, 8 * phi.max_freq_x, math.ceil(lip_x / target))
        gy = max(16, 8 * phi.degree_y, math.ceil(lip_y / target))
        return gx, gy

    target = slack_target
    gx, gy = grids(target)
    while gx * gy > 2.5e8:
        target *= 2.0
        gx, gy = grids(target)

    xs = midgrid(gx)
    ks = sorted(phi.fiber.keys())
    coeff = np.array([phi.c(k).evaluate_complex(xs) for k in ks])   # (n_k, gx)
    ys = midgrid(gy)
    lo, hi = math.inf, -math.inf
    chunk = max(1, min(gy, int(2 ** 22 // max(gx, 1)) + 1))
    for start in range(0, gy, chunk):
        block = ys[start : start + chunk]
        phase = np.exp(2j * np.pi * np.outer(ks, block))
        vals = (coeff.T @ phase).real
        lo = min(lo, float(vals.min()))
        hi = max(hi, float(vals.max()))
    slack = lip_x / (2.0 * gx) + lip_y / (2.0 * gy)
    cmin, cmax = lo - slack, hi + slack
    if cmin <= 0.0:
        raise NonPositiveRoof(
            f"certified lower bound {cmin:.6g} is not positive"
        )
    return Roof(phi, cmin, cmax, phi.mean(), slack)


@dataclass(frozen=True)
class FlowPoint:
    """Point (x, y, z) with 0 <= z < Phi(x, y) in the suspension domain."""

    x: float
    y: float
    z: float

    def __post_init__(self):
        object.__setattr__(self, "x", frac(self.x))
        object.__setattr__(self, "y", frac(self.y))

    @property
    def base(self) -> TorusPoint:
        return TorusPoint(self.x, self.y)


@dataclass(frozen=True)
class Cube:
    """[x1, x2] x [y1, y2] x [0, h]; h must stay below the roof minimum."""

    x1: float
    x2: float
    y1: float
    y2: float
    h: float

    def __post_init__(self):
        if not (0.0 <= self.x1 <= self.x2 <= 1.0):
            raise ValueError("x-interval must satisfy 0 <= x1 <= x2 <= 1")
        if not (0.0 <= self.y1 <= self.y2 <= 1.0):
            raise ValueError("y-interval must satisfy 0 <= y1 <= y2 <= 1")
        if self.h <= 0.0:
            raise ValueError("height must be positive")

    @property
    def volume(self) -> float:
        return (self.x2 - self.x1) * (self.y2 - self.y1) * self.h

    def contains(self, x, y, z):
        return (
            (self.x1 <= x) & (x <= self.x2)
            & (self.y1 <= y) & (y <= self.y2)
            & (0.0 <= z) & (z <= self.h)
        )


def cube_measure(roof: Roof, cube: Cube) -> float:
    """Invariant measure of the cube: volume / integral of the roof."""
    _require_cube_fits(roof, cube)
    return cube.volume / roof.mean


def _require_cube_fits(roof: Roof, cube: Cube) -> None:
    if cube.h >= roof.certified_min:
        raise ValueError(
            f"cube height {cube.h} must stay below the certified roof "
            f"minimum {roof.certified_min}"
        )


# --------------------------------------------------------------------------
# The flow
# --------------------------------------------------------------------------


def hit_count(roof: Roof, f: SkewShift, p: FlowPoint, t: float) -> int:
    """Largest n with Phi_n(x, y) < t + z (0 for t = z = 0).

    Incremental accumulation with strict crossing; a float tie resolves
    to the smaller n.
    """
    if t < 0:
        raise ValueError("t must be >= 0")
    target = t + p.z
    cur = p.base
    total = 0.0
    comp = 0.0
    n = 0
    # n is bounded by (t + z)/certified_min; guard against roundoff loops
    limit = int((t + p.z) / roof.certified_min) + 2
    while n < limit:
        v = roof.evaluate(cur.x, cur.y) - comp
        s = total + v
        if not s < target:
            break
        comp = (s - total) - v
        total = s
        cur = f.step(cur)
        n += 1
    return n


def flow_at(roof: Roof, f: SkewShift, p: FlowPoint, t: float) -> FlowPoint:
    """Time-t image of p under the suspension flow; t may be negative.

    Forward: climb until the accumulated roof passes t + z.  Negative
    times run the exact inverse: step the inverse base map and add roofs
    until the height becomes nonnegative.
    """
    if t >= 0:
        target = t + p.z
        cur = p.base
        total = 0.0
        comp = 0.0
        n = 0
        limit = int(target / roof.certified_min) + 2
        for _ in range(limit):
            v = roof.evaluate(cur.x, cur.y) - comp
            s = total + v
            if not s < target:
                break
            comp = (s - total) - v
            total = s
            cur = f.step(cur)
            n += 1
        cur = f.orbit_at(p.base, n)    # exact closed form for the base point
        z = target - total
        v = roof.evaluate(cur.x, cur.y)
        if z >= v:     # float tie at the roof: same point, canonical form
            cur = f.step(cur)
            z = 0.0
        return FlowPoint(cur.x, cur.y, z)
    w = p.z + t
    cur = p.base
    n = 0
    limit = int(-t / roof.certified_min) + 2
    for _ in range(limit):
        if w >= 0.0:
            break
        cur = f.step_inverse(cur)
        w += roof.evaluate(cur.x, cur.y)
        n += 1
    cur = f.orbit_at(p.base, -n)
    return FlowPoint(cur.x, cur.y, w)


def _flow_lanes(
    roof: Roof,
    f: SkewShift,
    xs: np.ndarray,
    ys: np.ndarray,
    zs: np.ndarray,
    t: float,
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Vectorised ``flow_at`` over arrays of points (single time t)."""
    lanes = OrbitLanes(f, xs, ys)
    if t >= 0:
        target = zs + t
        total = np.zeros_like(target)
        active = np.ones(target.shape, dtype=bool)
        while True:
            v = roof.evaluate(lanes.x[active], lanes.y[active])
            nxt = total[active] + v
            adv = nxt < target[active]
            if not np.any(adv):
                break
            idx = np.flatnonzero(active)
            keep = idx[adv]
            total[keep] = nxt[adv]
            mask = np.zeros_like(active)
            mask[keep] = True
            lanes.step(mask)
            active = mask
        z = target - total
        v = roof.evaluate(lanes.x, lanes.y)
        tie = z >= v
        if np.any(tie):
            lanes.step(tie)
            z = np.where(tie, 0.0, z)
        return lanes.x, lanes.y, z
    w = zs + t
    while True:
        neg = w < 0.0
        if not np.any(neg):
            break
        lanes.step_inverse(neg)
        w = np.where(neg, w + roof.evaluate(lanes.x, lanes.y), w)
    return lanes.x, lanes.y, w


def _hit_count_lanes(
    roof: Roof, f: SkewShift, xs: np.ndarray, ys: np.ndarray, t: float
) -> np.ndarray:
    """Vectorised hit counts from height z = 0."""
    lanes = OrbitLanes(f, xs, ys)
    total = np.zeros(lanes.x.shape)
    counts = np.zeros(lanes.x.shape, dtype=np.int64)
    active = np.ones(lanes.x.shape, dtype=bool)
    while True:
        v = roof.evaluate(lanes.x[active], lanes.y[active])
        nxt = total[active] + v
        adv = nxt < t
        if not np.any(adv):
            break
        idx = np.flatnonzero(active)
        keep = idx[adv]
        total[keep] = nxt[adv]
        counts[keep] += 1
        mask = np.zeros_like(active)
        mask[keep] = True
        lanes.step(mask)
        active = mask
    return counts


# --------------------------------------------------------------------------
# Invariant-measure sampling
# --------------------------------------------------------------------------


def _sample_block(
    roof: Roof, seed: int, block_index: int, count: int
) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``count`` accepted samples from the normalised invariant measure.

    Rejection against the box of height certified_max; the stream is a
    Philox generator keyed by (seed, block_index), so the accepted
    points are a pure function of those two integers.
    """
    rng = np.random.Generator(
        np.random.Philox(key=np.array([seed, block_index], dtype=np.uint64))
    )
    xs = np.empty(count)
    ys = np.empty(count)
    zs = np.empty(count)
    need = np.arange(count)
    while need.size:
        draw = rng.random((need.size, 3))
        x = draw[:, 0]
        y = draw[:, 1]
        z = draw[:, 2] * roof.certified_max
        ok = z < roof.evaluate(x, y)
        got = need[ok]
        xs[got] = x[ok]
        ys[got] = y[ok]
        zs[got] = z[ok]
        need = need[~ok]
    return xs, ys, zs


def sample_measure(roof: Roof, seed: int) -> FlowPoint:
    """One deterministic sample of the invariant probability measure."""
    xs, ys, zs = _sample_block(roof, seed, 0, 1)
    return FlowPoint(float(xs[0]), float(ys[0]), float(zs[0]))


@dataclass(frozen=True)
class CorrelationEstimate:
    """Monte-Carlo correlation with its standard error and provenance."""

    value: float
    std_error: float
    samples: int
    seed: int


def correlate_cubes(
    roof: Roof,
    f: SkewShift,
    q1: Cube,
    q2: Cube,
    t: float,
    samples: int,
    seed: int,
    workers: int = 1,
) -> CorrelationEstimate:
    """Estimate mu(Q1 and flow_{-t} Q2) - mu(Q1) mu(Q2).

    The joint indicator is averaged over ``samples`` invariant-measure
    draws; mu(Q1) mu(Q2) is computed analytically.  Block-wise integer
    counting keeps the result independent of the worker count.
    """
    if samples < 1000:
        raise ValueError("samples must be >= 1000")
    _require_cube_fits(roof, q1)
    _require_cube_fits(roof, q2)

    def block_count(b: int) -> int:
        start = b * _BLOCK
        count = min(_BLOCK, samples - start)
        xs, ys, zs = _sample_block(roof, seed, b, count)
        in1 = q1.contains(xs, ys, zs)
        if not np.any(in1):
            return 0
        fx, fy, fz = _flow_lanes(
            roof, f, xs[in1], ys[in1], zs[in1], t
        )
        return int(np.count_nonzero(q2.contains(fx, fy, fz)))

    blocks = range((samples + _BLOCK - 1) // _BLOCK)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            hits = sum(pool.map(block_count, blocks))
    else:
        hits = sum(block_count(b) for b in blocks)
    phat = hits / samples
    std = math.sqrt(phat * (1.0 - phat) / (samples - 1))
    value = phat - cube_measure(roof, q1) * cube_measure(roof, q2)
    return CorrelationEstimate(value, std, samples, seed)


def fiber_mixing_profile(
    roof: Roof,
    f: SkewShift,
    x: float,
    arc: Tuple[float, float],
    cube: Cube,
    t: float,
    resolution: int = 256,
) -> float:
    """Length of {x} x [y', y''] (at z = 0) carried into the cube at time t.

    Evaluated as (fraction of a y-grid on the arc whose flow image lies
    in the cube) times the arc length.
    """
    if resolution < 256:
        raise ValueError("resolution must be >= 256")
    _require_cube_fits(roof, cube)
    y1, y2 = arc
    length = y2 - y1 if y2 > y1 else y2 - y1 + 1.0
    ys = vfrac(y1 + length * (np.arange(resolution) + 0.5) / resolution)
    xs = np.full(resolution, frac(x))
    zs = np.zeros(resolution)
    fx, fy, fz = _flow_lanes(roof, f, xs, ys, zs, t)
    inside = cube.contains(fx, fy, fz)
    return float(np.count_nonzero(inside)) / resolution * length


@dataclass(frozen=True)
class IterationBounds:
    """Spread of hit counts along a fiber arc against the stretch bound."""

    n_lo: int
    n_hi: int
    stretch_at_n_lo: float
    lower: float          # stretch/max - max/min
    upper: float          # stretch/min + max/min
    lower_ok: bool
    upper_ok: bool


def discrete_iteration_bounds(
    roof: Roof,
    f: SkewShift,
    x: float,
    arc: Tuple[float, float],
    t: float,
    resolution: int = 256,
) -> IterationBounds:
    """Check that the hit-count spread on a fiber arc obeys the stretch bounds.

    With n_lo/n_hi the min/max of the z = 0 hit count over a y-grid on
    the arc and S the oscillation of Phi_{n_lo} there,

        S/max(Phi) - max(Phi)/min(Phi) <= n_hi - n_lo
                                       <= S/min(Phi) + max(Phi)/min(Phi).

    The grid is a proxy for the fiber extrema; its error is about one
    grid cell of Phi_{n_lo} variation.
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    y1, y2 = arc
    length = y2 - y1 if y2 > y1 else y2 - y1 + 1.0
    ys = vfrac(y1 + length * (np.arange(resolution) + 0.5) / resolution)
    xs = np.full(resolution, frac(x))
    counts = _hit_count_lanes(roof, f, xs, ys, t)
    n_lo, n_hi = int(counts.min()), int(counts.max())
    if n_lo >= 1:
        spread = stretch(f, roof.phi, x, arc, n_lo, max(64, resolution))
    else:
        spread = 0.0
    top, bot = roof.certified_max, roof.certified_min
    lower = spread / top - top / bot
    upper = spread / bot + top / bot
    gap = n_hi - n_lo
    return IterationBounds(
        n_lo, n_hi, spread, lower, upper, lower <= gap, gap <= upper
    )


def hitting_complement_measure(
    roof: Roof,
    f: SkewShift,
    t: float,
    C: float,
    grid: int = 256,
    y_resolution: int = 64,
    workers: int = 1,
) -> float:
    """Fraction of x whose fiber shows no large Birkhoff value at the
    minimal hit count.

    For each grid x: n(x) = min over a y-grid of the z = 0 hit count at
    time t, then x qualifies when the y-grid maximum of
    |phi_{n(x)}(x, .)| exceeds C (phi the zero-fiber-average part of the
    roof).  Returns the fraction that fails to qualify.
    """
    if C <= 1.0:
        raise ValueError("C must be > 1")
    if grid < 256:
        raise ValueError("grid must be >= 256")
    osc, _ = project(roof.phi)
    xs = midgrid(grid)
    ys = midgrid(y_resolution)

    span = 32

    def count_chunk(i0: int) -> int:
        cols = xs[i0 : i0 + span]
        nc = cols.shape[0]
        X = np.repeat(cols, y_resolution)
        Y = np.tile(ys, nc)
        counts = _hit_count_lanes(roof, f, X, Y, t).reshape(nc, y_resolution)
        stops = counts.min(axis=1)
        ks, mat = _coeffs_at_stops(f, osc, cols, stops)
        ky = np.exp(2j * np.pi * np.outer(ks, ys))
        sup = np.abs(mat.T @ ky).max(axis=1)
        return int(np.count_nonzero(sup > C))

    starts = range(0, grid, span)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            qualifying = sum(pool.map(count_chunk, starts))
    else:
        qualifying = sum(count_chunk(i0) for i0 in starts)
    return 1.0 - qualifying / grid


def _coeffs_at_stops(f, phi, cols, stops):
    from .skewshift import _FiberSweep

    sweep = _FiberSweep(f, phi, np.asarray(cols, dtype=float))
    mat = sweep.run_until(np.asarray(stops, dtype=np.int64))
    return np.array(sweep.ks), mat


# --------------------------------------------------------------------------
# Trivial-roof conjugacy
# --------------------------------------------------------------------------


def _reduce_constant_quotient(
    f: SkewShift, x: float, y: float, z: float, height: float
) -> Tuple[float, float, float]:
    p = TorusPoint(x, y)
    while z >= height:
        z -= height
        p = f.step(p)
    while z < 0.0:
        p = f.step_inverse(p)
        z += height
    return p.x, p.y, z


def _constant_flow(
    f: SkewShift, x: float, y: float, z: float, height: float, t: float
) -> Tuple[float, float, float]:
    w = z + t
    n = math.floor(w / height)
    q = f.orbit_at(TorusPoint(x, y), n)   # closed form is valid for n < 0 too
    return _reduce_constant_quotient(f, q.x, q.y, w - n * height, height)


def trivial_conjugacy_check(
    roof: Roof,
    f: SkewShift,
    u: FiberedTrigPoly,
    c_phi: float,
    t: float,
    points: int = 100,
    seed: int = 0,
) -> float:
    """Max deviation of the shear conjugacy between the roof flow and the
    constant suspension of the same mean height.

    First verifies u o f - u = Phi - c_phi on a 128^2 grid (raising
    NotACoboundary otherwise), then compares, at ``points`` sampled
    phase points, the flow-then-shear image against the
    shear-then-constant-flow image, both reduced in their quotients.
    The returned deviation is measured up to the fundamental-domain
    identification of the constant suspension.
    """
    if not u.real:
        raise ValueError("transfer function must be real-flagged")
    residual_poly = skew_coboundary(u, f) - (
        roof.phi + FiberedTrigPoly.constant(-c_phi)
    )
    gx = midgrid(128)
    residual = float(
        np.max(np.abs(residual_poly.evaluate(gx[:, None], gx[None, :])))
    )
    if residual > 1e-9:
        raise NotACoboundary(
            f"u o f - u differs from Phi - {c_phi} by up to {residual:.3e}"
        )
    xs, ys, zs = _sample_block(roof, seed, 0, points)
    worst = 0.0
    for x, y, z in zip(xs, ys, zs):
        moved = flow_at(roof, f, FlowPoint(x, y, z), t)
        lhs = _reduce_constant_quotient(
            f, moved.x, moved.y, moved.z + float(u.evaluate(moved.x, moved.y)),
            c_phi,
        )
        sx, sy, sz = _reduce_constant_quotient(
            f, x, y, z + float(u.evaluate(x, y)), c_phi
        )
        rhs = _constant_flow(f, sx, sy, sz, c_phi, t)
        worst = max(worst, _quotient_distance(f, lhs, rhs, c_phi))
    return worst


def _quotient_distance(f, a, b, height) -> float:
    """Distance of two constant-suspension points across sheet choices."""

    def circ(p, q):
        d = abs(p - q) % 1.0
        return min(d, 1.0 - d)

    best = math.inf
    for k in (-1, 0, 1):
        x, y, z = b
        p = TorusPoint(x, y)
        if k == 1:
            p = f.step(p)
        elif k == -1:
            p = f.step_inverse(p)
        cand = (p.x, p.y, z - k * height)
        best = min(
            best,
            max(circ(a[0], cand[0]), circ(a[1], cand[1]), abs(a[2] - cand[2])),
        )
    return best
