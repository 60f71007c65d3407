"""The linear skew-shift f(x,y) = (x + alpha, y + x + beta) on the 2-torus,
Birkhoff sums of fibered trigonometric polynomials, and the estimators
built on them (stretch, sublevel measure, visit frequency, circle-rotation
transfer functions).

The closed-form iterate is

    f^j(x, y) = (x + j*alpha,  y + j*x + j*beta + binom(j,2)*alpha),

so every orbit quantity reduces to the quadratic phase p_j = j*x + j*beta
+ binom(j,2)*alpha mod 1.  Scalar paths track p_j with exact dyadic
integer arithmetic (`phases.QuadraticPhase`); grid sweeps use a float
recursion with per-step reduction (error O(n*eps)), an exact re-anchoring
every few thousand steps when the base points are dyadic grid points, and
an optional double-double lane mode for orbits beyond 10^7 steps.
"""

from __future__ import annotations

import cmath
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple, Union

import numpy as np

from . import ddouble
from .errors import InvalidRoofFile, SmallDivisor
from .phases import QuadraticPhase, binom2, frac, frac_exact
from .trigpoly import FiberedTrigPoly, TrigPoly1D

PRECISIONS = ("double", "double-double")

# Engage double-double phase lanes automatically past this orbit length.
DD_THRESHOLD = 10_000_000

# Steps between exact re-anchorings of the incremental phase rotations.
_RESYNC = 4096

# Fixed column-chunk width for worker parallelism (independent of worker count).
_COLUMN_CHUNK = 64


@dataclass(frozen=True)
class TorusPoint:
    """Point of the 2-torus, coordinates stored reduced mod 1."""

    x: float
    y: float

    def __post_init__(self):
        object.__setattr__(self, "x", frac(self.x))
        object.__setattr__(self, "y", frac(self.y))


@dataclass(frozen=True)
class SkewShift:
    """Map parameters plus the precision policy for long orbits.

    Unique ergodicity needs alpha irrational, which floats cannot
    certify; a rational alpha silently degrades the asymptotic
    experiments while all finite formulas remain exact.
    """

    alpha: float
    beta: float
    precision: str = "double"

    def __post_init__(self):
        object.__setattr__(self, "alpha", frac(self.alpha))
        object.__setattr__(self, "beta", frac(self.beta))
        if self.precision not in PRECISIONS:
            raise ValueError(f"precision must be one of {PRECISIONS}")

    def step(self, p: TorusPoint) -> TorusPoint:
        """One application of the map; each coordinate rounds exactly once."""
        return TorusPoint(
            frac_exact([(1, p.x), (1, self.alpha)]),
            frac_exact([(1, p.y), (1, p.x), (1, self.beta)]),
        )

    def step_inverse(self, p: TorusPoint) -> TorusPoint:
        x0 = frac_exact([(1, p.x), (-1, self.alpha)])
        return TorusPoint(x0, frac_exact([(1, p.y), (-1, x0), (-1, self.beta)]))

    def orbit_at(self, p: TorusPoint, j: int) -> TorusPoint:
        """f^j(p) by the closed form, phases reduced exactly."""
        x = frac_exact([(1, p.x), (j, self.alpha)])
        y = frac_exact(
            [(1, p.y), (j, p.x), (j, self.beta), (binom2(j), self.alpha)]
        )
        return TorusPoint(x, y)


class PhaseAccumulator:
    """Stepwise tracker of x_j = x + j*alpha and the quadratic phase p_j.

    Advancing obeys p_{j+1} = p_j + x + beta + j*alpha (mod 1) with
    per-step reduction; the reduction is carried out on exact integer
    numerators, so the emitted floats carry a single rounding each
    regardless of j.
    """

    __slots__ = ("_q",)

    def __init__(self, f: SkewShift, x: float):
        self._q = QuadraticPhase(x, f.alpha, f.beta)

    @property
    def j(self) -> int:
        return self._q.j

    @property
    def x(self) -> float:
        return self._q.x

    @property
    def phase(self) -> float:
        return self._q.phase

    def advance(self) -> None:
        self._q.advance()


def project(phi: FiberedTrigPoly) -> Tuple[FiberedTrigPoly, TrigPoly1D]:
    """Split Phi into its zero-fiber-average part and its fiber average.

    Returns (phi, phi_perp) with phi = Phi - phi_perp: phi has c_0 = 0
    and phi_perp(x) is the average of Phi(x, .) over the fiber.
    """
    perp = phi.c(0)
    rest = {k: p for k, p in phi.fiber.items() if k != 0}
    if phi.real:
        perp = TrigPoly1D(perp.coeffs, real=True)
    return FiberedTrigPoly(rest, real=phi.real), perp


def birkhoff_sum(f: SkewShift, phi: FiberedTrigPoly, p: TorusPoint, n: int):
    """Phi_n(p) = sum_{j<n} Phi(f^j p), with Phi_0 = 0 (empty sum).

    Evaluated with the PhaseAccumulator recursion and compensated
    summation; the phases are exact, so the absolute error is
    O(n * eps * sup|Phi|) from the sum alone.
    """
    if n < 0:
        raise ValueError("n must be >= 0")
    acc = 0.0 + 0.0j
    comp = 0.0 + 0.0j
    ph = PhaseAccumulator(f, p.x)
    for _ in range(n):
        y = frac(p.y + ph.phase)
        term = phi.evaluate_complex(ph.x, y) - comp
        t = acc + term
        comp = (t - acc) - term
        acc = t
        ph.advance()
    return acc.real if phi.real else acc


def fiber_coefficients(
    f: SkewShift, phi: FiberedTrigPoly, x: float, n: int
) -> Dict[int, complex]:
    """Fourier-in-y coefficients of y -> Phi_n(x, y).

    c_{k,n}(x) = sum_{j<n} c_k(x + j alpha) e^{2 pi i k p_j(x)}, computed
    with exact phases.  Keys are the fiber frequencies of Phi.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    ks = sorted(phi.fiber.keys())
    if not ks:
        return {}
    kmax = max(abs(k) for k in ks)
    acc = {k: 0.0 + 0.0j for k in ks}
    ph = PhaseAccumulator(f, x)
    for _ in range(n):
        xj = ph.x
        w = cmath.exp(2j * math.pi * ph.phase)
        wpow = [1.0 + 0.0j] * (kmax + 1)
        for a in range(1, kmax + 1):
            wpow[a] = wpow[a - 1] * w
        for k in ks:
            wk = wpow[k] if k >= 0 else wpow[-k].conjugate()
            acc[k] += phi.c(k).evaluate_complex(xj) * wk
        ph.advance()
    return acc


def decoupling_difference(
    f: SkewShift, phi: FiberedTrigPoly, p: TorusPoint, n: int, N: int
) -> Union[float, complex]:
    """phi_N(f^n p) - phi_N(p) for the zero-fiber-average part of Phi.

    By the two cocycle decompositions of phi_{N+n} this equals
    phi_n(f^N p) - phi_n(p); callers cross-check the identity.
    """
    if n < 1 or N < 1:
        raise ValueError("n and N must be >= 1")
    osc, _ = project(phi)
    q = f.orbit_at(p, n)
    return birkhoff_sum(f, osc, q, N) - birkhoff_sum(f, osc, p, N)


# --------------------------------------------------------------------------
# Vectorised sweeps
# --------------------------------------------------------------------------


def midgrid(G: int) -> np.ndarray:
    """Midpoint grid (i + 1/2)/G; dyadic G makes the points exact dyadics."""
    return (np.arange(G) + 0.5) / G


def vfrac(a: np.ndarray) -> np.ndarray:
    """Elementwise mod 1 into [0, 1) with the == 1.0 rounding guard."""
    out = a - np.floor(a)
    return np.where(out >= 1.0, out - 1.0, out)


class _FiberSweep:
    """Accumulates c_{k,n}(x) = sum_j c_k(x + j a) e^{2 pi i k p_j(x)}
    simultaneously over a vector of base points.

    The unit-modulus rotations are updated multiplicatively each step and
    re-anchored every ``_RESYNC`` steps: the x-rotation from the exact
    scalar j*alpha, the phase rotation from the float phase lanes (double
    or double-double), which for power-of-two midpoint grids are
    themselves re-anchored from exact int64 arithmetic.
    """

    def __init__(
        self,
        f: SkewShift,
        phi: FiberedTrigPoly,
        xs: np.ndarray,
        dd: bool = False,
        grid_denom: Optional[int] = None,
    ):
        self.f = f
        self.xs = np.asarray(xs, dtype=float)
        G = self.xs.shape[0]
        self.ks: List[int] = sorted(phi.fiber.keys())
        self.kmax = max((abs(k) for k in self.ks), default=0)
        self.modes = [
            (
                np.array(sorted(phi.c(k).coeffs.keys()), dtype=np.int64),
                np.array(
                    [phi.c(k).coeffs[m] for m in sorted(phi.c(k).coeffs.keys())],
                    dtype=complex,
                ),
            )
            for k in self.ks
        ]
        self.mmax = max(
            (int(np.max(np.abs(ms))) if ms.size else 0 for ms, _ in self.modes),
            default=0,
        )
        self.acc = np.zeros((len(self.ks), G), dtype=complex)
        self.dd = dd
        self.j = 0
        self._aj = QuadraticPhase(0.0, f.alpha, 0.0)   # .x == j*alpha mod 1
        self.p = np.zeros(G)
        self.p_lo = np.zeros(G) if dd else None
        self.U = np.ones(G, dtype=complex)
        self.E = np.exp(2j * np.pi * self.xs)
        self._rot_alpha = cmath.exp(2j * math.pi * f.alpha)
        self._V = np.exp(2j * np.pi * vfrac(self.xs + f.beta))
        # Exact int64 anchoring for dyadic midpoint grids: xs = num/denom.
        self._grid_denom = grid_denom
        if grid_denom is not None:
            self._grid_num = np.round(self.xs * grid_denom).astype(np.int64)

    # -- per-step work ------------------------------------------------------

    def _term(self) -> None:
        if self.kmax or self.mmax:
            Epow = [None] * (self.mmax + 1)
            Epow[0] = 1.0
            for a in range(1, self.mmax + 1):
                Epow[a] = (self.E if a == 1 else Epow[a - 1] * self.E)
            Upow = [None] * (self.kmax + 1)
            Upow[0] = 1.0
            for a in range(1, self.kmax + 1):
                Upow[a] = (self.U if a == 1 else Upow[a - 1] * self.U)
        for idx, k in enumerate(self.ks):
            ms, cs = self.modes[idx]
            if ms.size == 0:
                continue
            vals = np.zeros_like(self.U)
            for m, c in zip(ms, cs):
                if m == 0:
                    vals += c
                elif m > 0:
                    vals += c * Epow[m]
                else:
                    vals += c * np.conj(Epow[-m])
            if k == 0:
                self.acc[idx] += vals
            elif k > 0:
                self.acc[idx] += vals * Upow[k]
            else:
                self.acc[idx] += vals * np.conj(Upow[-k])

    def _advance(self) -> None:
        a_j = self._aj.x                       # exact j*alpha mod 1
        w_j = cmath.exp(2j * math.pi * a_j)
        self.U *= self._V * w_j
        self.E *= self._rot_alpha
        if self.dd:
            bh, bl = ddouble.two_sum(self.f.beta, a_j)
            hi, lo = ddouble.dd_add_float(self.p, self.p_lo, self.xs)
            hi, lo = ddouble.dd_add_float(hi, lo, bh)
            lo = lo + bl
            self.p, self.p_lo = ddouble.dd_wrap(hi, lo)
        else:
            self.p = vfrac(self.p + self.xs + frac(self.f.beta + a_j))
        self._aj.advance()
        self.j += 1
        if self.j % _RESYNC == 0:
            self._resync()

    def _resync(self) -> None:
        a_j = self._aj.x
        self.E = np.exp(2j * np.pi * vfrac(self.xs + a_j))
        if self._grid_denom is not None and not self.dd:
            # p_j = j*xs + (j*beta + binom(j,2)*alpha), first term exact.
            d = self._grid_denom
            jr = (self.j % d) * self._grid_num % d
            scal = frac_exact(
                [(self.j, self.f.beta), (binom2(self.j), self.f.alpha)]
            )
            self.p = vfrac(jr / d + scal)
        if self.dd:
            self.U = np.exp(2j * np.pi * self.p) * np.exp(2j * np.pi * self.p_lo)
        else:
            self.U = np.exp(2j * np.pi * self.p)

    def run_checkpoints(self, checkpoints: Sequence[int]) -> Dict[int, np.ndarray]:
        """Coefficient matrices (len(ks) x G) at each requested n."""
        out: Dict[int, np.ndarray] = {}
        for n in sorted(set(checkpoints)):
            while self.j < n:
                self._term()
                self._advance()
            out[n] = self.acc.copy()
        return out

    def run_until(self, stops: np.ndarray) -> np.ndarray:
        """Per-lane capture: lane i is frozen once j reaches stops[i]."""
        stops = np.asarray(stops, dtype=np.int64)
        out = np.zeros_like(self.acc)
        captured = stops == 0
        top = int(stops.max()) if stops.size else 0
        while self.j < top:
            self._term()
            self._advance()
            hit = stops == self.j
            if np.any(hit):
                out[:, hit] = self.acc[:, hit]
                captured |= hit
        if not np.all(captured):
            raise RuntimeError("unreached stop indices")
        return out


def _wants_dd(f: SkewShift, n: int) -> bool:
    return f.precision == "double-double" or n > DD_THRESHOLD


def fiber_coefficients_on_grid(
    f: SkewShift,
    phi: FiberedTrigPoly,
    checkpoints: Sequence[int],
    grid: Optional[int] = None,
    xs: Optional[np.ndarray] = None,
    workers: int = 1,
) -> Tuple[List[int], Dict[int, np.ndarray]]:
    """c_{k,n}(x) over an x-grid, captured at several n in one pass.

    Either ``grid`` (midpoint grid of that size) or an explicit ``xs``
    vector.  Returns (ks, {n: matrix}) with matrix shape (len(ks), G).

    ``workers`` > 1 splits the columns into fixed chunks processed by a
    thread pool; every per-column value is computed by the identical
    elementwise recursion, so results are bit-identical for any worker
    count.
    """
    if xs is None:
        if grid is None:
            raise ValueError("need grid or xs")
        xs = midgrid(grid)
        denom = 2 * grid if grid & (grid - 1) == 0 else None
    else:
        xs = np.asarray(xs, dtype=float)
        denom = None
    if not len(checkpoints):
        raise ValueError("need at least one checkpoint")
    top = max(checkpoints)
    dd = _wants_dd(f, top)
    G = xs.shape[0]
    ks = sorted(phi.fiber.keys())
    if workers <= 1 or G < 2 * _COLUMN_CHUNK:
        sweep = _FiberSweep(f, phi, xs, dd=dd, grid_denom=denom)
        return sweep.ks, sweep.run_checkpoints(checkpoints)
    spans = [
        slice(i, min(i + _COLUMN_CHUNK, G)) for i in range(0, G, _COLUMN_CHUNK)
    ]

    def run(span: slice) -> Dict[int, np.ndarray]:
        sw = _FiberSweep(f, phi, xs[span], dd=dd, grid_denom=denom)
        return sw.run_checkpoints(checkpoints)

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(run, spans))
    out = {
        n: np.concatenate([part[n] for part in parts], axis=1)
        for n in sorted(set(checkpoints))
    }
    return ks, out


def birkhoff_grid(
    f: SkewShift, phi: FiberedTrigPoly, n: int, grid: int
) -> np.ndarray:
    """Phi_n on the grid x grid midpoint lattice; out[i, q] = Phi_n(x_i, y_q)."""
    ks, mats = fiber_coefficients_on_grid(f, phi, [n], grid=grid)
    ys = midgrid(grid)
    ky = np.exp(2j * np.pi * np.outer(ks, ys))
    vals = mats[n].T @ ky
    return vals.real if phi.real else vals


class OrbitLanes:
    """Many torus points stepped under f in lock-step (float recursion)."""

    def __init__(self, f: SkewShift, xs: np.ndarray, ys: np.ndarray):
        self.f = f
        self.x = vfrac(np.array(xs, dtype=float, copy=True))
        self.y = vfrac(np.array(ys, dtype=float, copy=True))

    def step(self, mask: Optional[np.ndarray] = None) -> None:
        if mask is None:
            self.y = vfrac(self.y + self.x + self.f.beta)
            self.x = vfrac(self.x + self.f.alpha)
        else:
            self.y[mask] = vfrac(self.y[mask] + self.x[mask] + self.f.beta)
            self.x[mask] = vfrac(self.x[mask] + self.f.alpha)

    def step_inverse(self, mask: Optional[np.ndarray] = None) -> None:
        if mask is None:
            self.x = vfrac(self.x - self.f.alpha)
            self.y = vfrac(self.y - self.x - self.f.beta)
        else:
            self.x[mask] = vfrac(self.x[mask] - self.f.alpha)
            self.y[mask] = vfrac(self.y[mask] - self.x[mask] - self.f.beta)


# --------------------------------------------------------------------------
# Estimators
# --------------------------------------------------------------------------


def _golden_extremum(
    fn: Callable[[float], float], lo: float, hi: float, iters: int = 72
) -> float:
    """Golden-section maximum of fn on [lo, hi]; pass -fn for minima."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc > fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return max(fc, fd)


def _arc_length(a: float, b: float) -> float:
    length = b - a
    if length <= 0.0:
        length += 1.0
    return min(length, 1.0)


def stretch(
    f: SkewShift,
    phi: FiberedTrigPoly,
    x: float,
    arc: Tuple[float, float],
    n: int,
    resolution: int = 256,
) -> float:
    """Oscillation max - min of y -> Phi_n(x, y) on the arc [a, b].

    Grid values at ``resolution`` points refined once around every local
    extremum by golden-section search.  The arc is read as a circle arc
    from a to b; (0, 1) is the full fiber.
    """
    if resolution < 64:
        raise ValueError("resolution must be >= 64")
    if n < 1:
        raise ValueError("n must be >= 1")
    a, b = arc
    length = _arc_length(a, b)
    coeffs = fiber_coefficients(f, phi, x, n)
    if not coeffs:
        return 0.0
    ks = np.array(sorted(coeffs.keys()))
    cs = np.array([coeffs[k] for k in ks])

    def g(y):
        return (cs @ np.exp(2j * np.pi * ks[:, None] * np.atleast_1d(y))).real

    full = length >= 1.0
    denom = resolution if full else resolution - 1
    ys = a + length * np.arange(resolution) / denom
    vals = g(ys)

    def g1(y: float) -> float:
        return float(g(np.array([y]))[0])

    best_max = float(np.max(vals))
    best_min = float(np.min(vals))
    h = length / denom
    for i in range(resolution):
        left = vals[i - 1] if (i > 0 or full) else None
        right = vals[(i + 1) % resolution] if (i < resolution - 1 or full) else None
        is_max = (left is None or vals[i] >= left) and (right is None or vals[i] >= right)
        is_min = (left is None or vals[i] <= left) and (right is None or vals[i] <= right)
        lo, hi = ys[i] - h, ys[i] + h
        if not full:
            lo, hi = max(lo, a), min(hi, a + length)
        if is_max:
            best_max = max(best_max, _golden_extremum(g1, lo, hi))
        if is_min:
            best_min = min(best_min, -_golden_extremum(lambda y: -g1(y), lo, hi))
    return best_max - best_min


class SublevelEstimate(NamedTuple):
    """Grid fraction with |g| < C plus a boundary-cell error estimate."""

    value: float
    error: float
    grid: int


def sublevel_measure(
    g, C: float, grid: int = 256
) -> SublevelEstimate:
    """Fraction of the torus (or circle) where |g| < C, midpoint rule.

    ``g`` may be a TrigPoly1D, a FiberedTrigPoly, a callable of one or
    two array arguments, or a precomputed 1-D/2-D sample array.  The
    reported error counts grid cells where the indicator flips between
    neighbours, i.e. cells crossed by the level set.
    """
    if C <= 0:
        raise ValueError("C must be > 0")
    if isinstance(g, np.ndarray):
        samples = g
    elif isinstance(g, TrigPoly1D):
        if grid < 64:
            raise ValueError("grid must be >= 64")
        samples = g.evaluate_complex(midgrid(grid))
    elif isinstance(g, FiberedTrigPoly):
        if grid < 64:
            raise ValueError("grid must be >= 64")
        xs = midgrid(grid)
        samples = g.evaluate_complex(xs[:, None], xs[None, :])
    elif callable(g):
        if grid < 64:
            raise ValueError("grid must be >= 64")
        xs = midgrid(grid)
        try:
            samples = np.asarray(g(xs[:, None], xs[None, :]))
        except TypeError:
            samples = np.asarray(g(xs))
    else:
        raise TypeError(f"cannot evaluate {type(g)!r}")
    ind = np.abs(samples) < C
    total = ind.size
    inside = int(np.count_nonzero(ind))
    if ind.ndim == 1:
        flips = int(np.count_nonzero(ind != np.roll(ind, 1)))
    elif ind.ndim == 2:
        flips = int(np.count_nonzero(ind != np.roll(ind, 1, axis=0))) + int(
            np.count_nonzero(ind != np.roll(ind, 1, axis=1))
        )
    else:
        raise ValueError("samples must be 1-D or 2-D")
    return SublevelEstimate(inside / total, flips / total, int(ind.shape[0]))


def visit_fraction(
    f: SkewShift, phi: FiberedTrigPoly, p: TorusPoint, C: float, N: int
) -> float:
    """(1/N) #{0 <= n < N : |phi_n(p)| < C} for the oscillating part of Phi.

    Single incremental pass; phi_0 = 0 always counts.
    """
    if C <= 0:
        raise ValueError("C must be > 0")
    if N < 1:
        raise ValueError("N must be >= 1")
    osc, _ = project(phi)
    count = 0
    acc = 0.0 + 0.0j
    comp = 0.0 + 0.0j
    ph = PhaseAccumulator(f, p.x)
    for n in range(N):
        if abs(acc) < C:
            count += 1
        term = osc.evaluate_complex(ph.x, frac(p.y + ph.phase)) - comp
        t = acc + term
        comp = (t - acc) - term
        acc = t
        ph.advance()
    return count / N


def rotation_transfer(
    phi_perp: TrigPoly1D, alpha: float, divisor_floor: float = 1e-12
) -> Tuple[TrigPoly1D, Union[float, complex]]:
    """Solve g(x + alpha) - g(x) = phi_perp(x) - mean over the circle.

    Fourier solution g_m = c_m / (e^{2 pi i m alpha} - 1) for m != 0;
    the mean (the m = 0 coefficient) is returned separately.  Raises
    SmallDivisor when a divisor in the support falls below the floor,
    which flags numerically resonant alpha at this degree.
    """
    mean = phi_perp.coeff(0)
    out: Dict[int, complex] = {}
    for m, c in phi_perp.coeffs.items():
        if m == 0:
            continue
        w = cmath.exp(2j * math.pi * frac_exact([(abs(m), alpha)]))
        if m < 0:
            w = w.conjugate()
        div = w - 1.0
        if abs(div) < divisor_floor:
            raise SmallDivisor(m, abs(div), divisor_floor)
        out[m] = c / div
    g = TrigPoly1D(out, real=phi_perp.real)
    return g, (mean.real if phi_perp.real else mean)


def skew_coboundary(u: FiberedTrigPoly, f: SkewShift) -> FiberedTrigPoly:
    """u(f(x,y)) - u(x,y)."""
    return u.compose_skew(f.alpha, f.beta) - u


# --------------------------------------------------------------------------
# Roof-file schema
# --------------------------------------------------------------------------

_ROOF_KEYS = {"alpha", "beta", "degree_y", "coeffs", "real"}


def roof_to_dict(f: SkewShift, phi: FiberedTrigPoly) -> dict:
    return {
        "alpha": f.alpha,
        "beta": f.beta,
        "degree_y": phi.degree_y,
        "real": phi.real,
        "coeffs": [
            {"k": k, "m": m, "re": c.real, "im": c.imag}
            for m, k, c in phi.modes()
        ],
    }


def roof_from_dict(d: dict) -> Tuple[SkewShift, FiberedTrigPoly]:
    if not isinstance(d, dict):
        raise InvalidRoofFile("roof document must be a JSON object")
    unknown = set(d) - _ROOF_KEYS
    if unknown:
        raise InvalidRoofFile(f"unknown roof keys: {sorted(unknown)}")
    missing = _ROOF_KEYS - set(d)
    if missing:
        raise InvalidRoofFile(f"missing roof keys: {sorted(missing)}")
    modes: Dict[Tuple[int, int], complex] = {}
    for entry in d["coeffs"]:
        if set(entry) != {"k", "m", "re", "im"}:
            raise InvalidRoofFile(f"bad coefficient entry: {entry}")
        key = (int(entry["m"]), int(entry["k"]))
        if key in modes:
            raise InvalidRoofFile(f"duplicate mode {key}")
        modes[key] = complex(float(entry["re"]), float(entry["im"]))
    if any(abs(k) > int(d["degree_y"]) for _, k in modes):
        raise InvalidRoofFile("coefficient exceeds declared degree_y")
    try:
        phi = FiberedTrigPoly.from_modes(modes, real=bool(d["real"]))
    except ValueError as exc:
        raise InvalidRoofFile(str(exc)) from exc
    f = SkewShift(float(d["alpha"]), float(d["beta"]))
    return f, phi


def load_roof(path) -> Tuple[SkewShift, FiberedTrigPoly]:
    with open(path, "r", encoding="utf-8") as fh:
        return roof_from_dict(json.load(fh))


def save_roof(path, f: SkewShift, phi: FiberedTrigPoly) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(roof_to_dict(f, phi), fh, indent=2, sort_keys=True)
        fh.write("\n")
