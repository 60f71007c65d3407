"""Finite Fourier series on the circle and on the 2-torus.

Two immutable value types:

* ``TrigPoly1D``   g(x)   = sum_m  c_m e^{2 pi i m x}
* ``FiberedTrigPoly``  Phi(x,y) = sum_k c_k(x) e^{2 pi i k y},  each c_k a
  ``TrigPoly1D``.

A poly flagged ``real`` stores both coefficient halves and must satisfy
c_{-m} = conj(c_m) (coefficientwise across both indices for the fibered
type); evaluation then returns the real part.  Violations raise at
construction time, so downstream code can trust the flag.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field
from typing import Dict, Iterator, Mapping, Tuple

import numpy as np

from .phases import frac_exact

TWO_PI = 2.0 * math.pi

_CONJ_TOL = 1e-12


def _clean(coeffs: Mapping[int, complex]) -> Dict[int, complex]:
    """Sorted copy with exact zeros dropped."""
    return {m: complex(c) for m, c in sorted(coeffs.items()) if c != 0}


def _mode_phase(m: int, a: float) -> complex:
    """e^{2 pi i m a} with exact conjugate symmetry in m."""
    if m == 0:
        return 1.0 + 0.0j
    w = cmath.exp(2j * math.pi * frac_exact([(abs(m), a)]))
    return w if m > 0 else w.conjugate()


@dataclass(frozen=True)
class TrigPoly1D:
    """Trigonometric polynomial on the circle, frequency -> coefficient."""

    coeffs: Dict[int, complex] = field(default_factory=dict)
    real: bool = False

    def __post_init__(self):
        object.__setattr__(self, "coeffs", _clean(self.coeffs))
        if self.real:
            for m, c in self.coeffs.items():
                d = self.coeffs.get(-m, 0.0)
                if abs(d - c.conjugate()) > _CONJ_TOL * (1.0 + abs(c)):
                    raise ValueError(
                        f"real-flagged poly has c_{-m} != conj(c_{m})"
                    )

    # ---- construction helpers -------------------------------------------

    @staticmethod
    def constant(c: float) -> "TrigPoly1D":
        return TrigPoly1D({0: complex(c)}, real=True)

    @staticmethod
    def zero() -> "TrigPoly1D":
        return TrigPoly1D({}, real=True)

    # ---- queries ---------------------------------------------------------

    def coeff(self, m: int) -> complex:
        return self.coeffs.get(m, 0.0 + 0.0j)

    @property
    def max_freq(self) -> int:
        return max((abs(m) for m in self.coeffs), default=0)

    def sup_bound(self) -> float:
        """sum |c_m|, an upper bound for sup |g|."""
        return sum(abs(c) for c in self.coeffs.values())

    def l2_norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for c in self.coeffs.values()))

    def is_zero(self) -> bool:
        return not self.coeffs

    # ---- evaluation ------------------------------------------------------

    def evaluate_complex(self, x):
        """Complex value(s) at x (scalar or ndarray)."""
        if isinstance(x, np.ndarray):
            out = np.zeros(x.shape, dtype=complex)
            for m, c in self.coeffs.items():
                out += c * np.exp(2j * np.pi * m * x)
            return out
        out = 0.0 + 0.0j
        for m, c in self.coeffs.items():
            out += c * cmath.exp(2j * math.pi * m * x)
        return out

    def evaluate(self, x):
        v = self.evaluate_complex(x)
        return v.real if self.real else v

    def __call__(self, x):
        return self.evaluate(x)

    # ---- algebra ---------------------------------------------------------

    def __add__(self, other: "TrigPoly1D") -> "TrigPoly1D":
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, 0.0) + c
        return TrigPoly1D(out, real=self.real and other.real)

    def __sub__(self, other: "TrigPoly1D") -> "TrigPoly1D":
        return self + other.scale(-1.0)

    def scale(self, s: complex) -> "TrigPoly1D":
        keep_real = self.real and complex(s).imag == 0.0
        return TrigPoly1D({m: s * c for m, c in self.coeffs.items()}, real=keep_real)

    def conjugate(self) -> "TrigPoly1D":
        return TrigPoly1D(
            {-m: c.conjugate() for m, c in self.coeffs.items()}, real=self.real
        )

    def derivative(self) -> "TrigPoly1D":
        return TrigPoly1D(
            {m: 2j * math.pi * m * c for m, c in self.coeffs.items() if m != 0},
            real=self.real,
        )

    def shift(self, a: float) -> "TrigPoly1D":
        """g(x) -> g(x + a)."""
        return TrigPoly1D(
            {m: c * _mode_phase(m, a) for m, c in self.coeffs.items()},
            real=self.real,
        )


@dataclass(frozen=True)
class FiberedTrigPoly:
    """Function on the 2-torus, trigonometric polynomial in both variables.

    Stored fiber-major: ``fiber[k]`` is the x-coefficient polynomial of
    e^{2 pi i k y}.
    """

    fiber: Dict[int, TrigPoly1D] = field(default_factory=dict)
    real: bool = False

    def __post_init__(self):
        cleaned = {
            k: p for k, p in sorted(self.fiber.items()) if not p.is_zero()
        }
        object.__setattr__(self, "fiber", cleaned)
        if self.real:
            for k, p in cleaned.items():
                q = cleaned.get(-k, TrigPoly1D.zero())
                for m, c in p.coeffs.items():
                    d = q.coeff(-m)
                    if abs(d - c.conjugate()) > _CONJ_TOL * (1.0 + abs(c)):
                        raise ValueError(
                            f"real-flagged poly has c_({-m},{-k}) != "
                            f"conj(c_({m},{k}))"
                        )

    # ---- construction ------------------------------------------------------

    @staticmethod
    def from_modes(modes: Mapping[Tuple[int, int], complex], real: bool = False
                   ) -> "FiberedTrigPoly":
        """Build from a flat {(m, k): coefficient} map, m the x-frequency."""
        by_k: Dict[int, Dict[int, complex]] = {}
        for (m, k), c in modes.items():
            by_k.setdefault(k, {})[m] = by_k.setdefault(k, {}).get(m, 0.0) + c
        fiber = {k: TrigPoly1D(cs) for k, cs in by_k.items()}
        return FiberedTrigPoly(fiber, real=real)

    @staticmethod
    def constant(c: float) -> "FiberedTrigPoly":
        return FiberedTrigPoly({0: TrigPoly1D.constant(c)}, real=True)

    # ---- queries -------------------------------------------------------------

    def c(self, k: int) -> TrigPoly1D:
        """The coefficient polynomial of e^{2 pi i k y}."""
        return self.fiber.get(k, TrigPoly1D.zero())

    def modes(self) -> Iterator[Tuple[int, int, complex]]:
        """Iterate (m, k, coefficient) over the support, sorted."""
        for k, p in self.fiber.items():
            for m, c in p.coeffs.items():
                yield m, k, c

    @property
    def degree_y(self) -> int:
        return max((abs(k) for k in self.fiber), default=0)

    @property
    def max_freq_x(self) -> int:
        return max((p.max_freq for p in self.fiber.values()), default=0)

    def mean(self) -> float:
        """Integral over the torus (the (0,0) coefficient)."""
        return self.c(0).coeff(0).real

    def sup_bound(self) -> float:
        return sum(abs(c) for _, _, c in self.modes())

    def l2_norm(self) -> float:
        return math.sqrt(sum(abs(c) ** 2 for _, _, c in self.modes()))

    def is_zero(self) -> bool:
        return not self.fiber

    # ---- evaluation ------------------------------------------------------------

    def evaluate_complex(self, x, y):
        if isinstance(x, np.ndarray) or isinstance(y, np.ndarray):
            x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
            out = np.zeros(x.shape, dtype=complex)
            for k, p in self.fiber.items():
                out += p.evaluate_complex(x) * np.exp(2j * np.pi * k * y)
            return out
        out = 0.0 + 0.0j
        for k, p in self.fiber.items():
            out += p.evaluate_complex(x) * cmath.exp(2j * math.pi * k * y)
        return out

    def evaluate(self, x, y):
        v = self.evaluate_complex(x, y)
        return v.real if self.real else v

    def __call__(self, x, y):
        return self.evaluate(x, y)

    # ---- algebra -----------------------------------------------------------------

    def __add__(self, other: "FiberedTrigPoly") -> "FiberedTrigPoly":
        ks = set(self.fiber) | set(other.fiber)
        fiber = {k: self.c(k) + other.c(k) for k in ks}
        return FiberedTrigPoly(fiber, real=self.real and other.real)

    def __sub__(self, other: "FiberedTrigPoly") -> "FiberedTrigPoly":
        return self + other.scale(-1.0)

    def scale(self, s: complex) -> "FiberedTrigPoly":
        keep_real = self.real and complex(s).imag == 0.0
        return FiberedTrigPoly(
            {k: p.scale(s) for k, p in self.fiber.items()}, real=keep_real
        )

    def add_constant(self, c: float) -> "FiberedTrigPoly":
        return self + FiberedTrigPoly.constant(c)

    def dy(self) -> "FiberedTrigPoly":
        """Partial derivative in the fiber variable y."""
        return FiberedTrigPoly(
            {k: p.scale(2j * math.pi * k) for k, p in self.fiber.items() if k != 0},
            real=self.real,
        )

    def compose_skew(self, alpha: float, beta: float) -> "FiberedTrigPoly":
        """Phi(x + alpha, y + x + beta): mode (m, k) -> (m + k, k) with phase.

        The phase e^{2 pi i (m alpha + k beta)} is computed from the exact
        dyadic reduction of m*alpha + k*beta, with conjugate modes phased
        by explicit conjugation so realness survives bit-for-bit.
        """
        out: Dict[Tuple[int, int], complex] = {}
        for m, k, c in self.modes():
            neg = False
            mm, kk = m, k
            if k < 0 or (k == 0 and m < 0):
                neg, mm, kk = True, -m, -k
            w = cmath.exp(2j * math.pi * frac_exact([(mm, alpha), (kk, beta)]))
            if neg:
                w = w.conjugate()
            key = (m + k, k)
            out[key] = out.get(key, 0.0) + c * w
        return FiberedTrigPoly.from_modes(out, real=self.real)
