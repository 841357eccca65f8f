"""Polynomial weights: evaluation, roots, invertibility class, local structure.

Weights are polynomials with complex coefficients stored lowest degree
first. The zero polynomial is rejected everywhere. Root finding goes
through the balanced companion matrix (numpy.roots) followed by a short
simultaneous Newton polish; multiplicities come from cluster merging.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

__all__ = [
    "WeightPoly",
    "InvertibilityClass",
    "CircleExtrema",
    "RootFindingError",
    "roots",
    "roots_raw",
    "classify_invertibility",
    "factor_at",
    "circle_extrema",
    "circle_sup_bound",
    "circle_min_bound",
]

DEFAULT_ROOT_TOL = 1e-7
BORDER_WARN_FACTOR = 10.0

_TWO_PI = 2.0 * math.pi
_GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0


class RootFindingError(RuntimeError):
    """Root refinement failed to converge; carries the iteration trace."""

    def __init__(self, message: str, trace: list):
        super().__init__(message)
        self.trace = trace


@dataclass(frozen=True)
class WeightPoly:
    coeffs: tuple[complex, ...]

    @staticmethod
    def of(coeffs: Sequence[complex]) -> "WeightPoly":
        cs = [complex(c) for c in coeffs]
        while len(cs) > 1 and cs[-1] == 0:
            cs.pop()
        if not cs or all(c == 0 for c in cs):
            raise ValueError("the zero polynomial is not a valid weight")
        return WeightPoly(tuple(cs))

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def leading(self) -> complex:
        return self.coeffs[-1]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.coeffs, dtype=complex)

    def eval(self, z):
        """Horner evaluation at a scalar or ndarray."""
        if isinstance(z, np.ndarray):
            acc = np.full(z.shape, self.coeffs[-1], dtype=complex)
            for c in self.coeffs[-2::-1]:
                acc = acc * z + c
            return acc
        acc = self.coeffs[-1]
        for c in self.coeffs[-2::-1]:
            acc = acc * z + c
        return acc

    __call__ = eval

    def derivative_coeffs(self) -> np.ndarray:
        if self.degree == 0:
            return np.zeros(1, dtype=complex)
        return np.array([k * c for k, c in enumerate(self.coeffs)][1:], dtype=complex)

    def coeff_one_norm(self) -> float:
        return float(sum(abs(c) for c in self.coeffs))

    def derivative_one_norm(self) -> float:
        return float(sum(k * abs(c) for k, c in enumerate(self.coeffs)))

    def scaled_residual_tol(self) -> float:
        # residual gate used everywhere a value is tested against "is a root"
        return 1e-8 * (1.0 + max(abs(c) for c in self.coeffs)) * max(self.degree, 1)


def _polyval(coeffs: np.ndarray, z):
    acc = np.full(np.shape(z), coeffs[-1], dtype=complex) if isinstance(z, np.ndarray) \
        else coeffs[-1]
    for c in coeffs[-2::-1]:
        acc = acc * z + c
    return acc


def roots_raw(w: WeightPoly) -> np.ndarray:
    """All polished roots, one entry per root, deterministic order."""
    if w.degree < 1:
        return np.zeros(0, dtype=complex)
    rs = np.roots(w.as_array()[::-1])
    dc = w.derivative_coeffs()
    trace = []
    # short Newton polish; steps are only accepted when the residual drops
    for _ in range(3):
        vals = _polyval(w.as_array(), rs)
        ders = _polyval(dc, rs)
        step = np.where(np.abs(ders) > 1e-300, vals / np.where(ders == 0, 1, ders), 0.0)
        cand = rs - step
        cand_vals = _polyval(w.as_array(), cand)
        better = np.abs(cand_vals) < np.abs(vals)
        rs = np.where(better, cand, rs)
        trace.append(float(np.max(np.abs(_polyval(w.as_array(), rs)))))
    residual_gate = w.scaled_residual_tol() * 1e6
    if trace[-1] > residual_gate:
        raise RootFindingError(
            f"root refinement stalled at residual {trace[-1]:.3e}", trace)
    order = np.lexsort((rs.imag, rs.real))
    return rs[order]


def roots(w: WeightPoly, tol: float = DEFAULT_ROOT_TOL) -> list[tuple[complex, int]]:
    """Roots with multiplicities; clusters merge within tol**(1/multiplicity)."""
    if w.degree < 1:
        raise ValueError("roots requires degree >= 1")
    rs = roots_raw(w)
    clusters: list[list[complex]] = [[complex(r)] for r in rs]
    merged = True
    while merged and len(clusters) > 1:
        merged = False
        for i in range(len(clusters)):
            for j in range(i + 1, len(clusters)):
                ci, cj = clusters[i], clusters[j]
                size = len(ci) + len(cj)
                radius = tol ** (1.0 / size)
                mi = sum(ci) / len(ci)
                mj = sum(cj) / len(cj)
                if abs(mi - mj) <= radius:
                    clusters[i] = ci + cj
                    del clusters[j]
                    merged = True
                    break
            if merged:
                break
    out = []
    for cl in clusters:
        center = sum(cl) / len(cl)
        out.append((center, len(cl)))
    out.sort(key=lambda rm: (rm[0].real, rm[0].imag))
    assert sum(m for _, m in out) == w.degree
    return out


@dataclass(frozen=True)
class InvertibilityClass:
    """Partition of the roots against the unit circle, with the case key.

    kind is one of "invertible", "nonvanishing_on_circle",
    "vanishes_on_circle". The tolerance band ||r| - 1| <= tol decides
    circle membership; borderline roots produce warnings.
    """

    kind: str
    inside: tuple[tuple[complex, int], ...]
    on_circle: tuple[tuple[complex, int], ...]
    outside: tuple[tuple[complex, int], ...]
    tol: float
    warnings: tuple[str, ...] = ()

    def has_circle_root_near(self, point: complex, dist: float) -> bool:
        return any(abs(r - point) <= dist for r, _ in self.on_circle)


def classify_invertibility(w: WeightPoly, tol: float = DEFAULT_ROOT_TOL) -> InvertibilityClass:
    if w.degree == 0:
        return InvertibilityClass("invertible", (), (), (), tol)
    inside, on_circle, outside, warnings = [], [], [], []
    for r, m in roots(w, tol):
        gap = abs(abs(r) - 1.0)
        if gap <= tol:
            on_circle.append((r, m))
        else:
            if gap <= BORDER_WARN_FACTOR * tol:
                warnings.append(
                    f"root {r:.12g} sits {gap:.2e} from the circle, inside the "
                    f"({tol:.0e}, {BORDER_WARN_FACTOR * tol:.0e}) caution band")
            (inside if abs(r) < 1.0 else outside).append((r, m))
    if on_circle:
        kind = "vanishes_on_circle"
    elif inside:
        kind = "nonvanishing_on_circle"
    else:
        kind = "invertible"
    return InvertibilityClass(kind, tuple(inside), tuple(on_circle), tuple(outside),
                              tol, tuple(warnings))


def _synthetic_divide(coeffs: np.ndarray, z0: complex) -> np.ndarray:
    # divide by (z - z0); coefficients lowest first, remainder dropped
    n = len(coeffs)
    out = np.zeros(n - 1, dtype=complex)
    acc = coeffs[-1]
    for k in range(n - 2, -1, -1):
        out[k] = acc
        acc = coeffs[k] + z0 * acc
    return out


def factor_at(w: WeightPoly, z0: complex) -> tuple[int, complex]:
    """Order of vanishing n at z0 and the deflated value w1(z0) != 0."""
    z0 = complex(z0)
    gate = w.scaled_residual_tol()
    cur = w.as_array()
    n = 0
    while len(cur) > 1 and abs(_polyval(cur, z0)) <= gate:
        cur = _synthetic_divide(cur, z0)
        n += 1
    return n, complex(_polyval(cur, z0))


def _golden_refine(fun, a: float, b: float, iters: int = 60) -> tuple[float, float]:
    # minimize fun over [a, b]; returns (argmin, min)
    x1 = b - _GOLDEN * (b - a)
    x2 = a + _GOLDEN * (b - a)
    f1, f2 = fun(x1), fun(x2)
    for _ in range(iters):
        if f1 < f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - _GOLDEN * (b - a)
            f1 = fun(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + _GOLDEN * (b - a)
            f2 = fun(x2)
    xs = [(a, fun(a)), (x1, f1), (x2, f2), (b, fun(b))]
    return min(xs, key=lambda p: p[1])


@dataclass(frozen=True)
class CircleExtrema:
    min_mod: float
    max_mod: float
    theta_min: float
    theta_max: float


def circle_extrema(w: WeightPoly, samples: int = 4096) -> CircleExtrema:
    """Extrema of |w| on the unit circle: uniform grid plus golden refinement."""
    if samples < 16:
        raise ValueError("samples must be at least 16")
    thetas = np.linspace(0.0, _TWO_PI, samples, endpoint=False)
    mods = np.abs(w.eval(np.exp(1j * thetas)))
    h = _TWO_PI / samples

    def mod_at(t: float) -> float:
        return abs(w.eval(cmath.exp(1j * t)))

    i_min = int(np.argmin(mods))
    i_max = int(np.argmax(mods))
    t_min, v_min = _golden_refine(mod_at, thetas[i_min] - h, thetas[i_min] + h)
    t_max, v_max = _golden_refine(lambda t: -mod_at(t), thetas[i_max] - h, thetas[i_max] + h)
    v_max = -v_max
    # refined extrema must bracket every sampled value
    v_min = min(v_min, float(mods[i_min]))
    v_max = max(v_max, float(mods[i_max]))
    return CircleExtrema(v_min, v_max, t_min % _TWO_PI, t_max % _TWO_PI)


def circle_sup_bound(w: WeightPoly, samples: int = 4096) -> float:
    """Certified upper bound for sup over the circle of |w|.

    Combines the coefficient one-norm with a grid value plus the global
    derivative bound sup |w'| <= sum k |c_k|.
    """
    norm1 = w.coeff_one_norm()
    if w.degree == 0:
        return norm1
    thetas = np.linspace(0.0, _TWO_PI, samples, endpoint=False)
    grid = float(np.max(np.abs(w.eval(np.exp(1j * thetas)))))
    slack = w.derivative_one_norm() * (_TWO_PI / samples) / 2.0
    return min(norm1, grid + slack)


def circle_min_bound(w: WeightPoly, samples: int = 4096) -> float:
    """Certified lower bound for min over the circle of |w| (clamped at 0).

    Coefficient dominance |c_j| - sum of the others is a valid lower bound
    on |z| = 1 for every j; the grid value minus the derivative slack is
    the other branch.
    """
    mags = [abs(c) for c in w.coeffs]
    total = sum(mags)
    dominance = max((2.0 * m - total for m in mags), default=0.0)
    bound = max(dominance, 0.0)
    if w.degree == 0:
        return bound
    thetas = np.linspace(0.0, _TWO_PI, samples, endpoint=False)
    grid = float(np.min(np.abs(w.eval(np.exp(1j * thetas)))))
    slack = w.derivative_one_norm() * (_TWO_PI / samples) / 2.0
    return max(bound, grid - slack, 0.0)
