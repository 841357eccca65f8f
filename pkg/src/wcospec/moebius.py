"""Moebius automorphisms of the closed unit disk.

Immutable map values plus the handful of operations the rest of the
package is built on: evaluation, composition, inversion, fixed points
with multipliers, orbit iteration, and classification into
identity / elliptic (rational or irrational rotation) / parabolic /
hyperbolic types.

All types are pure values; every function here is safe to call
concurrently.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

__all__ = [
    "MoebiusMap",
    "FixedPoint",
    "Identity",
    "EllipticRational",
    "EllipticIrrational",
    "Parabolic",
    "Hyperbolic",
    "MapClass",
    "DegenerateInputError",
    "IdentityFixedPointsError",
    "AmbiguousRationalityError",
    "fixed_points",
    "classify",
    "orbit",
]

# tagging tolerance on ||z| - 1| for fixed points
BOUNDARY_TOL = 1e-8
# root-of-unity proximity threshold for rational-rotation detection
CLASSIFY_TOL = 1e-9
# default search horizon for rational rotation orders
DEFAULT_M_MAX = 64
# orders in (m_max, AMBIGUITY_FACTOR * m_max] raise AmbiguousRationalityError
AMBIGUITY_FACTOR = 4
# fixed points closer than this collapse to a parabolic double point
DOUBLE_POINT_TOL = 1e-6

_VALIDATE_TOL = 1e-8
_TINY = 1e-300


class DegenerateInputError(ValueError):
    """Coefficients do not describe a usable disk automorphism."""


class IdentityFixedPointsError(ValueError):
    """fixed_points was called on the identity; every point is fixed."""


class AmbiguousRationalityError(Exception):
    """Multiplier sits numerically on a root of unity of order above m_max.

    Rational-rotation detection is undecidable from floating point data
    alone, so this carries both candidate classifications and the caller
    must pick one via the declare-rational / declare-irrational override.
    """

    def __init__(self, rational_candidate: "EllipticRational",
                 irrational_candidate: "EllipticIrrational"):
        self.rational_candidate = rational_candidate
        self.irrational_candidate = irrational_candidate
        super().__init__(
            f"rotation order {rational_candidate.m} exceeds the search horizon; "
            "declare rationality explicitly"
        )


@dataclass(frozen=True)
class MoebiusMap:
    """The map z -> (a z + b) / (c z + d) restricted to the closed disk."""

    a: complex
    b: complex
    c: complex
    d: complex

    @staticmethod
    def from_coeffs(a, b, c, d, validate: bool = True) -> "MoebiusMap":
        m = MoebiusMap(complex(a), complex(b), complex(c), complex(d))
        scale = max(abs(m.a), abs(m.b), abs(m.c), abs(m.d))
        if scale == 0.0 or abs(m.det) <= _VALIDATE_TOL * scale * scale:
            raise DegenerateInputError("coefficient matrix is singular")
        if validate:
            m._check_disk_automorphism()
        return m

    @staticmethod
    def canonical(theta: float, center: complex = 0j) -> "MoebiusMap":
        """exp(i theta) (z - center) / (1 - conj(center) z).

        Canonical inputs are exact by construction and skip the sampled
        disk-automorphism validation.
        """
        center = complex(center)
        if abs(center) >= 1.0:
            raise DegenerateInputError("canonical center must lie inside the open disk")
        ph = cmath.exp(1j * theta)
        return MoebiusMap(ph, -ph * center, -center.conjugate(), 1.0 + 0j)

    @staticmethod
    def rotation(alpha: complex) -> "MoebiusMap":
        """z -> alpha z for unimodular alpha."""
        alpha = complex(alpha)
        if abs(abs(alpha) - 1.0) > _VALIDATE_TOL:
            raise DegenerateInputError("rotation factor must be unimodular")
        return MoebiusMap(alpha, 0j, 0j, 1 + 0j)

    @staticmethod
    def identity_map() -> "MoebiusMap":
        return MoebiusMap(1 + 0j, 0j, 0j, 1 + 0j)

    @property
    def det(self) -> complex:
        return self.a * self.d - self.b * self.c

    def _check_disk_automorphism(self) -> None:
        if abs(self.evaluate(0j)) >= 1.0:
            raise DegenerateInputError("map does not send 0 into the open disk")
        for zeta in (1 + 0j, 1j, -1 + 0j):
            if abs(abs(self.evaluate(zeta)) - 1.0) > _VALIDATE_TOL:
                raise DegenerateInputError("map does not preserve the unit circle")

    def evaluate(self, z):
        """Evaluate at a complex scalar or ndarray."""
        den = self.c * z + self.d
        scale = abs(self.c) + abs(self.d)
        if isinstance(z, np.ndarray):
            if den.size and float(np.min(np.abs(den))) < 1e-14 * scale:
                raise DegenerateInputError("denominator vanishes at an input point")
        else:
            if abs(den) < 1e-14 * scale:
                raise DegenerateInputError("denominator vanishes at the input point")
        return (self.a * z + self.b) / den

    __call__ = evaluate

    def derivative(self, z):
        den = self.c * z + self.d
        return self.det / (den * den)

    def compose(self, other: "MoebiusMap") -> "MoebiusMap":
        """self after other: z -> self(other(z)); unit determinant modulus."""
        a = self.a * other.a + self.b * other.c
        b = self.a * other.b + self.b * other.d
        c = self.c * other.a + self.d * other.c
        d = self.c * other.b + self.d * other.d
        s = math.sqrt(abs(a * d - b * c))
        if s < _TINY:
            raise DegenerateInputError("composition degenerated")
        return MoebiusMap(a / s, b / s, c / s, d / s)

    def inverse(self) -> "MoebiusMap":
        s = math.sqrt(abs(self.det))
        return MoebiusMap(self.d / s, -self.b / s, -self.c / s, self.a / s)

    def is_identity(self, tol: float = CLASSIFY_TOL) -> bool:
        scale = max(abs(self.a), abs(self.b), abs(self.c), abs(self.d))
        return (abs(self.b) <= tol * scale and abs(self.c) <= tol * scale
                and abs(self.a - self.d) <= tol * scale)

    def boundary_angles(self, thetas: np.ndarray) -> np.ndarray:
        """Angles of the images of exp(i thetas); the map preserves the circle."""
        return np.angle(self.evaluate(np.exp(1j * thetas)))

    def boundary_derivative_sup(self) -> float:
        """Certified sup of |phi'| over the unit circle.

        min over |z| = 1 of |c z + d| is ||d| - |c||; a zero there means the
        pole touches the circle and the sup is unbounded.
        """
        gap = abs(abs(self.d) - abs(self.c))
        if gap < 1e-15 * (abs(self.c) + abs(self.d) + 1.0):
            return math.inf
        return abs(self.det) / (gap * gap)


@dataclass(frozen=True)
class FixedPoint:
    point: complex
    location: str  # "interior" or "boundary"
    multiplier: complex


@dataclass(frozen=True)
class Identity:
    kind: str = "identity"


@dataclass(frozen=True)
class EllipticRational:
    m: int
    z0: complex
    multiplier: complex
    kind: str = "elliptic_rational"


@dataclass(frozen=True)
class EllipticIrrational:
    z0: complex
    r0: float
    theta0: float
    multiplier: complex
    kind: str = "elliptic_irrational"


@dataclass(frozen=True)
class Parabolic:
    zeta: complex
    multiplier: complex
    kind: str = "parabolic"


@dataclass(frozen=True)
class Hyperbolic:
    zeta1: complex  # attracting, |phi'(zeta1)| < 1
    zeta2: complex  # repelling, |phi'(zeta2)| > 1
    multiplier1: float
    multiplier2: float
    kind: str = "hyperbolic"


MapClass = Union[Identity, EllipticRational, EllipticIrrational, Parabolic, Hyperbolic]


def _stable_quadratic_roots(A: complex, B: complex, C: complex) -> tuple[complex, complex]:
    # two-branch form: pick the sign that avoids cancellation in B + sqrt(disc)
    disc = B * B - 4.0 * A * C
    sq = cmath.sqrt(disc)
    if (B.conjugate() * sq).real < 0.0:
        sq = -sq
    q = -0.5 * (B + sq)
    if abs(q) > _TINY * max(abs(A), abs(C), 1.0):
        return q / A, C / q
    # B ~ -sq ~ 0: symmetric pair
    return sq / (2.0 * A), -sq / (2.0 * A)


def fixed_points(f: MoebiusMap) -> list[FixedPoint]:
    """Finite fixed points of f, tagged interior/boundary, with phi'(z).

    Exterior roots (including the point at infinity for rotations) are
    discarded; a parabolic double point is returned once.
    """
    if f.is_identity():
        raise IdentityFixedPointsError(
            "the identity fixes every point; use the identity code path")
    A, B, C = f.c, f.d - f.a, -f.b
    scale = max(abs(A), abs(B), abs(C))
    if abs(A) <= 1e-14 * scale:
        if abs(B) <= 1e-14 * scale:
            raise DegenerateInputError("no finite fixed point; map is not automorphic")
        roots = [-C / B]
    else:
        z1, z2 = _stable_quadratic_roots(A, B, C)
        if abs(z1 - z2) <= DOUBLE_POINT_TOL * (1.0 + abs(z1)):
            z = 0.5 * (z1 + z2)
            roots = [z]
        else:
            roots = [z1, z2]
    out = []
    for z in roots:
        r = abs(z)
        if abs(r - 1.0) <= BOUNDARY_TOL:
            z = z / r  # snap onto the circle; downstream weight values use it
            loc = "boundary"
        elif r < 1.0:
            loc = "interior"
        else:
            continue
        out.append(FixedPoint(z, loc, f.derivative(z)))
    return out


_COMPOSITE_TEST_POINTS = (0.3 + 0.1j, -0.22 + 0.41j, 0.15 - 0.35j)


def _composite_is_identity(f: MoebiusMap, m: int, tol: float = 1e-6) -> bool:
    g = f
    for _ in range(m - 1):
        g = g.compose(f)
    return all(abs(g.evaluate(z) - z) <= tol for z in _COMPOSITE_TEST_POINTS)


def classify(f: MoebiusMap, tol: float = CLASSIFY_TOL, m_max: int = DEFAULT_M_MAX,
             declare: Optional[object] = None) -> MapClass:
    """Classify a disk automorphism.

    declare: None, the string "irrational", or ("rational", m). The override
    exists because rationality of a rotation angle is not decidable from
    floats; see AmbiguousRationalityError.
    """
    if f.is_identity(tol):
        return Identity()
    pts = fixed_points(f)
    interior = [p for p in pts if p.location == "interior"]
    boundary = [p for p in pts if p.location == "boundary"]
    if interior:
        p = interior[0]
        z0, lam = p.point, p.multiplier
        r0, th0 = abs(z0), cmath.phase(z0)
        if declare == "irrational":
            return EllipticIrrational(z0, r0, th0, lam)
        if isinstance(declare, tuple) and len(declare) == 2 and declare[0] == "rational":
            m = int(declare[1])
            if not _composite_is_identity(f, m):
                raise DegenerateInputError(
                    f"declared rotation order {m} fails the composite identity check")
            return EllipticRational(m, z0, lam)
        power = lam
        for k in range(1, AMBIGUITY_FACTOR * m_max + 1):
            if abs(power - 1.0) < tol:
                cand_r = EllipticRational(k, z0, lam)
                if k <= m_max and _composite_is_identity(f, k):
                    return cand_r
                raise AmbiguousRationalityError(
                    cand_r, EllipticIrrational(z0, r0, th0, lam))
            power *= lam
        return EllipticIrrational(z0, r0, th0, lam)
    if len(boundary) == 1:
        return Parabolic(boundary[0].point, boundary[0].multiplier)
    if len(boundary) == 2:
        p, q = boundary
        mp, mq = abs(p.multiplier), abs(q.multiplier)
        if mp > mq:
            p, q, mp, mq = q, p, mq, mp
        return Hyperbolic(p.point, q.point, mp, mq)
    raise DegenerateInputError("fixed point pattern is not automorphic")


def orbit(f: MoebiusMap, z: complex, n: int) -> list[complex]:
    """[z, f(z), ..., f^n(z)] by repeated evaluation, not coefficient powers."""
    if n < 0:
        raise ValueError("n must be nonnegative")
    pts = [complex(z)]
    for _ in range(n):
        pts.append(f.evaluate(pts[-1]))
    return pts
