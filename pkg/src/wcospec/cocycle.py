"""Cocycle growth oracles: certified radius bounds from boundary orbits.

The products w_n = w (w o phi) ... (w o phi^{n-1}) control everything:
the outer radius is lim of (sup over the circle of |w_n|)^{1/n}, the inner
one is the matching min-side limit. This module produces

  * certified upper bounds for the outer radius (coefficient norms,
    closed-form factor bounds, and an interval propagation of boundary
    arcs under circle homeomorphisms),
  * certified lower bounds from verified periodic orbits (point-mass
    invariant measures),
  * two-sided estimates for the inner radius.

These bounds never use the closed forms they are meant to check: the only
inputs are coefficient data, root locations, and honest orbit evaluation.
Grids are deterministic, so repeated runs give identical output.

The sup-side arc bound works like this: partition the circle into arcs,
push each arc forward by the map (a homeomorphism sends an arc onto the
arc between the endpoint images, preserving cyclic order), and bound
ln|w| over the image arc by its endpoint values plus a Lipschitz slack
proportional to the arc length. Arcs near attracting material shrink, so
the slack telescopes; arcs that blow up fall back to the global one-step
bound. Cells that dominate the certified sup get bisected until the gap
to the sampled orbit values is below eps per step.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .moebius import (
    IdentityFixedPointsError,
    MoebiusMap,
    classify,
    fixed_points,
    Identity,
    EllipticIrrational,
    EllipticRational,
    Hyperbolic,
    Parabolic,
    AmbiguousRationalityError,
)
from .weight import WeightPoly, circle_min_bound, circle_sup_bound, roots_raw

__all__ = [
    "CocycleProbe",
    "RadiusEnclosure",
    "CocycleExtrema",
    "log_cocycle",
    "rho_upper_certified",
    "rho_lower_periodic",
    "rho_min_estimate",
    "certify_cocycle_extrema",
    "birkhoff_extremes",
]

_TWO_PI = 2.0 * math.pi
UNDERFLOW_FLOOR = 1e-300
_LN_FLOOR = math.log(UNDERFLOW_FLOOR)
# per-step inflation of certified bounds covering float accumulation error
_FLOAT_SLACK = 5e-15


@dataclass(frozen=True)
class CocycleProbe:
    """Orbit-sampling request: map, weight, step count, boundary grid size."""

    map: object
    weight: WeightPoly
    n: int
    sample_grid: int = 2048

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be at least 1")
        if self.sample_grid < 8:
            raise ValueError("sample_grid must be at least 8")


@dataclass(frozen=True)
class RadiusEnclosure:
    lower: float
    upper: float
    witnesses: str = ""

    def __post_init__(self):
        if self.lower > self.upper + 1e-9:
            raise ValueError(
                f"inverted enclosure [{self.lower}, {self.upper}]: this is a bug")


def _apply_map(f, z):
    return f.evaluate(z) if hasattr(f, "evaluate") else f(z)


def _ln_abs_weight(w: WeightPoly, z: np.ndarray) -> np.ndarray:
    mods = np.abs(w.eval(z))
    return np.where(mods > UNDERFLOW_FLOOR, np.log(np.maximum(mods, UNDERFLOW_FLOOR)),
                    -np.inf)


def log_cocycle(probe: CocycleProbe, t: complex) -> float:
    """Sum of ln|w(phi^k(t))| for k < n; -inf when a factor underflows."""
    t = complex(t)
    if abs(abs(t) - 1.0) > 1e-6:
        raise ValueError("the probe point must sit on the unit circle")
    vals = np.empty(probe.n)
    z = t
    for k in range(probe.n):
        m = abs(probe.weight.eval(z))
        if m < UNDERFLOW_FLOOR:
            return -math.inf
        vals[k] = math.log(m)
        z = _apply_map(probe.map, z)
    return float(np.add.reduce(vals))  # pairwise summation


def _weight_log_lipschitz(w: WeightPoly) -> float:
    """Sup over the circle of |w'/w|, bounded by summed inverse root gaps.

    Returns inf when a root touches the circle; local arc bounds are then
    disabled and only the global one-step bounds stay in force.
    """
    if w.degree == 0:
        return 0.0
    gaps = np.abs(np.abs(roots_raw(w)) - 1.0)
    if float(np.min(gaps)) < 1e-9:
        return math.inf
    return float(np.sum(1.0 / gaps))


@dataclass(frozen=True)
class CocycleExtrema:
    ln_sup: float          # certified: sup of ln|w_n| on the circle is <= this
    ln_min: float          # certified: min of ln|w_n| on the circle is >= this
    ln_sup_sampled: float  # largest honest orbit sum seen
    ln_min_sampled: float  # smallest honest orbit sum seen
    n: int
    locally_certified: bool
    rounds: int


def _arc_pass_shared(w, f, n, P0, lam, ln_sup_g, ln_min_g):
    """One full propagation with shared endpoints; cells are consecutive pairs."""
    P = P0.copy()
    M = len(P)
    S = np.zeros(M)
    T = np.zeros(M)
    birkhoff = np.zeros(M)
    local = math.isfinite(lam)
    for _ in range(n):
        z = np.exp(1j * P)
        lnw = _ln_abs_weight(w, z)
        if local:
            nxt = np.roll(lnw, -1)
            L = np.mod(np.roll(P, -1) - P, _TWO_PI)
            S += np.minimum(ln_sup_g, np.maximum(lnw, nxt) + 0.5 * lam * L)
            T += np.maximum(ln_min_g, np.minimum(lnw, nxt) - 0.5 * lam * L)
        else:
            S += ln_sup_g
            T += ln_min_g
        birkhoff += lnw
        P = np.mod(np.angle(_apply_map(f, z)), _TWO_PI)
    return S, T, birkhoff


def _arc_pass_pairs(w, f, n, A0, B0, lam, ln_sup_g, ln_min_g):
    """Propagation for independent arcs given by separate endpoint arrays."""
    A = A0.copy()
    B = B0.copy()
    k = len(A)
    S = np.zeros(k)
    T = np.zeros(k)
    birA = np.zeros(k)
    birB = np.zeros(k)
    local = math.isfinite(lam)
    for _ in range(n):
        za = np.exp(1j * A)
        zb = np.exp(1j * B)
        fa = _ln_abs_weight(w, za)
        fb = _ln_abs_weight(w, zb)
        if local:
            L = np.mod(B - A, _TWO_PI)
            S += np.minimum(ln_sup_g, np.maximum(fa, fb) + 0.5 * lam * L)
            T += np.maximum(ln_min_g, np.minimum(fa, fb) - 0.5 * lam * L)
        else:
            S += ln_sup_g
            T += ln_min_g
        birA += fa
        birB += fb
        A = np.mod(np.angle(_apply_map(f, za)), _TWO_PI)
        B = np.mod(np.angle(_apply_map(f, zb)), _TWO_PI)
    return S, T, birA, birB


def _fixed_boundary_angles(f: MoebiusMap) -> list[float]:
    try:
        return [cmath.phase(p.point) % _TWO_PI
                for p in fixed_points(f) if p.location == "boundary"]
    except IdentityFixedPointsError:  # callers special-case the identity
        return []


def _cascade_angles(centers: list[float], cells: int) -> list[float]:
    """Geometric cascade of partition points around boundary fixed points.

    Escape times from a fixed point scale like the inverse distance
    (parabolic) or its log (hyperbolic), so cells whose width halves
    toward the fixed point keep the arc bound local for the whole run
    without adaptive splitting.
    """
    out: list[float] = []
    k0 = max(4, int(math.log2(max(cells, 8))))
    for a in centers:
        for k in range(k0, 46):
            h = _TWO_PI * 2.0 ** (-k)
            out.append((a + h) % _TWO_PI)
            out.append((a - h) % _TWO_PI)
    return out


def certify_cocycle_extrema(w: WeightPoly, f: MoebiusMap, n: int, cells: int = 2048,
                            eps: float = 5e-3, max_rounds: int = 12,
                            split_batch: int = 16) -> CocycleExtrema:
    """Certified bounds for the extrema of ln|w_n| on the circle.

    Valid for disk automorphisms only (the arc propagation needs a circle
    homeomorphism). eps is the per-step gap target between the certified
    bound and the best sampled orbit sum; refinement stops early once it
    stalls, so rotation-like maps pay for a single pass.
    """
    sup_g = circle_sup_bound(w)
    min_g = circle_min_bound(w)
    ln_sup_g = math.log(sup_g) if sup_g > 0 else -math.inf
    ln_min_g = math.log(min_g) if min_g > 0 else -math.inf

    if f.is_identity():
        thetas = np.linspace(0.0, _TWO_PI, max(cells, 64), endpoint=False)
        lnw = _ln_abs_weight(w, np.exp(1j * thetas))
        return CocycleExtrema(n * ln_sup_g + n * _FLOAT_SLACK,
                              n * ln_min_g - n * _FLOAT_SLACK,
                              n * float(np.max(lnw)), n * float(np.min(lnw)),
                              n, True, 0)

    lam = _weight_log_lipschitz(w)

    fixed = _fixed_boundary_angles(f)
    angles = list(np.linspace(0.0, _TWO_PI, cells, endpoint=False))
    angles.extend(fixed)
    angles.extend(_cascade_angles(fixed, cells))
    P0 = np.unique(np.mod(np.asarray(sorted(angles)), _TWO_PI))

    S, T, birkhoff = _arc_pass_shared(w, f, n, P0, lam, ln_sup_g, ln_min_g)
    samp_sup = float(np.max(birkhoff))
    samp_min = float(np.min(birkhoff))

    L0 = np.mod(np.roll(P0, -1) - P0, _TWO_PI)
    queue = [[float(S[i]), float(T[i]), float(P0[i]), float(L0[i])]
             for i in range(len(P0))]

    rounds = 0
    prev_state = (math.inf, -math.inf)
    if math.isfinite(lam):
        while rounds < max_rounds:
            cert_sup = max(q[0] for q in queue)
            cert_min = min(q[1] for q in queue)
            if cert_sup >= prev_state[0] - 1e-12 and cert_min <= prev_state[1] + 1e-12:
                break  # refinement has stalled; the slack is structural
            prev_state = (cert_sup, cert_min)
            need_sup = cert_sup - samp_sup > eps * n
            need_min = samp_min - cert_min > eps * n and math.isfinite(cert_min)
            if not (need_sup or need_min):
                break
            picks: list[int] = []
            if need_sup:
                order = sorted(range(len(queue)), key=lambda i: -queue[i][0])
                picks.extend(order[:split_batch])
            if need_min:
                order = sorted(range(len(queue)), key=lambda i: queue[i][1])
                picks.extend(i for i in order[:split_batch] if i not in picks)
            picks = [i for i in picks if queue[i][3] > 1e-13]
            if not picks:
                break
            subs_a, subs_b = [], []
            for i in picks:
                a, length = queue[i][2], queue[i][3]
                subs_a.extend([a, a + 0.5 * length])
                subs_b.extend([a + 0.5 * length, a + length])
            Sp, Tp, birA, birB = _arc_pass_pairs(
                w, f, n, np.asarray(subs_a), np.asarray(subs_b), lam, ln_sup_g, ln_min_g)
            samp_sup = max(samp_sup, float(np.max(birA)), float(np.max(birB)))
            samp_min = min(samp_min, float(np.min(birA)), float(np.min(birB)))
            for i in sorted(picks, reverse=True):
                del queue[i]
            for j in range(len(subs_a)):
                queue.append([float(Sp[j]), float(Tp[j]), subs_a[j],
                              subs_b[j] - subs_a[j]])
            rounds += 1

    cert_sup = max(q[0] for q in queue) + n * _FLOAT_SLACK
    cert_min = min(q[1] for q in queue) - n * _FLOAT_SLACK
    return CocycleExtrema(cert_sup, cert_min, samp_sup, samp_min, n,
                          math.isfinite(lam), rounds)


def _is_blaschke_like(f) -> bool:
    return hasattr(f, "zeros") and hasattr(f, "phase")


def _power_cocycle_norm_bound(w: WeightPoly, d: int, phase: complex, n_max: int,
                              degree_cap: int = 1 << 20) -> float:
    """min over m of (coefficient 1-norm of the expanded cocycle)^{1/m}.

    Only for maps phase * z^d, where every w o phi^k stays polynomial.
    The 1-norm dominates the sup on the circle, so every term certifies.
    """
    best = circle_sup_bound(w)
    coeffs = w.as_array()
    deg = w.degree
    cur = np.array([1.0 + 0j])
    sigma = 1.0 + 0j
    stride = 1
    for m in range(1, n_max + 1):
        new_len = len(cur) + deg * stride
        if new_len - 1 > degree_cap:
            break
        fac = np.zeros(deg * stride + 1, dtype=complex)
        fac[::stride] = coeffs * sigma ** np.arange(deg + 1)
        cur = np.convolve(cur, fac)
        best = min(best, float(np.sum(np.abs(cur))) ** (1.0 / m))
        sigma = phase * sigma ** d
        stride *= d
    return best


def rho_upper_certified(probe: CocycleProbe, eps: float = 1e-3) -> float:
    """Certified upper bound for the outer radius lim (sup |w_n|)^{1/n}.

    Always at least as good as the one-step bound sup over the circle of
    |w|; for disk automorphisms and pure-power endomorphism maps the
    multi-step machinery tightens it. The returned value is the minimum
    over the computed step counts, so a caller walking n upward and
    keeping the running minimum gets a non-increasing certified bound.
    """
    w = probe.weight
    f = probe.map
    best = circle_sup_bound(w)
    if isinstance(f, MoebiusMap):
        if probe.n >= 2:
            res = certify_cocycle_extrema(w, f, probe.n, cells=probe.sample_grid,
                                          eps=eps)
            if math.isfinite(res.ln_sup):
                best = min(best, math.exp(res.ln_sup / probe.n))
    elif _is_blaschke_like(f):
        zeros = list(getattr(f, "zeros"))
        if all(abs(complex(z)) <= 1e-14 for z in zeros) and len(zeros) >= 1:
            best = min(best, _power_cocycle_norm_bound(
                w, len(zeros), complex(getattr(f, "phase")), probe.n))
        # general products keep the one-step bound: the boundary map is a
        # d-to-1 cover, so arcs wrap and the propagation bound is invalid
    return best


def rho_lower_periodic(weight: WeightPoly, map_, orbit: list[complex],
                       tol: float = 1e-9) -> float:
    """Geometric mean of |w| over a verified periodic boundary orbit.

    The point masses on a periodic orbit form an invariant measure, so
    this is a certified lower bound for the outer radius.
    """
    pts = [complex(p) for p in orbit]
    if not pts:
        raise ValueError("empty orbit")
    for p in pts:
        if abs(abs(p) - 1.0) > 1e-6:
            raise ValueError(f"orbit point {p} is not on the unit circle")
    for i, p in enumerate(pts):
        q = _apply_map(map_, p)
        target = pts[(i + 1) % len(pts)]
        if abs(q - target) > tol:
            raise ValueError(
                f"orbit verification failed at step {i}: |map(p) - next| = "
                f"{abs(q - target):.3e} > {tol:.1e}")
    mods = [abs(weight.eval(p)) for p in pts]
    if min(mods) < UNDERFLOW_FLOOR:
        return 0.0
    return math.exp(sum(math.log(m) for m in mods) / len(pts))


def birkhoff_extremes(weight: WeightPoly, map_, n: int, samples: int) -> tuple[float, float]:
    """(exp of min, exp of max) of the n-step orbit averages of ln|w|.

    Starting points are a deterministic uniform boundary grid; iterates are
    renormalized onto the circle each step so rounding cannot drift inward.
    """
    thetas = np.linspace(0.0, _TWO_PI, samples, endpoint=False)
    z = np.exp(1j * thetas)
    acc = np.zeros(samples)
    for _ in range(n):
        acc += _ln_abs_weight(weight, z)
        z = _apply_map(map_, z)
        z = z / np.abs(z)
    lo = float(np.min(acc)) / n
    hi = float(np.max(acc)) / n
    return (0.0 if lo == -math.inf else math.exp(lo),
            0.0 if hi == -math.inf else math.exp(hi))


def _composed_cocycle_min(weight: WeightPoly, f: MoebiusMap, m: int,
                          samples: int = 8192) -> float:
    """Refined min over the circle of |w_m|^{1/m} for an m-periodic map."""
    thetas = np.linspace(0.0, _TWO_PI, samples, endpoint=False)
    z = np.exp(1j * thetas)
    acc = np.zeros(samples)
    cur = z
    for _ in range(m):
        acc += _ln_abs_weight(weight, cur)
        cur = f.evaluate(cur)
        cur = cur / np.abs(cur)
    i = int(np.argmin(acc))
    h = _TWO_PI / samples

    def avg_at(t: float) -> float:
        zz = cmath.exp(1j * t)
        s = 0.0
        for _ in range(m):
            mod = abs(weight.eval(zz))
            if mod < UNDERFLOW_FLOOR:
                return -math.inf
            s += math.log(mod)
            zz = f.evaluate(zz)
            zz = zz / abs(zz)
        return s

    lo, hi = thetas[i] - h, thetas[i] + h
    best = min(avg_at(thetas[i]), float(acc[i]))
    for t in np.linspace(lo, hi, 33):
        best = min(best, avg_at(float(t)))
    return 0.0 if best == -math.inf else math.exp(best / m)


def rho_min_estimate(weight: WeightPoly, map_: MoebiusMap, n: int = 4096,
                     samples: int = 2048) -> tuple[float, float]:
    """Two-sided estimate of the inner radius lim (min |w_n|)^{1/n}.

    Fixed-point weight values are authoritative for parabolic and
    hyperbolic maps (every invariant boundary measure sits on the fixed
    points); rational rotations use the exact m-step minimum. For
    irrational rotations both sides come from sampled orbit averages and
    the result is an estimate in the strict sense.
    """
    try:
        cls = classify(map_)
    except AmbiguousRationalityError as exc:
        cls = exc.irrational_candidate
    closed: Optional[float] = None
    if isinstance(cls, Identity):
        closed = _composed_cocycle_min(weight, map_, 1)
    elif isinstance(cls, Hyperbolic):
        closed = min(abs(weight.eval(cls.zeta1)), abs(weight.eval(cls.zeta2)))
    elif isinstance(cls, Parabolic):
        closed = abs(weight.eval(cls.zeta))
    elif isinstance(cls, EllipticRational):
        closed = _composed_cocycle_min(weight, map_, cls.m)
    lo_avg, hi_avg = birkhoff_extremes(weight, map_, n, samples)
    if closed is None:
        return (min(lo_avg, hi_avg), max(lo_avg, hi_avg))
    return (min(closed, lo_avg), max(closed, lo_avg))
