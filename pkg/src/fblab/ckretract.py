"""Sections of the evaluation map onto C(K) for K a finite union of
closed subintervals of [0,1].

Everything is built over two generators: "one" (the constant-1 function on
K, coordinate s) and "id" (the identity, coordinate t).  The evaluation map
sends a function on the cone over the dual to its restriction to the slice
points i(k) = (1, k); the section S goes the other way, from a piecewise
linear h on K to a positively homogeneous PL function Sh on (s,t)-space,
with T(Sh) = Sh(1, .) = h on K.

Construction, from inside out:

  v(s,t) = (1, clip(t/s, -1, 1))        ray-invariant retraction to the slice
  phi(c) = nearest point of K            defined off the gap midpoints
  u(c)   = min(1, alpha * dist(c, gap midpoints)), alpha = 2 / min gap

and Sh(x) = h(phi(c)) * u(c) * |s| with c = clip(t/s, 0, 1).  u is 1 on K
and vanishes exactly where phi jumps, so the product h(phi(c)) * u(c) is a
continuous piecewise-linear function of c (the slice function); multiplying
by |s| and unwinding c = t/s turns each linear segment a + b*c into the
homogeneous piece sign(s) * (a*s + b*t) on a cone of the (s,t) plane, which
is how build_section assembles Sh symbolically.  Special slices of K:

  full interval [0,1]: no gaps, u == 1, phi = clip, classic retraction;
  the pair {0,1}:       u(c) = |2c - 1|, phi = threshold at 1/2.

All breakpoint arithmetic is rational; float pieces are emitted unless
exact=True.  Verification helpers check the section identity T(Sh) = h, the
norm bound ||Sh|| <= sup|h| (over the two-generator space; reports flag the
restriction), the lattice-homomorphism laws of S, and the finite-coordinate
approximants f_n(x) = f_plus(v(x)) that are constant along rays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import plfan
from .expr import LinearFunctional
from .fblnorm import exact_fbl_norm, fbl_space
from .numeric import as_fraction

__all__ = [
    "KSpec",
    "TargetFunction",
    "SectionBundle",
    "CKError",
    "interval01",
    "two_points",
    "union_of_intervals",
    "target_from_pairs",
    "target_join",
    "target_lincomb",
    "sup_norm",
    "sample_K",
    "build_section",
    "verify_section",
    "verify_norm_bound",
    "verify_hom_laws",
    "finite_coordinate_approximant",
]

GENERATORS = ("one", "id")


class CKError(ValueError):
    pass


@dataclass(frozen=True)
class KSpec:
    """A finite union of closed subintervals of [0,1], kept sorted.

    Degenerate intervals (a == b) are single points, so the two-point space
    {0, 1} is the union [0,0] and [1,1].
    """

    kind: str
    intervals: tuple  # of (Fraction, Fraction) pairs

    def __post_init__(self):
        if not self.intervals:
            raise CKError("K must be nonempty")
        prev_b = None
        for a, b in self.intervals:
            if not (0 <= a <= b <= 1):
                raise CKError("intervals must satisfy 0 <= a <= b <= 1")
            if prev_b is not None and a <= prev_b:
                raise CKError("intervals must be disjoint and ascending")
            prev_b = b

    def contains(self, c) -> bool:
        return any(a <= c <= b for a, b in self.intervals)

    def gaps(self) -> tuple:
        out = []
        for (a1, b1), (a2, b2) in zip(self.intervals, self.intervals[1:]):
            out.append((b1, a2))
        return tuple(out)

    def project(self, c) -> Fraction:
        """Nearest point of K; ties at gap midpoints resolve to the left."""
        c = as_fraction(c)
        best = None
        best_d = None
        for a, b in self.intervals:
            p = min(max(c, a), b)
            d = abs(c - p)
            if best_d is None or d < best_d:
                best, best_d = p, d
        return best


def interval01() -> KSpec:
    return KSpec("interval01", ((Fraction(0), Fraction(1)),))


def two_points() -> KSpec:
    return KSpec("two_points", ((Fraction(0), Fraction(0)), (Fraction(1), Fraction(1))))


def union_of_intervals(pairs) -> KSpec:
    ivs = tuple(
        (as_fraction(a), as_fraction(b)) for a, b in sorted(pairs, key=lambda p: p[0])
    )
    return KSpec("union_of_intervals", ivs)


@dataclass(frozen=True)
class TargetFunction:
    """Piecewise-linear h on K: sorted (point, value) breakpoints.

    Every interval endpoint of K must appear as a breakpoint, every
    breakpoint must lie in K, and h is linear between neighbours inside an
    interval.  Values at points outside K are never requested directly;
    compositions go through the nearest-point projection.
    """

    K: KSpec
    breakpoints: tuple  # of (Fraction point, Fraction value), ascending

    def __post_init__(self):
        pts = [p for p, _ in self.breakpoints]
        if not pts or any(q <= p for p, q in zip(pts, pts[1:])):
            raise CKError("breakpoints must be ascending and nonempty")
        for p in pts:
            if not self.K.contains(p):
                raise CKError(f"breakpoint {p} lies outside K")
        have = set(pts)
        for a, b in self.K.intervals:
            if a not in have or b not in have:
                raise CKError("every K interval endpoint needs a breakpoint")

    def value(self, c) -> Fraction:
        c = as_fraction(c)
        pts = self.breakpoints
        if c <= pts[0][0]:
            return pts[0][1]
        for (p0, v0), (p1, v1) in zip(pts, pts[1:]):
            if p0 <= c <= p1:
                if c == p0:
                    return v0
                if c == p1:
                    return v1
                return v0 + (v1 - v0) * (c - p0) / (p1 - p0)
        return pts[-1][1]


def target_from_pairs(K: KSpec, pairs) -> TargetFunction:
    bps = tuple(
        sorted(((as_fraction(p), as_fraction(v)) for p, v in pairs), key=lambda t: t[0])
    )
    return TargetFunction(K, bps)


def sup_norm(h: TargetFunction) -> Fraction:
    return max(abs(v) for _, v in h.breakpoints)


def _merged_points(K: KSpec, h1: TargetFunction, h2: TargetFunction) -> list:
    pts = {p for p, _ in h1.breakpoints} | {p for p, _ in h2.breakpoints}
    return sorted(pts)


def target_join(h1: TargetFunction, h2: TargetFunction) -> TargetFunction:
    """max(h1, h2) as a TargetFunction; inserts segment crossing points."""
    if h1.K != h2.K:
        raise CKError("join needs a common K")
    pts = _merged_points(h1.K, h1, h2)
    out = set()
    for p in pts:
        out.add(p)
    for p0, p1 in zip(pts, pts[1:]):
        if not any(a <= p0 and p1 <= b for a, b in h1.K.intervals):
            continue
        d0 = h1.value(p0) - h2.value(p0)
        d1 = h1.value(p1) - h2.value(p1)
        if d0 * d1 < 0:
            out.add(p0 + (p1 - p0) * d0 / (d0 - d1))
    bps = tuple((p, max(h1.value(p), h2.value(p))) for p in sorted(out))
    return TargetFunction(h1.K, bps)


def target_lincomb(a, h1: TargetFunction, b, h2: TargetFunction) -> TargetFunction:
    if h1.K != h2.K:
        raise CKError("linear combination needs a common K")
    a = as_fraction(a)
    b = as_fraction(b)
    pts = _merged_points(h1.K, h1, h2)
    bps = tuple((p, a * h1.value(p) + b * h2.value(p)) for p in pts)
    return TargetFunction(h1.K, bps)


# ---------------------------------------------------------------------------
# the retraction data u, phi and the slice function


def _gap_data(K: KSpec):
    gaps = K.gaps()
    if not gaps:
        return (), None
    min_gap = min(a2 - b1 for b1, a2 in gaps)
    if min_gap == 0:
        raise CKError("touching intervals should be merged")
    return gaps, Fraction(2, 1) / min_gap


def _u_of_c(K: KSpec, c) -> Fraction:
    """1 on K, 0 exactly at gap midpoints, linear ramp of slope alpha between."""
    c = as_fraction(c)
    gaps, alpha = _gap_data(K)
    if not gaps:
        return Fraction(1)
    dist = min(abs(c - (b1 + a2) / 2) for b1, a2 in gaps)
    return min(Fraction(1), alpha * dist)


def _slice_breakpoints(K: KSpec, h: TargetFunction) -> list:
    pts = {Fraction(0), Fraction(1)}
    for p, _ in h.breakpoints:
        pts.add(p)
    for a, b in K.intervals:
        pts.add(a)
        pts.add(b)
    gaps, alpha = _gap_data(K)
    for b1, a2 in gaps:
        mid = (b1 + a2) / 2
        r = Fraction(1) / alpha
        pts.update((mid - r, mid, mid + r))
    return sorted(p for p in pts if 0 <= p <= 1)


def slice_table(K: KSpec, h: TargetFunction) -> tuple:
    """The slice function c -> h(phi(c)) * u(c) tabulated at its breakpoints.

    Linear between consecutive entries; this is what Sh restricts to on the
    ray slice, and what build_section unwinds into homogeneous pieces.
    """
    table = []
    for c in _slice_breakpoints(K, h):
        u = _u_of_c(K, c)
        val = Fraction(0) if u == 0 else h.value(K.project(c)) * u
        table.append((c, val))
    return tuple(table)


def _slice_value(table, c) -> Fraction:
    c = as_fraction(c)
    c = min(max(c, Fraction(0)), Fraction(1))
    for (c0, v0), (c1, v1) in zip(table, table[1:]):
        if c0 <= c <= c1:
            if c == c0:
                return v0
            if c == c1:
                return v1
            return v0 + (v1 - v0) * (c - c0) / (c1 - c0)
    return table[-1][1] if c >= table[-1][0] else table[0][1]


# ---------------------------------------------------------------------------
# the section bundle


@dataclass
class SectionBundle:
    K: KSpec
    h: TargetFunction
    generators: tuple
    Sh: plfan.PLFunction
    table: tuple  # slice breakpoint table
    h_sup: Fraction

    def v_eval(self, x) -> tuple:
        s, t = float(x[0]), float(x[1])
        if s != 0.0:
            w = min(max(t / s, -1.0), 1.0)
        else:
            w = 0.0 if t == 0 else math.copysign(1.0, t)
        return (1.0, w)

    def phi_eval(self, x) -> float:
        w = self.v_eval(x)[1]
        return float(self.K.project(min(max(w, 0.0), 1.0)))

    def u_eval(self, x) -> float:
        w = self.v_eval(x)[1]
        return float(_u_of_c(self.K, min(max(w, 0.0), 1.0)))

    def f_slice(self, w) -> float:
        """The slice function at id-coordinate w in [-1, 1]."""
        return float(_slice_value(self.table, w))

    def sh_value(self, x) -> float:
        return float(plfan.pl_value(self.Sh, (float(x[0]), float(x[1]))))


def build_section(K: KSpec, h: TargetFunction, exact: bool = False,
                  seed: int = 0) -> SectionBundle:
    """Assemble Sh symbolically as a PLFunction over ("one", "id").

    Fan hyperplanes: s, t, t - s, t + s, and t - c*s for every interior
    slice breakpoint c, so every clip corner and slice kink is a cell
    boundary.  On a cell with s-sign sigma the slice segment a + b*c turns
    into the piece sigma*(a*s + b*t); cells beyond the clip range use the
    constant slice values at 0 or 1.
    """
    if h.K != K:
        raise CKError("h is defined on a different K")
    table = slice_table(K, h)

    def num(v):
        return v if exact else float(v)

    normals = [
        LinearFunctional.from_map({"one": num(Fraction(1))}),
        LinearFunctional.from_map({"id": num(Fraction(1))}),
        LinearFunctional.from_map({"id": num(Fraction(1)), "one": num(Fraction(-1))}),
        LinearFunctional.from_map({"id": num(Fraction(1)), "one": num(Fraction(1))}),
    ]
    for c, _ in table:
        if 0 < c < 1:
            normals.append(
                LinearFunctional.from_map({"id": num(Fraction(1)), "one": num(-c)})
            )
    fan = plfan.arrangement_fan(normals, GENERATORS, seed=seed, exact=exact)

    pieces = []
    for cell in fan.cells:
        ws, wt = (as_fraction(cell.witness[0]), as_fraction(cell.witness[1]))
        sigma = 1 if ws > 0 else -1
        rho = wt / ws
        if rho <= 0:
            a, b = table[0][1], Fraction(0)
        elif rho >= 1:
            a, b = table[-1][1], Fraction(0)
        else:
            a = b = None
            for (c0, v0), (c1, v1) in zip(table, table[1:]):
                if c0 <= rho <= c1:
                    b = (v1 - v0) / (c1 - c0)
                    a = v0 - b * c0
                    break
            if a is None:
                raise CKError("cell ratio escaped the slice table")
        coeffs = {}
        if a != 0:
            coeffs["one"] = num(sigma * a)
        if b != 0:
            coeffs["id"] = num(sigma * b)
        pieces.append(LinearFunctional.from_map(coeffs))

    Sh = plfan.PLFunction(fan, tuple(pieces))
    return SectionBundle(
        K=K, h=h, generators=GENERATORS, Sh=Sh, table=table, h_sup=sup_norm(h)
    )


# ---------------------------------------------------------------------------
# verification


def sample_K(K: KSpec, rng, size: int) -> list:
    """size points of K: length-weighted over intervals, endpoints for points."""
    lengths = [float(b - a) for a, b in K.intervals]
    total = sum(lengths)
    out = []
    for _ in range(size):
        if total == 0.0:
            a, b = K.intervals[rng.integers(0, len(K.intervals))]
            out.append(float(a))
        else:
            u = rng.uniform(0.0, total)
            for (a, b), ln in zip(K.intervals, lengths):
                if u <= ln or (a, b) == K.intervals[-1]:
                    out.append(float(a) + min(u, ln))
                    break
                u -= ln
    return out


def verify_section(
    b: SectionBundle, samples: int = 1000, seed: int = 0, tol: float = 1e-12
) -> dict:
    """Check Sh(1, k) = h(k) at every breakpoint of h and `samples` points of K."""
    worst = 0.0
    failures = []
    ks = [float(p) for p, _ in b.h.breakpoints]
    ks += sample_K(b.K, np.random.default_rng(seed), samples)
    for k in ks:
        want = float(b.h.value(b.K.project(k)))
        got = b.sh_value((1.0, k))
        dev = abs(got - want)
        if dev > worst:
            worst = dev
        if dev > tol:
            failures.append({"k": k, "Sh": got, "h": want, "deviation": dev})
    return {
        "pass": not failures,
        "worst_deviation": worst,
        "checked": len(ks),
        "failures": failures[:10],
    }


def verify_norm_bound(b: SectionBundle, exact: bool = False) -> dict:
    """exact_fbl_norm(Sh) <= sup|h| + 1e-9, over the two-generator space.

    The norm is computed over the generators ("one", "id") only; reports
    carry a flag saying so.  Also samples the slice sup of f for reference.
    """
    space = fbl_space(GENERATORS)
    bracket = exact_fbl_norm(b.Sh, space, exact=exact)
    h_sup = float(b.h_sup)
    ws = np.linspace(-1.0, 1.0, 2001)
    slice_sup = max(abs(b.f_slice(w)) for w in ws)
    return {
        "pass": float(bracket.upper) <= h_sup + 1e-9,
        "norm_upper": float(bracket.upper),
        "norm_lower": float(bracket.lower),
        "h_sup": h_sup,
        "slice_sup": slice_sup,
        "two_generator_restriction": True,
        "bracket": bracket,
    }


def _dense_agree(f: plfan.PLFunction, g: plfan.PLFunction, samples: int,
                 seed: int, tol: float) -> float:
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-1.0, 1.0, (samples, 2))
    fv = plfan.pl_value_many(f, pts)
    gv = plfan.pl_value_many(g, pts)
    return float(np.max(np.abs(fv - gv))) if samples else 0.0


def verify_hom_laws(
    K: KSpec,
    pairs: Sequence,
    samples: int = 10_000,
    seed: int = 0,
    tol: float = 1e-12,
) -> dict:
    """S(h1 v h2) = S(h1) v S(h2) and S(2*h1 - h2) = 2*S(h1) - S(h2).

    Joins are built both ways: through the target functions (crossing
    breakpoints inserted) and through the PL pointwise max; equality is
    decided by pl_equal with a dense-sampling fallback report.
    """
    results = []
    for h1, h2 in pairs:
        b1 = build_section(K, h1, seed=seed)
        b2 = build_section(K, h2, seed=seed)
        bj = build_section(K, target_join(h1, h2), seed=seed)
        pmax = plfan.pl_pointwise_max(b1.Sh, b2.Sh)
        join_exact = plfan.pl_equal(bj.Sh, pmax)
        join_dev = _dense_agree(bj.Sh, pmax, samples, seed, tol)

        bl = build_section(K, target_lincomb(2, h1, -1, h2), seed=seed)
        plin = plfan.pl_lincomb(2.0, b1.Sh, -1.0, b2.Sh)
        lin_exact = plfan.pl_equal(bl.Sh, plin)
        lin_dev = _dense_agree(bl.Sh, plin, samples, seed, tol)

        results.append(
            {
                "join_pl_equal": bool(join_exact),
                "join_sample_dev": join_dev,
                "linear_pl_equal": bool(lin_exact),
                "linear_sample_dev": lin_dev,
                "pass": (join_exact or join_dev <= tol)
                and (lin_exact or lin_dev <= tol),
            }
        )
    return {"pass": all(r["pass"] for r in results), "pairs": results}


# ---------------------------------------------------------------------------
# finite-coordinate approximants


def finite_coordinate_approximant(
    f_slice: Callable, coords, grid: int
) -> dict:
    """Grid interpolant of the slice function, pulled back along v.

    coords is the generator subset the approximant may depend on; only
    "id" matters on the slice (the "one" coordinate is pinned to 1 there),
    so without it the approximant is the constant f_slice(0).  The pullback
    f_n(s,t) = f_plus(clip(t/s, -1, 1)) is constant along rays.  Returns
    the interpolant, the pullback, and the sampled sup deviation.
    """
    coords = tuple(coords)
    for c in coords:
        if c not in GENERATORS:
            raise CKError(f"unknown coordinate {c!r}")
    if grid < 2:
        raise CKError("grid must be at least 2")
    knots = np.linspace(-1.0, 1.0, grid)
    if "id" in coords:
        vals = np.array([float(f_slice(w)) for w in knots])

        def f_plus(w):
            return float(np.interp(min(max(float(w), -1.0), 1.0), knots, vals))

    else:
        const = float(f_slice(0.0))

        def f_plus(w):
            return const

    def f_n(x):
        s, t = float(x[0]), float(x[1])
        if s != 0.0:
            w = min(max(t / s, -1.0), 1.0)
        else:
            w = 0.0 if t == 0 else math.copysign(1.0, t)
        return f_plus(w)

    dense = np.linspace(-1.0, 1.0, 2001)
    deviation = max(abs(float(f_slice(w)) - f_plus(w)) for w in dense)
    return {
        "f_plus": f_plus,
        "f_n": f_n,
        "deviation": deviation,
        "grid": grid,
        "coords": coords,
    }
