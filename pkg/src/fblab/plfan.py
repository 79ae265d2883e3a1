"""Central hyperplane arrangements and piecewise-linear homogeneous functions.

A Fan is the cell complex of a central arrangement: every full-dimensional
cell is recorded as its sign vector over the (deduplicated, canonically
scaled) hyperplane list together with a strictly interior witness point in
the open cube.  A PLFunction attaches one linear piece per cell.

Cell discovery is randomized seeding plus completion: random samples propose
sign vectors, every candidate is confirmed by a small LP that also produces
the witness, and a breadth-first closure over single-sign flips finishes the
job.  After deduplication two adjacent cells of a central arrangement differ
in exactly one sign and the adjacency graph is connected, so the flip
closure reaches every cell regardless of what sampling found.  The result
is therefore independent of the seed; the seed only steers how discovery
proceeds.

Lower-dimensional faces are never materialized; evaluation on a boundary
picks any incident cell, which is safe because adjacent pieces agree there.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .expr import LinearFunctional, MaxMinForm
from .lp import OPTIMAL, solve_lp
from .numeric import as_fraction

__all__ = [
    "Cone",
    "Fan",
    "PLFunction",
    "FanError",
    "FanSizeError",
    "DegenerateNormalError",
    "canonical_normal",
    "dedup_normals",
    "arrangement_fan",
    "pl_from_maxmin",
    "sup_norm_on_cube",
    "refine_by_zero_set",
    "pl_equal",
    "pl_pointwise_max",
    "pl_lincomb",
    "pl_value",
    "pl_value_many",
    "locate_cell",
    "fan_to_json",
    "fan_from_json",
    "plfunction_to_json",
    "plfunction_from_json",
]

SIGN_TOL = 1e-9
_WITNESS_MIN_MARGIN = 1e-7
MAX_CELLS_DEFAULT = 100_000


class FanError(RuntimeError):
    pass


class FanSizeError(FanError):
    pass


class DegenerateNormalError(FanError):
    """A zero normal vector cannot define a hyperplane."""


@dataclass(frozen=True)
class Cone:
    """Full-dimensional cell: sign per hyperplane plus an interior witness."""

    signs: str
    witness: tuple


@dataclass(frozen=True)
class Fan:
    generators: tuple
    hyperplanes: tuple  # LinearFunctional normals, canonical and deduplicated
    cells: tuple  # Cone instances, sorted by sign string

    def normal_rows(self) -> np.ndarray:
        return np.array(
            [[float(c) for c in h.vector(self.generators)] for h in self.hyperplanes],
            dtype=float,
        ).reshape(len(self.hyperplanes), len(self.generators))


@dataclass(frozen=True)
class PLFunction:
    fan: Fan
    pieces: tuple  # LinearFunctional per cell, aligned with fan.cells


def canonical_normal(fn: LinearFunctional, exact: bool) -> LinearFunctional:
    """Scale so the first nonzero coefficient (generator-sorted) is +1.

    The items tuple of LinearFunctional is already sorted by generator name,
    so "first nonzero" is well defined.  Raises for the zero functional.
    """
    if fn.is_zero:
        raise DegenerateNormalError("zero normal")
    lead = fn.items[0][1]
    if exact:
        return LinearFunctional(
            tuple((g, as_fraction(c) / as_fraction(lead)) for g, c in fn.items)
        )
    lead = float(lead)
    return LinearFunctional(tuple((g, float(c) / lead) for g, c in fn.items))


def _normal_key(fn: LinearFunctional, exact: bool):
    if exact:
        return fn.items
    return tuple((g, round(c, 12)) for g, c in fn.items)


def dedup_normals(fns, exact: bool):
    """Canonicalize and deduplicate normals, keeping first-appearance order."""
    seen = {}
    out = []
    for fn in fns:
        cn = canonical_normal(fn, exact)
        key = _normal_key(cn, exact)
        if key not in seen:
            seen[key] = True
            out.append(cn)
    return out


def _witness_lp(normal_vectors, signs, n, exact):
    """Search for x in the open cone with the given signs.

    Maximizes the worst signed margin t subject to x in the cube and t <= 1;
    the cone is scale invariant, so strict feasibility is equivalent to a
    positive optimum.  Returns (witness tuple, margin) or (None, margin).
    """
    rows = []
    for vec, s in zip(normal_vectors, signs):
        sgn = 1 if s == "+" else -1
        rows.append([-sgn * v for v in vec] + [1])
    c = [0] * n + [1]
    bounds = [(-1, 1)] * n + [(None, 1)]
    res = solve_lp(
        c,
        A_ub=rows,
        b_ub=[0] * len(rows),
        bounds=bounds,
        maximize=True,
        exact=exact,
    )
    if res.status != OPTIMAL:
        return None, None
    margin = res.value
    threshold = 0 if exact else _WITNESS_MIN_MARGIN
    if margin <= threshold:
        return None, margin
    half = Fraction(1, 2) if exact else 0.5
    witness = tuple(v * half for v in res.x[:n])
    return witness, margin


def arrangement_fan(
    normals,
    generators,
    seed: int = 0,
    exact: bool = False,
    max_cells: int = MAX_CELLS_DEFAULT,
) -> Fan:
    """Fan of the central arrangement of the given normals.

    Raises DegenerateNormalError on a zero normal and FanSizeError past the
    cell cap.  Deterministic: the discovered cell set does not depend on the
    seed, and witnesses come from the LP alone.
    """
    generators = tuple(generators)
    n = len(generators)
    if n == 0:
        raise FanError("need at least one generator")
    hyps = dedup_normals(normals, exact)
    h = len(hyps)
    if h == 0:
        half = Fraction(1, 2) if exact else 0.5
        witness = tuple([half] * n)
        return Fan(generators, (), (Cone("", witness),))

    vectors = [list(hp.vector(generators)) for hp in hyps]
    float_rows = np.array(
        [[float(v) for v in row] for row in vectors], dtype=float
    )
    unit_rows = float_rows / np.linalg.norm(float_rows, axis=1, keepdims=True)

    rng = np.random.default_rng(seed)
    n_samples = min(50 * 3**h, 20_000)
    samples = rng.standard_normal((n_samples, n))
    margins = samples @ unit_rows.T
    keep = np.abs(margins).min(axis=1) > 1e-6
    sign_matrix = margins[keep] > 0

    candidates = sorted(
        {"".join("+" if s else "-" for s in row) for row in sign_matrix}
    )

    cells = {}
    rejected = set()
    queue = list(candidates)
    qi = 0
    while qi < len(queue):
        signs = queue[qi]
        qi += 1
        if signs in cells or signs in rejected:
            continue
        witness, _ = _witness_lp(vectors, signs, n, exact)
        if witness is None:
            rejected.add(signs)
            continue
        cells[signs] = witness
        if len(cells) > max_cells:
            raise FanSizeError(f"cell count exceeds cap {max_cells}")
        for k in range(h):
            flipped = signs[:k] + ("-" if signs[k] == "+" else "+") + signs[k + 1 :]
            if flipped not in cells and flipped not in rejected:
                queue.append(flipped)

    if not cells:
        raise FanError("no cell survived confirmation; degenerate input")

    cones = tuple(Cone(s, cells[s]) for s in sorted(cells))
    return Fan(generators, tuple(hyps), cones)


def _exactify(fn: LinearFunctional) -> LinearFunctional:
    return LinearFunctional(tuple((g, as_fraction(c)) for g, c in fn.items))


def pl_from_maxmin(
    m: MaxMinForm,
    generators,
    seed: int = 0,
    exact: bool = False,
    max_cells: int = MAX_CELLS_DEFAULT,
) -> PLFunction:
    """PLFunction over the arrangement of all pairwise difference normals.

    On a cell's interior all differences have strict signs, so group minima
    and the overall maximum are attained by fixed functionals; the piece is
    read off at the witness.  Adjacent pieces agree on shared boundaries by
    continuity of the max-min value.
    """
    generators = tuple(generators)
    if exact:
        m = MaxMinForm(tuple(tuple(_exactify(f) for f in g) for g in m.groups))
    funcs = m.functionals()
    diffs = []
    for i in range(len(funcs)):
        for j in range(i + 1, len(funcs)):
            d = funcs[i].minus(funcs[j])
            if not d.is_zero:
                diffs.append(d)
    fan = arrangement_fan(diffs, generators, seed=seed, exact=exact, max_cells=max_cells)
    pieces = []
    for cell in fan.cells:
        point = dict(zip(generators, cell.witness))
        best = None
        best_val = None
        for group in m.groups:
            gmin = None
            gmin_f = None
            for f in group:
                v = f.evaluate(point)
                if gmin is None or v < gmin:
                    gmin = v
                    gmin_f = f
            if best_val is None or gmin > best_val:
                best_val = gmin
                best = gmin_f
        pieces.append(best)
    return PLFunction(fan, tuple(pieces))


def _cell_sign_rows(fan: Fan, cell: Cone):
    """Inequality rows stating membership in the closed cell."""
    rows = []
    for hp, s in zip(fan.hyperplanes, cell.signs):
        vec = hp.vector(fan.generators)
        sgn = 1 if s == "+" else -1
        rows.append([-sgn * v for v in vec])
    return rows


def sup_norm_on_cube(f: PLFunction, exact: bool = False):
    """max |f| over the closed cube, via two LPs per cell.

    Each LP maximizes +/- piece over (closed cell) intersect cube.  Cells
    cover the cube, every LP is feasible (the witness) and bounded (the
    cube), so infeasibility or unboundedness signals a fan bug and raises.
    The per-cell results are reduced with max, which is order independent.
    """
    fan = f.fan
    n = len(fan.generators)
    best = Fraction(0) if exact else 0.0
    for cell, piece in zip(fan.cells, f.pieces):
        rows = _cell_sign_rows(fan, cell)
        b = [0] * len(rows)
        vec = list(piece.vector(fan.generators))
        for sign in (1, -1):
            c = [sign * v for v in vec]
            res = solve_lp(
                c,
                A_ub=rows,
                b_ub=b,
                bounds=[(-1, 1)] * n,
                maximize=True,
                exact=exact,
            )
            if res.status != OPTIMAL:
                raise FanError(f"cell LP unexpectedly {res.status}")
            if res.value > best:
                best = res.value
    return best


def _point_signs(fan: Fan, point, exact: bool):
    chars = []
    pd = dict(zip(fan.generators, point))
    tol = 0 if exact else SIGN_TOL
    for hp in fan.hyperplanes:
        v = hp.evaluate(pd)
        if v > tol:
            chars.append("+")
        elif v < -tol:
            chars.append("-")
        else:
            chars.append("0")
    return "".join(chars)


def locate_cell(f_or_fan, point, exact: bool = False) -> int:
    """Index of a cell whose closure contains the point.

    Boundary points (sign '0' somewhere) match several cells; the first one
    in canonical order is returned, which is safe for evaluation because
    incident pieces agree on the boundary.
    """
    fan = f_or_fan.fan if isinstance(f_or_fan, PLFunction) else f_or_fan
    s = _point_signs(fan, point, exact)
    for idx, cell in enumerate(fan.cells):
        ok = True
        for ch, cch in zip(s, cell.signs):
            if ch != "0" and ch != cch:
                ok = False
                break
        if ok:
            return idx
    raise FanError(f"no cell contains point {point!r}; fan incomplete")


def pl_value(f: PLFunction, point, exact: bool = False):
    idx = locate_cell(f, point, exact)
    pd = dict(zip(f.fan.generators, point))
    return f.pieces[idx].evaluate(pd)


def pl_value_many(f: PLFunction, points: np.ndarray) -> np.ndarray:
    """Vectorized float evaluation at many points (rows)."""
    fan = f.fan
    pts = np.asarray(points, dtype=float)
    n_pts = pts.shape[0]
    out = np.full(n_pts, np.nan)
    if len(fan.hyperplanes) == 0:
        vec = np.array([float(c) for c in f.pieces[0].vector(fan.generators)])
        return pts @ vec
    margins = pts @ fan.normal_rows().T
    unassigned = np.ones(n_pts, dtype=bool)
    for cell, piece in zip(fan.cells, f.pieces):
        if not unassigned.any():
            break
        mask = unassigned.copy()
        for k, s in enumerate(cell.signs):
            if s == "+":
                mask &= margins[:, k] >= -SIGN_TOL
            else:
                mask &= margins[:, k] <= SIGN_TOL
            if not mask.any():
                break
        if mask.any():
            vec = np.array([float(c) for c in piece.vector(fan.generators)])
            out[mask] = pts[mask] @ vec
            unassigned &= ~mask
    if unassigned.any():
        raise FanError("points not covered by any cell; fan incomplete")
    return out


def refine_by_zero_set(
    f: PLFunction,
    seed: int = 0,
    exact: bool = False,
    max_cells: int = MAX_CELLS_DEFAULT,
) -> PLFunction:
    """Refine the fan so f has one strict sign per cell.

    Adds the zero hyperplane of every nonzero piece, rebuilds the fan, and
    carries each piece over to the new cells it covers.  Values are
    unchanged everywhere.
    """
    extra = [p for p in f.pieces if not p.is_zero]
    normals = list(f.fan.hyperplanes) + extra
    fan2 = arrangement_fan(
        normals, f.fan.generators, seed=seed, exact=exact, max_cells=max_cells
    )
    pieces = []
    for cell in fan2.cells:
        idx = locate_cell(f, cell.witness, exact)
        pieces.append(f.pieces[idx])
    return PLFunction(fan2, tuple(pieces))


def _pieces_equal(a: LinearFunctional, b: LinearFunctional, exact: bool) -> bool:
    d = a.minus(b)
    if exact:
        return d.is_zero
    return all(abs(c) <= 1e-9 for _, c in d.items)


def pl_equal(f: PLFunction, g: PLFunction, exact: bool = False) -> bool:
    """Equality as functions, decided on a common refinement.

    Both inputs must live over the same ordered generator tuple.  On every
    cell of the joint arrangement the two pieces are compared coefficient
    by coefficient (exactly in rational mode, within 1e-9 per coefficient in
    float mode).
    """
    if f.fan.generators != g.fan.generators:
        raise FanError("pl_equal needs a shared generator tuple")
    normals = list(f.fan.hyperplanes) + list(g.fan.hyperplanes)
    if not normals:
        return _pieces_equal(f.pieces[0], g.pieces[0], exact)
    fan = arrangement_fan(normals, f.fan.generators, exact=exact)
    for cell in fan.cells:
        pf = f.pieces[locate_cell(f, cell.witness, exact)]
        pg = g.pieces[locate_cell(g, cell.witness, exact)]
        if not _pieces_equal(pf, pg, exact):
            return False
    return True


def pl_pointwise_max(f: PLFunction, g: PLFunction, exact: bool = False) -> PLFunction:
    """Pointwise maximum of two PLFunctions over a joint refinement.

    The refinement includes every difference of an f piece and a g piece, so
    the larger function is constant per cell and can be read at the witness.
    """
    if f.fan.generators != g.fan.generators:
        raise FanError("pl_pointwise_max needs a shared generator tuple")
    normals = list(f.fan.hyperplanes) + list(g.fan.hyperplanes)
    for pf in f.pieces:
        for pg in g.pieces:
            d = pf.minus(pg)
            if not d.is_zero:
                normals.append(d)
    fan = arrangement_fan(normals, f.fan.generators, exact=exact)
    pieces = []
    for cell in fan.cells:
        pd = dict(zip(fan.generators, cell.witness))
        pf = f.pieces[locate_cell(f, cell.witness, exact)]
        pg = g.pieces[locate_cell(g, cell.witness, exact)]
        pieces.append(pf if pf.evaluate(pd) >= pg.evaluate(pd) else pg)
    return PLFunction(fan, tuple(pieces))


def pl_lincomb(a, f: PLFunction, b, g: PLFunction, exact: bool = False) -> PLFunction:
    """a*f + b*g as a PLFunction on the joint fan."""
    if f.fan.generators != g.fan.generators:
        raise FanError("pl_lincomb needs a shared generator tuple")
    normals = list(f.fan.hyperplanes) + list(g.fan.hyperplanes)
    fan = arrangement_fan(normals, f.fan.generators, exact=exact)
    pieces = []
    for cell in fan.cells:
        pf = f.pieces[locate_cell(f, cell.witness, exact)]
        pg = g.pieces[locate_cell(g, cell.witness, exact)]
        pieces.append(pf.scaled(a).plus(pg.scaled(b)))
    return PLFunction(fan, tuple(pieces))


# ---------------------------------------------------------------------------
# JSON encoding


def _num_to_json(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}"
    return float(v)


def _num_from_json(v):
    if isinstance(v, str):
        num, den = v.split("/")
        return Fraction(int(num), int(den))
    return float(v)


def _functional_to_json(fn: LinearFunctional) -> dict:
    return {g: _num_to_json(c) for g, c in fn.items}


def _functional_from_json(obj) -> LinearFunctional:
    return LinearFunctional.from_map({g: _num_from_json(c) for g, c in obj.items()})


def fan_to_json(fan: Fan) -> dict:
    return {
        "generators": list(fan.generators),
        "hyperplanes": [_functional_to_json(h) for h in fan.hyperplanes],
        "cells": [
            {"signs": c.signs, "witness": [_num_to_json(v) for v in c.witness]}
            for c in fan.cells
        ],
    }


def fan_from_json(obj) -> Fan:
    return Fan(
        tuple(obj["generators"]),
        tuple(_functional_from_json(h) for h in obj["hyperplanes"]),
        tuple(
            Cone(c["signs"], tuple(_num_from_json(v) for v in c["witness"]))
            for c in obj["cells"]
        ),
    )


def plfunction_to_json(f: PLFunction) -> dict:
    out = fan_to_json(f.fan)
    out["pieces"] = [_functional_to_json(p) for p in f.pieces]
    return out


def plfunction_from_json(obj) -> PLFunction:
    fan = fan_from_json(obj)
    return PLFunction(fan, tuple(_functional_from_json(p) for p in obj["pieces"]))
