"""Small dual-arithmetic helpers shared by the geometry and norm modules.

Functions here accept floats or Fractions and stay exact when given exact
inputs.  Converting a float to Fraction is exact (binary expansion), so the
rational mode reproduces whatever doubles the expression layer produced.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = [
    "as_number",
    "as_fraction",
    "null_direction",
    "canonical_ray",
]


def as_fraction(v) -> Fraction:
    return v if isinstance(v, Fraction) else Fraction(v)


def as_number(v, exact: bool):
    return as_fraction(v) if exact else float(v)


def null_direction(rows, n, exact: bool):
    """One-dimensional null space of a stack of row vectors, or None.

    rows: sequence of length-n sequences.  Returns a direction vector when
    the null space has dimension exactly one, else None.  Gaussian
    elimination with partial pivoting; exact mode uses Fractions and a zero
    tolerance.  Float results are checked against the original rows, since
    a nearly singular stack can slip past the pivot tolerance and emit a
    direction that annihilates nothing.
    """
    if exact:
        mat = [[as_fraction(v) for v in row] for row in rows]
        tol = Fraction(0)
    else:
        mat = [[float(v) for v in row] for row in rows]
        tol = 1e-11
    orig = [list(row) for row in mat]
    m = len(mat)
    pivot_cols = []
    r = 0
    for col in range(n):
        best = None
        best_abs = tol
        for i in range(r, m):
            a = abs(mat[i][col])
            if a > best_abs:
                best_abs = a
                best = i
        if best is None:
            continue
        mat[r], mat[best] = mat[best], mat[r]
        piv = mat[r][col]
        mat[r] = [v / piv for v in mat[r]]
        for i in range(m):
            if i != r and mat[i][col] != 0:
                f = mat[i][col]
                mat[i] = [a - f * b for a, b in zip(mat[i], mat[r])]
        pivot_cols.append(col)
        r += 1
        if r == m:
            break
    if n - r != 1:
        return None
    free = next(c for c in range(n) if c not in pivot_cols)
    zero = Fraction(0) if exact else 0.0
    one = Fraction(1) if exact else 1.0
    d = [zero] * n
    d[free] = one
    for i, col in enumerate(pivot_cols):
        d[col] = -mat[i][free]
    if not exact:
        d_sup = max(abs(v) for v in d)
        for row in orig:
            row_sup = max((abs(v) for v in row), default=0.0)
            if abs(sum(a * b for a, b in zip(row, d))) > 1e-8 * row_sup * d_sup:
                return None
    return d


def canonical_ray(d, exact: bool):
    """Scale a direction by a positive factor so its largest entry is +/-1.

    Positive scaling preserves the ray (and every evaluation sign along it),
    so this is a dedup key for directions: d and -d stay distinct, positive
    multiples collapse.  Sup-norm scaling keeps every component in [-1, 1],
    which the norm LP downstream relies on for conditioning.  Returns None
    for the zero vector.
    """
    lead = max(abs(v) for v in d) if d else None
    if not lead:
        return None
    scaled = [v / lead for v in d]
    if not exact:
        scaled = [float(v) for v in scaled]
    return scaled
