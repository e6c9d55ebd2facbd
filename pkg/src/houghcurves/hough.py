"""Hough-transform polynomials, the generic ordered support, and the
HT-matrix whose rank gives the algebraic point-count bound.

Matrix entries inherit the numeric type of the point coordinates:
rational (or otherwise exact) coordinates give exact entries and exact
Gaussian elimination; float coordinates fall back to elimination with a
relative pivot threshold.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from fractions import Fraction

from .errors import DegeneratePointError
from .families import FamilyDefinition, ImagePoint, MonomialExp, nu_opt
from .poly import NEG_INF

# Relative pivot threshold for float-mode rank decisions.
EPS_RANK = 1e-9


@dataclass(frozen=True)
class HoughPoly:
    """Polynomial f_p cutting out the Hough transform of one point."""

    owner: str
    point: ImagePoint
    coeffs: dict  # MonomialExp -> coefficient value (nonzero)
    h: int        # total degree of the highest surviving monomial

    def degree_drops_below(self, generic_h: int) -> bool:
        return self.h < generic_h


def hough_poly(fam: FamilyDefinition, p: ImagePoint) -> HoughPoly:
    """Coefficients of f_p over the family's parameter monomials.

    Raises DegeneratePointError when every coefficient vanishes, i.e.
    when p is an affine base point whose transform is the whole
    parameter space.
    """
    coeffs = {}
    for mono, poly in fam.terms:
        c = poly(p.x, p.y)
        if c != 0:
            coeffs[mono] = c
    if not coeffs:
        raise DegeneratePointError(
            f"point ({p.x}, {p.y}) is an affine base point of {fam.name}: "
            "all Hough coefficients vanish"
        )
    return HoughPoly(
        owner=fam.name,
        point=p,
        coeffs=coeffs,
        h=max(m.total_degree for m in coeffs),
    )


@dataclass(frozen=True)
class OrderedSupport:
    """Homogenized parameter monomials shared by generic points.

    Exponent vectors have length t+1 with the homogenizing variable L0
    prepended; all share total degree h.  They are listed descending in
    the degree-lexicographic order with Lt < ... < L1 < L0 (the paper
    prints its example matrices with the columns reversed; rank is
    unaffected).
    """

    monomials: tuple[tuple[int, ...], ...]
    h: int
    var_names: tuple[str, ...]

    @property
    def s(self) -> int:
        return len(self.monomials)

    def labels(self) -> list[str]:
        out = []
        for mono in self.monomials:
            parts = []
            for name, e in zip(self.var_names, mono):
                if e == 1:
                    parts.append(name)
                elif e > 1:
                    parts.append(f"{name}^{e}")
            out.append("*".join(parts) if parts else "1")
        return out


def generic_support(fam: FamilyDefinition) -> OrderedSupport:
    """Support of f_p for p in the invariance-degree open set U1."""
    live = [(mono, poly) for mono, poly in fam.terms if not poly.is_zero()]
    if not live:
        raise ValueError(f"family {fam.name} has no nonzero terms")
    h = max(mono.total_degree for mono, _ in live)
    vectors = [
        (h - mono.total_degree,) + mono.exponents for mono, _ in live
    ]
    vectors.sort(reverse=True)
    return OrderedSupport(
        monomials=tuple(vectors),
        h=h,
        var_names=("L0",) + fam.param_names,
    )


@dataclass(frozen=True)
class HTMatrix:
    """nu x s matrix of homogenized Hough coefficients over the support."""

    support: OrderedSupport
    rows: tuple[tuple, ...]
    points: tuple[ImagePoint, ...]

    @property
    def shape(self) -> tuple[int, int]:
        return (len(self.rows), self.support.s)

    def is_exact(self) -> bool:
        return all(
            isinstance(v, (int, Fraction)) for row in self.rows for v in row
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        buf.write(",".join(self.support.labels()) + "\n")
        for row in self.rows:
            buf.write(",".join(_fmt_entry(v) for v in row) + "\n")
        return buf.getvalue()


def _fmt_entry(v) -> str:
    if isinstance(v, Fraction):
        return str(v) if v.denominator != 1 else str(v.numerator)
    return repr(v)


def ht_matrix(fam: FamilyDefinition, points) -> HTMatrix:
    """Assemble the HT-matrix for points in the open set U1.

    Points whose transform degenerates (all coefficients zero) or drops
    below the generic degree h are rejected, naming the offending index.
    """
    points = tuple(points)
    if not points:
        raise ValueError("at least one point is required")
    support = generic_support(fam)
    col_of = {mono[1:]: k for k, mono in enumerate(support.monomials)}
    rows = []
    for idx, p in enumerate(points):
        try:
            hp = hough_poly(fam, p)
        except DegeneratePointError as exc:
            raise DegeneratePointError(
                f"point #{idx} is degenerate: {exc}", index=idx
            ) from None
        if hp.h < support.h:
            raise DegeneratePointError(
                f"point #{idx} ({p.x}, {p.y}) falls outside the invariance-"
                f"degree open set: transform degree {hp.h} < generic {support.h}",
                index=idx,
            )
        row = [0] * support.s
        for mono, c in hp.coeffs.items():
            row[col_of[mono.exponents]] = c
        rows.append(tuple(row))
    return HTMatrix(support=support, rows=tuple(rows), points=points)


# --- rank computations ---------------------------------------------------


def rank_exact(rows) -> int:
    """Rank over Q by fraction-free-ish Gaussian elimination."""
    m = [[Fraction(v) for v in row] for row in rows]
    if not m:
        return 0
    n_rows, n_cols = len(m), len(m[0])
    rank = 0
    piv_r = 0
    for c in range(n_cols):
        pivot = None
        for r in range(piv_r, n_rows):
            if m[r][c] != 0:
                pivot = r
                break
        if pivot is None:
            continue
        m[piv_r], m[pivot] = m[pivot], m[piv_r]
        pv = m[piv_r][c]
        for r in range(piv_r + 1, n_rows):
            if m[r][c] != 0:
                factor = m[r][c] / pv
                for k in range(c, n_cols):
                    m[r][k] -= factor * m[piv_r][k]
        piv_r += 1
        rank += 1
        if piv_r == n_rows:
            break
    return rank


def rank_float(rows, eps: float = EPS_RANK) -> int:
    """Rank with partial pivoting; pivots below eps * max|entry| count as zero."""
    m = [[float(v) for v in row] for row in rows]
    if not m:
        return 0
    n_rows, n_cols = len(m), len(m[0])
    scale = max((abs(v) for row in m for v in row), default=0.0)
    if scale == 0.0:
        return 0
    tol = eps * scale
    rank = 0
    piv_r = 0
    for c in range(n_cols):
        pivot = max(range(piv_r, n_rows), key=lambda r: abs(m[r][c]), default=None)
        if pivot is None or abs(m[pivot][c]) <= tol:
            continue
        m[piv_r], m[pivot] = m[pivot], m[piv_r]
        pv = m[piv_r][c]
        for r in range(piv_r + 1, n_rows):
            if m[r][c] != 0.0:
                factor = m[r][c] / pv
                for k in range(c, n_cols):
                    m[r][k] -= factor * m[piv_r][k]
        piv_r += 1
        rank += 1
        if piv_r == n_rows:
            break
    return rank


def nu_best(m: HTMatrix, eps: float = EPS_RANK) -> int:
    """Algebraic bound: the rank of the HT-matrix."""
    if m.is_exact():
        return rank_exact(m.rows)
    return rank_float(m.rows, eps)


def select_generator_rows(m: HTMatrix, eps: float = EPS_RANK) -> list[int]:
    """Greedy first maximal independent set of rows, in input order.

    The length equals nu_best(m); the returned indices identify the
    transforms generating the whole ideal of the point set.
    """
    exact = m.is_exact()
    basis: list[list] = []
    chosen: list[int] = []
    scale = max((abs(float(v)) for row in m.rows for v in row), default=0.0)
    tol = eps * scale
    for idx, row in enumerate(m.rows):
        vec = [Fraction(v) for v in row] if exact else [float(v) for v in row]
        for b in basis:
            # eliminate with the pivot of b
            pc = next(k for k, v in enumerate(b) if v != 0)
            if vec[pc] != 0:
                factor = vec[pc] / b[pc]
                for k in range(len(vec)):
                    vec[k] -= factor * b[k]
        if exact:
            nonzero = any(v != 0 for v in vec)
        else:
            nonzero = any(abs(v) > tol for v in vec)
            if nonzero:
                # snap sub-threshold residue to zero so later pivots are sound
                vec = [0.0 if abs(v) <= tol else v for v in vec]
        if nonzero:
            basis.append(vec)
            chosen.append(idx)
    return chosen


def nu_best_prime(fam: FamilyDefinition) -> int:
    """Cheap surrogate bound min(s - 1, nu_opt)."""
    return min(generic_support(fam).s - 1, nu_opt(fam))
