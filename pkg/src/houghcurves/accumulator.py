"""Discretized 2-parameter region with Hough-transform voting.

The voting rule rasterizes each point's trace column by column: for
every cell column along the first parameter axis, the trace's second-
parameter values are bracketed over the column's own a-extent (sampled
at both edges, nudged outward by a hair, plus the center) and every
cell row met by that bracket receives one vote.  A point therefore
votes any cell at most once, which makes accumulation order-independent
and parallel merges exact.

The outward nudge (kappa) makes traces passing exactly through a cell
corner vote all adjacent cells instead of falling to one side by a
floating-point residue; it is far smaller than a cell, so it never adds
a row the trace does not essentially touch.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import NoSignalError
from .families import FamilyDefinition, ImagePoint, ParamPoint

# Outward sampling nudge, relative to the column width.
KAPPA = 2.0**-20
# Point block size for the vectorized accumulation.
BLOCK = 512


@dataclass(frozen=True)
class GridSpec:
    """Rectangular discretization of a 2-parameter region.

    Cell (i, j) covers [a_min + i*da, a_min + (i+1)*da) x [...] and has
    center (a_min + (i+0.5)*da, b_min + (j+0.5)*db).
    """

    a_min: float
    a_max: float
    da: float
    b_min: float
    b_max: float
    db: float
    n_a: int
    n_b: int

    def cell_center(self, i: int, j: int) -> tuple[float, float]:
        return (self.a_min + (i + 0.5) * self.da, self.b_min + (j + 0.5) * self.db)

    def cell_index(self, a: float, b: float) -> tuple[int, int]:
        """Floor arithmetic shared with the voting rasterization."""
        return (
            int(math.floor((a - self.a_min) / self.da)),
            int(math.floor((b - self.b_min) / self.db)),
        )

    def contains(self, a: float, b: float) -> bool:
        i, j = self.cell_index(a, b)
        return 0 <= i < self.n_a and 0 <= j < self.n_b


def build_grid(
    a_min: float, a_max: float, da: float, b_min: float, b_max: float, db: float
) -> GridSpec:
    """GridSpec with cell counts N = floor((max - min) / delta)."""
    if da <= 0 or db <= 0:
        raise ValueError("cell sizes must be positive")
    if a_max <= a_min or b_max <= b_min:
        raise ValueError("parameter ranges must be nonempty")
    n_a = int(math.floor((a_max - a_min) / da))
    n_b = int(math.floor((b_max - b_min) / db))
    if n_a < 1 or n_b < 1:
        raise ValueError("ranges must span at least one cell")
    return GridSpec(a_min, a_max, da, b_min, b_max, db, n_a, n_b)


def centered_grid(
    a_min: float, a_max: float, da: float, b_min: float, b_max: float, db: float
) -> GridSpec:
    """Grid whose cells are centered on the lattice min + k*delta.

    Cell counts come from the floor formula on the raw bounds; the cell
    boundaries are then shifted by half a cell so every lattice value
    (in particular a ground-truth parameter chosen on the lattice, as in
    the reference experiments) sits at a cell center instead of on a
    knife-edge corner.
    """
    raw = build_grid(a_min, a_max, da, b_min, b_max, db)
    return GridSpec(
        a_min - da / 2.0,
        a_max - da / 2.0,
        da,
        b_min - db / 2.0,
        b_max - db / 2.0,
        db,
        raw.n_a,
        raw.n_b,
    )


def grid_for_family(fam: FamilyDefinition, centered: bool = True) -> GridSpec:
    """Family's default grid; centered grids are used by the experiments."""
    if fam.t != 2:
        raise ValueError(f"accumulator grids are 2-parameter; {fam.name} has t={fam.t}")
    (a_min, a_max, da), (b_min, b_max, db) = fam.param_region
    maker = centered_grid if centered else build_grid
    return maker(a_min, a_max, da, b_min, b_max, db)


@dataclass
class AccumulatorGrid:
    """Integer vote counts over a GridSpec."""

    spec: GridSpec
    counts: np.ndarray = field(default=None)
    skipped_degenerate: int = 0

    def __post_init__(self):
        if self.counts is None:
            self.counts = np.zeros((self.spec.n_a, self.spec.n_b), dtype=np.int32)
        else:
            self.counts = np.asarray(self.counts, dtype=np.int32)
            if self.counts.shape != (self.spec.n_a, self.spec.n_b):
                raise ValueError("counts shape does not match the grid spec")

    def copy(self) -> "AccumulatorGrid":
        return AccumulatorGrid(
            self.spec, self.counts.copy(), self.skipped_degenerate
        )

    def merge(self, other: "AccumulatorGrid") -> "AccumulatorGrid":
        if other.spec != self.spec:
            raise ValueError("cannot merge grids with different specs")
        self.counts += other.counts
        self.skipped_degenerate += other.skipped_degenerate
        return self

    def to_csv(self) -> str:
        buf = io.StringIO()
        for row in self.counts:
            buf.write(",".join(str(int(v)) for v in row) + "\n")
        return buf.getvalue()


def _poly_eval_arrays(poly, xs: np.ndarray, ys: np.ndarray) -> np.ndarray:
    out = np.zeros_like(xs, dtype=np.float64)
    for (i, j), c in poly.terms.items():
        out += float(c) * xs**i * ys**j
    return out


def _last_param_coefficients(fam: FamilyDefinition, xs, ys):
    """Coefficient arrays of f as alpha(a)*B + beta(a) per point.

    Requires every parameter monomial to be at most linear in the last
    parameter; returns (alpha, beta) with shape (deg_a + 1, n).
    """
    deg_a = max(m.exponents[0] for m, _ in fam.terms)
    alpha = np.zeros((deg_a + 1, len(xs)))
    beta = np.zeros((deg_a + 1, len(xs)))
    for mono, poly in fam.terms:
        m_a, m_b = mono.exponents
        if m_b not in (0, 1):
            raise ValueError(
                f"{fam.name} is not linear in its last parameter (monomial {mono.exponents})"
            )
        target = alpha if m_b == 1 else beta
        target[m_a] += _poly_eval_arrays(poly, xs, ys)
    return alpha, beta


def _poly_in_a(coeffs: np.ndarray, avals: np.ndarray) -> np.ndarray:
    """Evaluate per-point polynomials in a at all sample values.

    coeffs has shape (k, n); returns (n, len(avals)).
    """
    powers = avals[None, :] ** np.arange(coeffs.shape[0])[:, None]
    return coeffs.T @ powers


def _trace_row_intervals(fam: FamilyDefinition, spec: GridSpec, xs, ys):
    """Per point and per column: the [jlo, jhi] row interval the trace
    covers, plus a keep mask.  Degenerate points (all coefficients zero)
    are reported separately and cover nothing."""
    n = len(xs)
    alpha, beta = _last_param_coefficients(fam, xs, ys)
    degenerate = (np.abs(alpha).sum(axis=0) == 0.0) & (np.abs(beta).sum(axis=0) == 0.0)

    kappa = KAPPA * spec.da
    edges = spec.a_min + spec.da * np.arange(spec.n_a + 1)
    centers = spec.a_min + spec.da * (np.arange(spec.n_a) + 0.5)
    sample_sets = (edges[:-1] - kappa, centers, edges[1:] + kappa)

    vlo = np.full((n, spec.n_a), np.inf)
    vhi = np.full((n, spec.n_a), -np.inf)
    valid = np.ones((n, spec.n_a), dtype=bool)
    for avals in sample_sets:
        a_num = _poly_in_a(alpha, avals)
        b_num = _poly_in_a(beta, avals)
        with np.errstate(divide="ignore", invalid="ignore"):
            bvals = -b_num / a_num
        ok = np.isfinite(bvals)
        valid &= ok
        bsafe = np.where(ok, bvals, 0.0)
        np.minimum(vlo, np.where(ok, bsafe, np.inf), out=vlo)
        np.maximum(vhi, np.where(ok, bsafe, -np.inf), out=vhi)

    f_lo = (vlo - spec.b_min) / spec.db
    f_hi = (vhi - spec.b_min) / spec.db
    keep = valid & (f_hi >= 0.0) & (f_lo < spec.n_b)
    keep &= ~degenerate[:, None]
    jlo = np.clip(np.floor(f_lo), 0, spec.n_b - 1)
    jhi = np.clip(np.floor(f_hi), 0, spec.n_b - 1)
    return jlo.astype(np.int64), jhi.astype(np.int64), keep, degenerate


def _diff_from_block(fam, spec, xs, ys):
    """Difference-array contribution of a block of points, plus the
    number of degenerate points in the block."""
    jlo, jhi, keep, degenerate = _trace_row_intervals(fam, spec, xs, ys)
    cols = np.broadcast_to(np.arange(spec.n_a)[None, :], keep.shape)
    width = spec.n_b + 1
    flat_lo = (cols * width + jlo)[keep]
    flat_hi = (cols * width + jhi + 1)[keep]
    size = spec.n_a * width
    diff = np.bincount(flat_lo, minlength=size).astype(np.int64)
    diff -= np.bincount(flat_hi, minlength=size)
    return diff.reshape(spec.n_a, width), int(degenerate.sum())


def _corner_sign_diffless(fam: FamilyDefinition, spec: GridSpec, xs, ys):
    """Fallback for families not linear in the last parameter: mark
    cells where f_p changes sign among the 4 cell corners."""
    counts = np.zeros((spec.n_a, spec.n_b), dtype=np.int32)
    ea = spec.a_min + spec.da * np.arange(spec.n_a + 1)
    eb = spec.b_min + spec.db * np.arange(spec.n_b + 1)
    skipped = 0
    for x, y in zip(xs, ys):
        F = np.zeros((spec.n_a + 1, spec.n_b + 1))
        nonzero = False
        for mono, poly in fam.terms:
            m_a, m_b = mono.exponents
            c = float(poly(float(x), float(y)))
            if c != 0.0:
                nonzero = True
            F += c * np.outer(ea**m_a, eb**m_b)
        if not nonzero:
            skipped += 1
            continue
        cmin = np.minimum.reduce(
            [F[:-1, :-1], F[1:, :-1], F[:-1, 1:], F[1:, 1:]]
        )
        cmax = np.maximum.reduce(
            [F[:-1, :-1], F[1:, :-1], F[:-1, 1:], F[1:, 1:]]
        )
        counts += ((cmin <= 0.0) & (cmax >= 0.0)).astype(np.int32)
    return counts, skipped


def accumulate(
    grid: AccumulatorGrid, fam: FamilyDefinition, points, threads: int = 1
) -> AccumulatorGrid:
    """Fold the voting rule over points; counts add cell-wise, so any
    sharding or ordering produces the same grid."""
    if fam.t != 2:
        raise ValueError(f"voting requires t=2; {fam.name} has t={fam.t}")
    points = list(points)
    if not points:
        return grid
    xs = np.array([float(p.x) for p in points])
    ys = np.array([float(p.y) for p in points])
    spec = grid.spec

    if not fam.solve_for_last:
        counts, skipped = _corner_sign_diffless(fam, spec, xs, ys)
        grid.counts += counts
        grid.skipped_degenerate += skipped
        return grid

    blocks = [
        (xs[k : k + BLOCK], ys[k : k + BLOCK]) for k in range(0, len(xs), BLOCK)
    ]
    if threads > 1 and len(blocks) > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(
                pool.map(lambda blk: _diff_from_block(fam, spec, *blk), blocks)
            )
    else:
        results = [_diff_from_block(fam, spec, *blk) for blk in blocks]

    diff = np.zeros((spec.n_a, spec.n_b + 1), dtype=np.int64)
    skipped = 0
    for d, s in results:
        diff += d
        skipped += s
    grid.counts += np.cumsum(diff, axis=1)[:, : spec.n_b].astype(np.int32)
    grid.skipped_degenerate += skipped
    return grid


def vote(grid: AccumulatorGrid, fam: FamilyDefinition, p: ImagePoint) -> AccumulatorGrid:
    """Cast one point's votes (at most one per cell)."""
    return accumulate(grid, fam, [p])


def argmax(grid: AccumulatorGrid) -> tuple[tuple[int, int], ParamPoint, int]:
    """Peak cell of the accumulator.

    Ties are broken by the cell nearest the centroid of all maximal
    cells, then by smallest (i, j) in row-major order, so a symmetric
    cluster of maxima around the true crossing resolves to its middle.
    """
    m = int(grid.counts.max()) if grid.counts.size else 0
    if m == 0:
        raise NoSignalError("accumulator is identically zero")
    cells = np.argwhere(grid.counts == m)
    if len(cells) == 1:
        i, j = map(int, cells[0])
    else:
        centroid = cells.mean(axis=0)
        d2 = ((cells - centroid) ** 2).sum(axis=1)
        order = np.lexsort((cells[:, 1], cells[:, 0], d2))
        i, j = map(int, cells[order[0]])
    center = grid.spec.cell_center(i, j)
    return (i, j), ParamPoint(center), m
