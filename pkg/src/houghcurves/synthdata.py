"""Synthetic data: on-curve samples, uniform background noise, Gaussian
coordinate perturbation, and the noise-mix arithmetic.

Every generator is a pure function of (inputs, seed).  Randomness comes
from numpy's PCG64 behind a small Rng wrapper that derives independent
child streams by spawn keys, so parallel generation is reproducible
regardless of scheduling.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import DegeneratePointError, SamplingError
from .families import FamilyDefinition, ImagePoint, ParamPoint, is_affine_base_point
from .hough import generic_support, hough_poly

# Attempts per requested point before the sampler gives up.
REJECTION_CAP = 10_000
# Residual tolerance (relative) for the on-curve contract.
ON_CURVE_TOL = 1e-9


class Rng:
    """Seeded PCG64 stream with deterministic sub-stream derivation.

    ``stream(i)`` returns an independent child whose output depends only
    on (seed, key path), never on draw order elsewhere.
    """

    algorithm = "pcg64"

    def __init__(self, seed: int, key: tuple[int, ...] = ()):
        self.seed = int(seed)
        self.key = tuple(int(k) for k in key)
        self._gen = None

    @property
    def generator(self) -> np.random.Generator:
        if self._gen is None:
            ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
            self._gen = np.random.Generator(np.random.PCG64(ss))
        return self._gen

    def stream(self, i: int) -> "Rng":
        return Rng(self.seed, self.key + (i,))

    def __repr__(self):
        return f"Rng(seed={self.seed}, key={self.key}, algorithm={self.algorithm})"


@dataclass(frozen=True)
class Window:
    """Closed rectangle of the image plane."""

    x_range: tuple[float, float]
    y_range: tuple[float, float]

    def __post_init__(self):
        if not (self.x_range[0] <= self.x_range[1] and self.y_range[0] <= self.y_range[1]):
            raise ValueError("window intervals must be nonempty")

    def contains(self, x: float, y: float) -> bool:
        return (
            self.x_range[0] <= x <= self.x_range[1]
            and self.y_range[0] <= y <= self.y_range[1]
        )


def _params_tuple(fam: FamilyDefinition, params) -> tuple[float, ...]:
    coords = tuple(params.coords if isinstance(params, ParamPoint) else params)
    if len(coords) != fam.t:
        raise ValueError(f"expected {fam.t} parameters, got {len(coords)}")
    return tuple(float(v) for v in coords)


def _curve_xy(fam: FamilyDefinition, params, u: float, branch: float):
    """Closed-form point of the curve at sweep coordinate u, or None.

    ``u`` is the sampler's sweep variable (parametrization value, polar
    angle or x-coordinate); ``branch`` in [0, 1) picks among multiple
    solutions where the sweep is two-valued.
    """
    kind = fam.window.kind
    if kind == "folium_param":
        a, b = params
        den = 1.0 + b * u**3
        if abs(den) < 1e-12:
            return None
        x = 3.0 * a * u / den
        return (x, x * u)
    if kind == "elliptic_xscan":
        if fam.t == 3:
            a, b, m = params
        else:
            a, b = params
            m = 1.0
        g = m * u**3 + a * u + b
        if g < 0.0:
            return None
        y = math.sqrt(g)
        return (u, y if branch < 0.5 else -y)
    if kind == "triple_polar":
        a, b = params
        s, c = math.sin(u), math.cos(u)
        r = s * (c - a * s) ** 2 / b
        if r <= 1e-9:
            return None
        return (r * c, r * s)
    if kind == "tacnode_xscan":
        a, b = params
        if u == a or u == 0.0:
            return None
        disc = b * b - 4.0 * (u - a) ** 2
        if disc < 0.0:
            return None
        root = math.sqrt(disc)
        y = u * u * (b + (root if branch < 0.5 else -root)) / (2.0 * (u - a) ** 2)
        if y <= 0.0:
            return None
        if fam.window.y_cap is not None and y > fam.window.y_cap:
            return None
        return (u, y)
    if kind == "lamet_xscan":
        a, b = params
        m = fam.lamet_m
        x = u * a  # sweep variable is x/a in [-1, 1]
        g = b * (1.0 - (x / a) ** m)
        if g < 0.0:
            return None
        y = g ** (1.0 / m)
        return (x, y if branch < 0.5 else -y)
    if kind == "pencil_xscan":
        a, b = params
        if a == 0.0:
            return None
        cc = a * u * u + a + b * u * u + b * u
        disc = b * b - 4.0 * a * cc
        if disc < 0.0:
            return None
        root = math.sqrt(disc)
        return (u, (-b + (root if branch < 0.5 else -root)) / (2.0 * a))
    if kind == "ex0_xscan":
        a, b = params
        if b == 0.0:
            return None
        return (u, -(a * a * u * u + u) / b)
    if kind == "lines_xscan":
        a, b, c = params
        if b == 0.0:
            return None
        return (u, -(a * u + c) / b)
    raise ValueError(f"unknown sampler kind {kind!r}")


def _admissible(fam: FamilyDefinition, generic_h: int, x: float, y: float) -> bool:
    """Finite, inside U1, and not an affine base point."""
    if not (math.isfinite(x) and math.isfinite(y)):
        return False
    p = ImagePoint(x, y)
    if is_affine_base_point(fam, p, tol=1e-7):
        return False
    try:
        hp = hough_poly(fam, p)
    except DegeneratePointError:
        return False
    return hp.h == generic_h


def sample_on_curve(fam: FamilyDefinition, params, n: int, rng: Rng) -> list[ImagePoint]:
    """Draw n points of the curve at ``params`` inside the family window.

    The sweep variable is drawn uniformly (log-uniformly for the folium
    parametrization, whose useful range spans two decades); two-valued
    sweeps pick a branch at random.  Points outside the invariance-
    degree open set and affine base points are rejected.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    pars = _params_tuple(fam, params)
    if fam.window is None:
        raise ValueError(f"family {fam.name} declares no sampling window")
    gen = rng.generator
    generic_h = generic_support(fam).h
    lo, hi = fam.window.lo, fam.window.hi
    log_sweep = fam.window.kind == "folium_param"
    out: list[ImagePoint] = []
    attempts = 0
    budget = REJECTION_CAP * n
    while len(out) < n:
        if attempts >= budget:
            raise SamplingError(
                f"sampler for {fam.name} at {pars} exhausted {budget} attempts "
                f"({len(out)}/{n} points found)"
            )
        attempts += 1
        u01 = gen.random()
        if log_sweep:
            u = math.exp(math.log(lo) + u01 * (math.log(hi) - math.log(lo)))
        else:
            u = lo + u01 * (hi - lo)
        branch = gen.random()
        xy = _curve_xy(fam, pars, u, branch)
        if xy is None:
            continue
        x, y = xy
        if _admissible(fam, generic_h, x, y):
            out.append(ImagePoint(x, y))
    return out


def dense_curve_points(
    fam: FamilyDefinition, params, n: int = 512
) -> list[list[tuple[float, float]]]:
    """Deterministic sweep of the curve, split into polyline segments.

    Segments break where the sweep leaves the curve's real locus or
    switches branch, so renderers can draw them without spurious chords.
    """
    pars = _params_tuple(fam, params)
    if fam.window is None:
        raise ValueError(f"family {fam.name} declares no sampling window")
    lo, hi = fam.window.lo, fam.window.hi
    log_sweep = fam.window.kind == "folium_param"
    if log_sweep:
        us = np.exp(np.linspace(math.log(lo), math.log(hi), n))
    else:
        us = np.linspace(lo, hi, n)
    segments: list[list[tuple[float, float]]] = []
    for branch in (0.0, 0.9):
        current: list[tuple[float, float]] = []
        for u in us:
            xy = _curve_xy(fam, pars, float(u), branch)
            if xy is None or not all(math.isfinite(v) for v in xy):
                if len(current) > 1:
                    segments.append(current)
                current = []
                continue
            current.append(xy)
        if len(current) > 1:
            segments.append(current)
        if fam.window.kind in ("folium_param", "triple_polar", "ex0_xscan", "lines_xscan"):
            break  # single-valued sweeps: second branch is identical
    return segments


def window_for(fam: FamilyDefinition, params, n: int = 512) -> Window:
    """Bounding box of a dense on-curve sweep; the default region for
    background noise, which the source text leaves implicit."""
    pts = [p for seg in dense_curve_points(fam, params, n) for p in seg]
    if not pts:
        raise SamplingError(f"curve of {fam.name} at {params} is empty in its window")
    xs = [p[0] for p in pts]
    ys = [p[1] for p in pts]
    return Window((min(xs), max(xs)), (min(ys), max(ys)))


def uniform_background(window: Window, n: int, rng: Rng) -> list[ImagePoint]:
    """n i.i.d. uniform points of the window rectangle."""
    if n < 0:
        raise ValueError("n must be >= 0")
    if n == 0:
        return []
    gen = rng.generator
    xs = gen.uniform(window.x_range[0], window.x_range[1], size=n)
    ys = gen.uniform(window.y_range[0], window.y_range[1], size=n)
    return [ImagePoint(float(x), float(y)) for x, y in zip(xs, ys)]


def gaussian_perturb(points, sigma: float, rng: Rng) -> list[ImagePoint]:
    """Shift each coordinate independently by N(0, sigma^2)."""
    if sigma < 0:
        raise ValueError("sigma must be >= 0")
    points = list(points)
    if sigma == 0:
        return [ImagePoint(float(p.x), float(p.y)) for p in points]
    gen = rng.generator
    noise = gen.normal(0.0, sigma, size=(len(points), 2))
    return [
        ImagePoint(float(p.x) + float(dx), float(p.y) + float(dy))
        for p, (dx, dy) in zip(points, noise)
    ]


def background_count(n1: int, x) -> int:
    """Noise points N2 solving N2 / (N1 + N2) = x / 100, rounded up.

    Rounding up (not to nearest) reproduces every cell of the reference
    count table, including the non-integral 85% cases.
    """
    if n1 < 0:
        raise ValueError("n1 must be >= 0")
    if not 0 <= x < 100:
        raise ValueError("noise percentage must satisfy 0 <= x < 100")
    if float(x).is_integer():
        return int(math.ceil(Fraction(n1 * int(x), 100 - int(x))))
    return int(math.ceil(n1 * float(x) / (100.0 - float(x))))


def on_curve_residual(fam: FamilyDefinition, params, p: ImagePoint) -> float:
    """|f_lambda(p)| relative to the size of the term contributions."""
    pars = _params_tuple(fam, params)
    total = 0.0
    scale = 0.0
    for mono, poly in fam.terms:
        lam_pow = 1.0
        for lam_k, m_k in zip(pars, mono.exponents):
            if m_k:
                lam_pow *= lam_k**m_k
        contrib = float(poly(float(p.x), float(p.y))) * lam_pow
        total += contrib
        scale = max(scale, abs(contrib))
    return abs(total) / max(scale, 1.0)


# --- CSV -----------------------------------------------------------------


def points_to_csv(points, labels=None) -> str:
    """Serialize points with header x,y,label (label in {curve, noise})."""
    points = list(points)
    if labels is None:
        labels = ["curve"] * len(points)
    buf = io.StringIO()
    buf.write("x,y,label\n")
    for p, lab in zip(points, labels):
        buf.write(f"{float(p.x)!r},{float(p.y)!r},{lab}\n")
    return buf.getvalue()


def points_from_csv(text: str) -> tuple[list[ImagePoint], list[str]]:
    lines = [ln for ln in text.strip().splitlines() if ln]
    if not lines or lines[0].split(",")[:2] != ["x", "y"]:
        raise ValueError("points CSV must start with header x,y,label")
    points, labels = [], []
    for ln in lines[1:]:
        parts = ln.split(",")
        points.append(ImagePoint(float(parts[0]), float(parts[1])))
        labels.append(parts[2] if len(parts) > 2 else "curve")
    return points, labels
