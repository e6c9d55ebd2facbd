"""Curve-family data model: terms, evaluation, base loci, built-ins.

A family of degree-d plane curves is a finite sum of terms, each
pairing a monomial in the parameters with a bivariate coefficient
polynomial in (x, y).  Reading the sum with the parameters fixed gives
the curve equation; reading it with the image point fixed gives the
Hough transform of the point in parameter space.  Both reads share one
term list, so the duality between them is structural rather than
something to verify numerically.

Base loci (the complex projective points common to every member of the
family) are declared per built-in family and machine-verified, not
solved for symbolically.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction

from .poly import BivarPoly, NEG_INF, cabs2, cis_exact, cmul, cpair

# Tolerance for float-mode base point verification and for projective
# coordinate normalization; exact inputs are checked exactly.
EPS_BASE = 1e-9

BUILTIN_NAMES = (
    "descartes_folium",
    "elliptic3",
    "elliptic2",
    "quartic_triple",
    "quartic_tacnode",
    "lamet",
    "conic_pencil",
    "conic_ex0",
    "lines",
)


@dataclass(frozen=True)
class MonomialExp:
    """Exponent tuple of one parameter monomial L1^m1 ... Lt^mt."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exponents)
        if any(e < 0 for e in exps):
            raise ValueError("monomial exponents must be non-negative")
        object.__setattr__(self, "exponents", exps)

    @property
    def total_degree(self) -> int:
        return sum(self.exponents)

    def __len__(self):
        return len(self.exponents)

    def __iter__(self):
        return iter(self.exponents)


@dataclass(frozen=True)
class ImagePoint:
    """Point of the image plane.  Coordinates are floats in the voting
    pipeline; exact numeric types (Fraction, ...) are accepted anywhere
    evaluation should stay exact."""

    x: object
    y: object

    def __post_init__(self):
        for v in (self.x, self.y):
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError("image point coordinates must be finite")

    def as_floats(self) -> tuple[float, float]:
        return (float(self.x), float(self.y))


@dataclass(frozen=True)
class ParamPoint:
    """Parameter tuple lambda = (lambda_1, ..., lambda_t)."""

    coords: tuple

    def __post_init__(self):
        coords = tuple(self.coords)
        for v in coords:
            if isinstance(v, float) and not math.isfinite(v):
                raise ValueError("parameter coordinates must be finite")
        object.__setattr__(self, "coords", coords)

    def __len__(self):
        return len(self.coords)

    def __iter__(self):
        return iter(self.coords)

    def __getitem__(self, k):
        return self.coords[k]


class ComplexProjectivePoint:
    """Point [x0, x1, x2] of the complex projective plane.

    Coordinates are (re, im) pairs whose components are Fractions/ints
    (exact mode) or floats.  Equality is up to a nonzero complex scalar.
    """

    __slots__ = ("coords",)

    def __init__(self, x0, x1, x2):
        coords = (cpair(x0), cpair(x1), cpair(x2))
        if all(cabs2(c) == 0 for c in coords):
            raise ValueError("projective point must have a nonzero coordinate")
        self.coords = coords

    def is_exact(self) -> bool:
        return all(cis_exact(c) for c in self.coords)

    def at_infinity(self, tol: float = EPS_BASE) -> bool:
        x2 = self.coords[2]
        if self.is_exact():
            return cabs2(x2) == 0
        return math.sqrt(float(cabs2(x2))) <= tol * self._scale()

    def _scale(self) -> float:
        return max(math.sqrt(float(cabs2(c))) for c in self.coords)

    def normalized(self):
        """Scale so the first nonzero coordinate becomes 1 (tolerance
        EPS_BASE relative to the largest modulus in float mode)."""
        exact = self.is_exact()
        scale2 = max(float(cabs2(c)) for c in self.coords)
        k = None
        for i, c in enumerate(self.coords):
            m2 = cabs2(c)
            if (exact and m2 != 0) or (not exact and float(m2) > EPS_BASE**2 * scale2):
                k = i
                break
        if k is None:
            k = max(range(3), key=lambda i: float(cabs2(self.coords[i])))
        p = self.coords[k]
        den = cabs2(p)
        if exact:
            inv = (Fraction(p[0]) / den, Fraction(-p[1]) / den)  # 1 / p
        else:
            inv = (p[0] / den, -p[1] / den)
        return tuple(cmul(c, inv) for c in self.coords)

    def unit_scaled(self):
        """Scale so the largest-modulus coordinate has modulus ~1; used
        for numerically stable evaluation, not for equality."""
        k = max(range(3), key=lambda i: float(cabs2(self.coords[i])))
        p = self.coords[k]
        den = cabs2(p)
        if self.is_exact():
            inv = (Fraction(p[0]) / den, Fraction(-p[1]) / den)
        else:
            inv = (p[0] / den, -p[1] / den)
        return tuple(cmul(c, inv) for c in self.coords)

    def proj_eq(self, other: "ComplexProjectivePoint", tol: float = EPS_BASE) -> bool:
        a = self.normalized()
        b = other.normalized()
        if all(cis_exact(c) for c in a + b):
            return a == b
        dist = max(
            math.sqrt(float(cabs2((ca[0] - cb[0], ca[1] - cb[1]))))
            for ca, cb in zip(a, b)
        )
        return dist <= tol

    def __repr__(self):
        def fmt(c):
            re, im = c
            return f"{re}" if im == 0 else f"{re}{'+' if im >= 0 else ''}{im}i"

        return "[" + ", ".join(fmt(c) for c in self.coords) + "]"


@dataclass(frozen=True)
class SamplingWindow:
    """Where on-curve points are drawn for a family.

    ``kind`` selects the sampler (parametrization sweep or coordinate
    scan); ``lo``/``hi`` bound the swept parameter or coordinate, and
    ``y_cap`` truncates unbounded branches so background-noise windows
    stay finite.  All values are defaults and can be overridden.
    """

    kind: str
    lo: float
    hi: float
    y_cap: float | None = None


@dataclass(frozen=True)
class FamilyDefinition:
    """A t-parameter family of degree-d plane curves."""

    name: str
    t: int
    d: int
    terms: tuple[tuple[MonomialExp, BivarPoly], ...]
    base_points: tuple[ComplexProjectivePoint, ...] = ()
    param_region: tuple[tuple[float, float, float], ...] = ()
    window: SamplingWindow | None = None
    param_names: tuple[str, ...] = ()
    solve_for_last: bool = False
    lamet_m: int | None = None

    def __post_init__(self):
        seen = set()
        attains_d = False
        for mono, poly in self.terms:
            if len(mono) != self.t:
                raise ValueError(
                    f"{self.name}: monomial {mono.exponents} has length "
                    f"{len(mono)}, expected t={self.t}"
                )
            if mono.exponents in seen:
                raise ValueError(f"{self.name}: duplicate monomial {mono.exponents}")
            seen.add(mono.exponents)
            deg = poly.degree
            if deg is not NEG_INF and deg > self.d:
                raise ValueError(
                    f"{self.name}: coefficient degree {deg} exceeds d={self.d}"
                )
            if deg == self.d:
                attains_d = True
        if self.terms and not attains_d:
            raise ValueError(f"{self.name}: no term attains curve degree d={self.d}")
        if not self.param_names:
            object.__setattr__(
                self, "param_names", tuple("ABCMNPQ"[k] for k in range(self.t))
            )
        for i in range(len(self.base_points)):
            for j in range(i + 1, len(self.base_points)):
                if self.base_points[i].proj_eq(self.base_points[j]):
                    raise ValueError(f"{self.name}: base points {i} and {j} coincide")

    @property
    def affine_base_points(self) -> tuple[ComplexProjectivePoint, ...]:
        """Base points off the line at infinity x2 = 0."""
        return tuple(q for q in self.base_points if not q.at_infinity())

    def real_affine_base_points(self, tol: float = EPS_BASE) -> list[tuple[float, float]]:
        """Real (x, y) coordinates of affine base points; these are the
        image points whose Hough transform is the whole parameter space
        and which must be discarded before voting."""
        out = []
        for q in self.affine_base_points:
            x0, x1, x2 = q.coords
            scale = q._scale()
            if (
                abs(float(x0[1])) <= tol * scale
                and abs(float(x1[1])) <= tol * scale
                and abs(float(x2[1])) <= tol * scale
            ):
                x2r = float(x2[0])
                out.append((float(x0[0]) / x2r, float(x1[0]) / x2r))
        return out


def eval_curve(fam: FamilyDefinition, params, p) -> object:
    """Value of f_lambda at the image point p; zero iff p lies on the curve."""
    coords = tuple(params) if not isinstance(params, ParamPoint) else params.coords
    if len(coords) != fam.t:
        raise ValueError(f"expected {fam.t} parameters, got {len(coords)}")
    x, y = (p.x, p.y) if isinstance(p, ImagePoint) else (p[0], p[1])
    total = 0
    for mono, poly in fam.terms:
        lam_pow = 1
        for lam_k, m_k in zip(coords, mono.exponents):
            if m_k:
                lam_pow = lam_pow * lam_k**m_k
        total = total + poly(x, y) * lam_pow
    return total


def eval_hough(fam: FamilyDefinition, p, params) -> object:
    """Value of the Hough polynomial f_p at the parameter tuple.

    By the duality condition this is the same number as
    ``eval_curve(fam, params, p)``; the argument order is swapped to
    match the parameter-space reading.
    """
    return eval_curve(fam, params, p)


def is_affine_base_point(fam: FamilyDefinition, p, tol: float = EPS_BASE) -> bool:
    """True when p coincides with a real affine base point of the family."""
    x, y = (float(p.x), float(p.y)) if isinstance(p, ImagePoint) else (float(p[0]), float(p[1]))
    for bx, by in fam.real_affine_base_points():
        if math.hypot(x - bx, y - by) <= tol * max(1.0, abs(bx), abs(by)):
            return True
    return False


def verify_base_point(fam: FamilyDefinition, q: ComplexProjectivePoint) -> bool:
    """Check that every term's degree-d homogenization vanishes at q.

    Exact when q has exact coordinates; otherwise each value must be
    below EPS_BASE relative to the coordinate scale.
    """
    coords = q.unit_scaled()
    exact = all(cis_exact(c) for c in coords)
    for _, poly in fam.terms:
        val = poly.eval_homogeneous(coords, fam.d)
        if exact:
            if cabs2(val) != 0:
                return False
        else:
            scale = float(poly.max_abs_coeff()) or 1.0
            if math.sqrt(float(cabs2(val))) > EPS_BASE * scale:
                return False
    return True


def nu_opt(fam: FamilyDefinition) -> int:
    """Geometric point-count bound d^2 - #B(C) + 1."""
    return fam.d * fam.d - len(fam.base_points) + 1


def _F(n, d=1):
    return Fraction(n, d)


def _terms(spec):
    return tuple(
        (MonomialExp(tuple(mono)), BivarPoly(poly)) for mono, poly in spec
    )


_I = ComplexProjectivePoint

# Base points of the conic pencil a(x^2+y^2+1) + b(x^2+x+y): the four
# intersection points of the two conics.  x solves x^4+2x^3+2x^2+1 = 0
# and y = -x^2-x; roots have no closed rational form, so they are
# declared numerically (double precision).
_PENCIL_XS = (
    complex(-1.1897847356080644, -1.0431849752635074),
    complex(-1.1897847356080644, +1.0431849752635074),
    complex(0.18978473560806502, -0.6028026794401734),
    complex(0.18978473560806502, +0.6028026794401734),
)


def _pencil_base_points():
    pts = []
    for x in _PENCIL_XS:
        y = -x * x - x
        pts.append(_I(x, y, 1.0))
    return tuple(pts)


def _build_descartes_folium() -> FamilyDefinition:
    # 3a*x*y - x^3 - b*y^3 = 0
    return FamilyDefinition(
        name="descartes_folium",
        t=2,
        d=3,
        terms=_terms(
            [
                ((1, 0), {(1, 1): 3}),
                ((0, 1), {(0, 3): -1}),
                ((0, 0), {(3, 0): -1}),
            ]
        ),
        base_points=(_I(0, 0, 1),),
        param_region=((0.5, 11.0, 0.02), (0.5, 11.0, 0.02)),
        window=SamplingWindow("folium_param", 0.05, 20.0),
        solve_for_last=True,
    )


def _build_elliptic3() -> FamilyDefinition:
    # y^2 = m*x^3 + a*x + b, three free parameters (A, B, M)
    return FamilyDefinition(
        name="elliptic3",
        t=3,
        d=3,
        terms=_terms(
            [
                ((1, 0, 0), {(1, 0): 1}),
                ((0, 1, 0), {(0, 0): 1}),
                ((0, 0, 1), {(3, 0): 1}),
                ((0, 0, 0), {(0, 2): -1}),
            ]
        ),
        base_points=(_I(0, 1, 0),),
        param_region=((-14.0, 6.0, 0.02), (-3.0, 17.0, 0.02), (0.5, 1.5, 0.01)),
        window=SamplingWindow("elliptic_xscan", -2.5, 3.0),
        param_names=("A", "B", "M"),
    )


def _build_elliptic2() -> FamilyDefinition:
    # Weierstrass slice m = 1: y^2 = x^3 + a*x + b
    return FamilyDefinition(
        name="elliptic2",
        t=2,
        d=3,
        terms=_terms(
            [
                ((1, 0), {(1, 0): 1}),
                ((0, 1), {(0, 0): 1}),
                ((0, 0), {(3, 0): 1, (0, 2): -1}),
            ]
        ),
        base_points=(_I(0, 1, 0),),
        param_region=((-14.0, 6.0, 0.02), (-3.0, 17.0, 0.02)),
        window=SamplingWindow("elliptic_xscan", -2.5, 3.0),
        solve_for_last=True,
    )


def _build_quartic_triple() -> FamilyDefinition:
    # y(x - a*y)^2 - b(x^2 + y^2)^2 = 0
    return FamilyDefinition(
        name="quartic_triple",
        t=2,
        d=4,
        terms=_terms(
            [
                ((0, 0), {(2, 1): 1}),
                ((1, 0), {(1, 2): -2}),
                ((2, 0), {(0, 3): 1}),
                ((0, 1), {(4, 0): -1, (2, 2): -2, (0, 4): -1}),
            ]
        ),
        base_points=(
            _I(0, 0, 1),
            _I((0, 1), 1, 0),
            _I((0, -1), 1, 0),
        ),
        param_region=((-5.0, 5.0, 0.01), (0.1, 5.0, 0.01)),
        window=SamplingWindow("triple_polar", 0.0, math.pi),
        solve_for_last=True,
    )


def _build_quartic_tacnode() -> FamilyDefinition:
    # y^2 (x - a)^2 - b*y*x^2 + x^4 = 0
    return FamilyDefinition(
        name="quartic_tacnode",
        t=2,
        d=4,
        terms=_terms(
            [
                ((0, 0), {(2, 2): 1, (4, 0): 1}),
                ((1, 0), {(1, 2): -2}),
                ((2, 0), {(0, 2): 1}),
                ((0, 1), {(2, 1): -1}),
            ]
        ),
        base_points=(
            _I(0, 0, 1),
            _I(0, 1, 0),
            _I((0, 1), 1, 0),
            _I((0, -1), 1, 0),
        ),
        param_region=((-9.0, 11.0, 0.02), (-2.0, 18.0, 0.02)),
        window=SamplingWindow("tacnode_xscan", -4.0, 4.0, y_cap=25.0),
        solve_for_last=True,
    )


def _build_lamet(m: int) -> FamilyDefinition:
    # a^m*b - y^m*a^m - x^m*b = 0 (degree-m superellipse, even m)
    return FamilyDefinition(
        name=f"lamet{m}",
        t=2,
        d=m,
        terms=_terms(
            [
                ((m, 1), {(0, 0): 1}),
                ((m, 0), {(0, m): -1}),
                ((0, 1), {(m, 0): -1}),
            ]
        ),
        base_points=(),
        param_region=((0.5, 3.0, 0.01), (0.5, 3.0, 0.01)),
        window=SamplingWindow("lamet_xscan", -1.0, 1.0),
        solve_for_last=True,
        lamet_m=m,
    )


def _build_conic_pencil() -> FamilyDefinition:
    # a(x^2 + y^2 + 1) + b(x^2 + x + y) = 0
    return FamilyDefinition(
        name="conic_pencil",
        t=2,
        d=2,
        terms=_terms(
            [
                ((1, 0), {(2, 0): 1, (0, 2): 1, (0, 0): 1}),
                ((0, 1), {(2, 0): 1, (1, 0): 1, (0, 1): 1}),
            ]
        ),
        base_points=_pencil_base_points(),
        param_region=((0.1, 2.0, 0.01), (0.1, 2.0, 0.01)),
        window=SamplingWindow("pencil_xscan", -3.0, 3.0),
        solve_for_last=True,
    )


def _build_conic_ex0() -> FamilyDefinition:
    # a^2*x^2 + b*y + x = 0
    return FamilyDefinition(
        name="conic_ex0",
        t=2,
        d=2,
        terms=_terms(
            [
                ((2, 0), {(2, 0): 1}),
                ((0, 1), {(0, 1): 1}),
                ((0, 0), {(1, 0): 1}),
            ]
        ),
        base_points=(_I(0, 1, 0), _I(0, 0, 1)),
        param_region=((0.1, 3.0, 0.01), (0.1, 3.0, 0.01)),
        window=SamplingWindow("ex0_xscan", -3.0, 3.0),
        solve_for_last=True,
    )


def _build_lines() -> FamilyDefinition:
    # a*x + b*y + c = 0
    return FamilyDefinition(
        name="lines",
        t=3,
        d=1,
        terms=_terms(
            [
                ((1, 0, 0), {(1, 0): 1}),
                ((0, 1, 0), {(0, 1): 1}),
                ((0, 0, 1), {(0, 0): 1}),
            ]
        ),
        base_points=(),
        param_region=((-2.0, 2.0, 0.01),) * 3,
        window=SamplingWindow("lines_xscan", -3.0, 3.0),
        param_names=("A", "B", "C"),
    )


def builtin(name: str, extra: int | None = None) -> FamilyDefinition:
    """Construct a built-in family by name.

    ``lamet`` needs the even degree m >= 2 passed as ``extra``; all
    other names take no extra argument.
    """
    if name == "lamet":
        if extra is None or extra < 2 or extra % 2 != 0:
            raise ValueError("lamet requires an even degree m >= 2")
        fam = _build_lamet(extra)
    else:
        builders = {
            "descartes_folium": _build_descartes_folium,
            "elliptic3": _build_elliptic3,
            "elliptic2": _build_elliptic2,
            "quartic_triple": _build_quartic_triple,
            "quartic_tacnode": _build_quartic_tacnode,
            "conic_pencil": _build_conic_pencil,
            "conic_ex0": _build_conic_ex0,
            "lines": _build_lines,
        }
        if name not in builders:
            raise ValueError(
                f"unknown family {name!r}; expected one of {', '.join(BUILTIN_NAMES)}"
            )
        if extra is not None:
            raise ValueError(f"family {name!r} takes no extra argument")
        fam = builders[name]()
    for q in fam.base_points:
        if not verify_base_point(fam, q):
            raise AssertionError(f"{fam.name}: declared base point {q} fails verification")
    return fam


# --- JSON serialization -------------------------------------------------
#
# Schema: {name, t, d, terms:[{mono:[m1..mt], poly:[{i,j,num,den}]}],
#          base_points, grid, window}.  Rational data round-trips
#          bit-exactly; float data round-trips through repr.


def _num_to_json(v):
    if isinstance(v, (int, Fraction)):
        f = Fraction(v)
        return {"num": f.numerator, "den": f.denominator}
    return float(v)


def _num_from_json(v):
    if isinstance(v, dict):
        return Fraction(v["num"], v["den"])
    return v


def family_to_dict(fam: FamilyDefinition) -> dict:
    return {
        "name": fam.name,
        "t": fam.t,
        "d": fam.d,
        "terms": [
            {
                "mono": list(mono.exponents),
                "poly": [
                    {"i": i, "j": j, "num": c.numerator, "den": c.denominator}
                    for (i, j), c in sorted(poly.terms.items())
                ],
            }
            for mono, poly in fam.terms
        ],
        "base_points": [
            [[_num_to_json(c[0]), _num_to_json(c[1])] for c in q.coords]
            for q in fam.base_points
        ],
        "grid": [list(axis) for axis in fam.param_region],
        "window": None
        if fam.window is None
        else {
            "kind": fam.window.kind,
            "lo": fam.window.lo,
            "hi": fam.window.hi,
            "y_cap": fam.window.y_cap,
        },
        "param_names": list(fam.param_names),
        "solve_for_last": fam.solve_for_last,
        "lamet_m": fam.lamet_m,
    }


def family_from_dict(doc: dict) -> FamilyDefinition:
    terms = tuple(
        (
            MonomialExp(tuple(entry["mono"])),
            BivarPoly(
                {
                    (p["i"], p["j"]): Fraction(p["num"], p["den"])
                    for p in entry["poly"]
                }
            ),
        )
        for entry in doc["terms"]
    )
    base_points = tuple(
        ComplexProjectivePoint(
            *(tuple((_num_from_json(re), _num_from_json(im)) for re, im in q))
        )
        for q in doc["base_points"]
    )
    window = None
    if doc.get("window"):
        w = doc["window"]
        window = SamplingWindow(w["kind"], w["lo"], w["hi"], w.get("y_cap"))
    return FamilyDefinition(
        name=doc["name"],
        t=doc["t"],
        d=doc["d"],
        terms=terms,
        base_points=base_points,
        param_region=tuple(tuple(axis) for axis in doc.get("grid", ())),
        window=window,
        param_names=tuple(doc.get("param_names", ())),
        solve_for_last=bool(doc.get("solve_for_last", False)),
        lamet_m=doc.get("lamet_m"),
    )


def family_to_json(fam: FamilyDefinition, **kwargs) -> str:
    return json.dumps(family_to_dict(fam), **kwargs)


def family_from_json(text: str) -> FamilyDefinition:
    return family_from_dict(json.loads(text))
