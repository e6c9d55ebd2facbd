"""Sparse bivariate polynomials with exact rational coefficients.

These are the coefficient polynomials in (x, y) that multiply each
parameter monomial in a curve family.  Coefficients are stored as
`fractions.Fraction` so that family definitions, Hough-transform
matrices and base-locus checks can be carried out exactly; evaluation
is duck-typed, so feeding floats gives floats and feeding Fractions
(or any exact numeric type) keeps the computation exact.
"""

from __future__ import annotations

from fractions import Fraction
from numbers import Rational


NEG_INF = float("-inf")


def as_coeff(value) -> Fraction:
    """Coerce an int/Fraction/str coefficient to Fraction (exact only)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, Rational):
        return Fraction(value.numerator, value.denominator)
    raise TypeError(f"coefficient must be rational, got {type(value).__name__}")


class BivarPoly:
    """Polynomial sum of c_ij * x^i * y^j with Fraction coefficients.

    Zero coefficients are never stored; the zero polynomial has an empty
    term map and degree -inf (sentinel).
    """

    __slots__ = ("terms",)

    def __init__(self, terms=None):
        cleaned: dict[tuple[int, int], Fraction] = {}
        if terms:
            for (i, j), c in dict(terms).items():
                if i < 0 or j < 0:
                    raise ValueError(f"negative exponent in term ({i},{j})")
                c = as_coeff(c)
                if c != 0:
                    cleaned[(int(i), int(j))] = c
        self.terms = cleaned

    @property
    def degree(self):
        """Total degree; -inf for the zero polynomial."""
        if not self.terms:
            return NEG_INF
        return max(i + j for i, j in self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __call__(self, x, y):
        """Evaluate at (x, y); exact when the inputs are exact."""
        total = 0
        for (i, j), c in self.terms.items():
            total = total + c * x**i * y**j
        return total

    def eval_homogeneous(self, q, d: int):
        """Evaluate the degree-d homogenization at projective coords q.

        Each monomial x^i y^j becomes x0^i x1^j x2^(d-i-j); q is a
        3-tuple of complex numbers given as (re, im) pairs.  Returns a
        (re, im) pair.
        """
        total = (0, 0)
        x0, x1, x2 = q
        for (i, j), c in self.terms.items():
            k = d - i - j
            if k < 0:
                raise ValueError(f"term ({i},{j}) exceeds homogenization degree {d}")
            term = cpow(x0, i)
            term = cmul(term, cpow(x1, j))
            term = cmul(term, cpow(x2, k))
            total = cadd(total, cscale(term, c))
        return total

    def max_abs_coeff(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        return max(abs(c) for c in self.terms.values())

    def __eq__(self, other):
        return isinstance(other, BivarPoly) and self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def __repr__(self):
        if not self.terms:
            return "BivarPoly(0)"
        parts = []
        for (i, j), c in sorted(self.terms.items()):
            mono = "".join(s for s, e in (("x^%d" % i, i), ("y^%d" % j, j)) if e)
            parts.append(f"{c}{('*' + mono) if mono else ''}")
        return "BivarPoly(" + " + ".join(parts) + ")"


# Complex arithmetic over (re, im) pairs.  Components may be Fraction
# (exact mode) or float; mixing degrades to float automatically.

def cpair(z):
    """Coerce a number or (re, im) pair into a pair."""
    if isinstance(z, tuple):
        re, im = z
        return (re, im)
    if isinstance(z, complex):
        return (z.real, z.imag)
    return (z, 0)


def cadd(a, b):
    return (a[0] + b[0], a[1] + b[1])


def cmul(a, b):
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def cscale(a, s):
    return (s * a[0], s * a[1])


def cpow(a, n: int):
    out = (1, 0)
    for _ in range(n):
        out = cmul(out, a)
    return out


def cabs2(a):
    return a[0] * a[0] + a[1] * a[1]


def cis_exact(a) -> bool:
    return isinstance(a[0], (int, Fraction)) and isinstance(a[1], (int, Fraction))
