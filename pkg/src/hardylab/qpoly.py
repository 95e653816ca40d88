"""Sparse multivariate polynomials over the rationals in formal shift symbols.

The symbols stand for shift offsets that are "large enough" positive integers:
a claim that holds for all large offsets is certified by a coefficient
polynomial that is not identically zero, since a nonzero polynomial has
finitely many roots.  Symbols are numbered h1, h2, ...; the bare name ``h``
is an alias for h1.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Mapping, Union

# A monomial is a sorted tuple of (symbol index, exponent) pairs, exponents > 0.
Monomial = tuple[tuple[int, int], ...]
Scalar = Union[int, Fraction]


def _as_fraction(x: Scalar) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


class Poly:
    """Immutable polynomial in symbols h1, h2, ... with Fraction coefficients."""

    __slots__ = ("coeffs", "_hash")

    def __init__(self, coeffs: Mapping[Monomial, Fraction] | Scalar = 0):
        if isinstance(coeffs, (int, Fraction)):
            c = _as_fraction(coeffs)
            coeffs = {(): c} if c else {}
        clean = {m: _as_fraction(c) for m, c in coeffs.items() if c}
        object.__setattr__(self, "coeffs", clean)
        object.__setattr__(self, "_hash", None)

    # Construction helpers -------------------------------------------------

    @staticmethod
    def const(c: Scalar) -> "Poly":
        return Poly(c)

    @staticmethod
    def sym(index: int) -> "Poly":
        if index < 1:
            raise ValueError("symbol indices start at 1")
        return Poly({((index, 1),): Fraction(1)})

    # Predicates ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.coeffs

    def is_constant(self) -> bool:
        return all(m == () for m in self.coeffs)

    def constant_value(self) -> Fraction:
        """Value of a constant polynomial (0 for the zero polynomial)."""
        if not self.is_constant():
            raise ValueError(f"not a constant polynomial: {self}")
        return self.coeffs.get((), Fraction(0))

    def symbols(self) -> set[int]:
        return {v for m in self.coeffs for v, _ in m}

    def total_degree(self) -> int:
        if not self.coeffs:
            return 0
        return max(sum(e for _, e in m) for m in self.coeffs)

    # Arithmetic ------------------------------------------------------------

    def __add__(self, other: "Poly | Scalar") -> "Poly":
        other = other if isinstance(other, Poly) else Poly(other)
        out = dict(self.coeffs)
        for m, c in other.coeffs.items():
            out[m] = out.get(m, Fraction(0)) + c
        return Poly(out)

    __radd__ = __add__

    def __neg__(self) -> "Poly":
        return Poly({m: -c for m, c in self.coeffs.items()})

    def __sub__(self, other: "Poly | Scalar") -> "Poly":
        return self + (-(other if isinstance(other, Poly) else Poly(other)))

    def __rsub__(self, other: Scalar) -> "Poly":
        return Poly(other) - self

    def __mul__(self, other: "Poly | Scalar") -> "Poly":
        if not isinstance(other, Poly):
            c = _as_fraction(other)
            return Poly({m: cc * c for m, cc in self.coeffs.items()})
        out: dict[Monomial, Fraction] = {}
        for m1, c1 in self.coeffs.items():
            for m2, c2 in other.coeffs.items():
                m = _mul_monomials(m1, m2)
                out[m] = out.get(m, Fraction(0)) + c1 * c2
        return Poly(out)

    __rmul__ = __mul__

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __call__(self, subs: Mapping[int, Scalar]) -> Fraction:
        """Evaluate at integer/rational values for every symbol present."""
        total = Fraction(0)
        for m, c in self.coeffs.items():
            v = c
            for sym, exp in m:
                v *= _as_fraction(subs[sym]) ** exp
            total += v
        return total

    # Identity --------------------------------------------------------------

    def key(self) -> tuple:
        """Canonical hashable form."""
        return tuple(sorted(self.coeffs.items()))

    def __eq__(self, other: object) -> bool:
        if isinstance(other, (int, Fraction)):
            other = Poly(other)
        if not isinstance(other, Poly):
            return NotImplemented
        return self.coeffs == other.coeffs

    def __hash__(self) -> int:
        h = self._hash
        if h is None:
            h = hash(self.key())
            object.__setattr__(self, "_hash", h)
        return h

    def __repr__(self) -> str:
        return f"Poly({self})"

    def __str__(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for m, c in sorted(self.coeffs.items(), key=_mono_sort_key):
            factors = []
            if c != 1 or not m:
                factors.append(str(c))
            for sym, exp in m:
                name = "h" if sym == 1 else f"h{sym}"
                factors.append(name if exp == 1 else f"{name}^{exp}")
            parts.append("*".join(factors))
        return " + ".join(parts).replace("+ -", "- ")


def _mul_monomials(m1: Monomial, m2: Monomial) -> Monomial:
    exps: dict[int, int] = dict(m1)
    for sym, e in m2:
        exps[sym] = exps.get(sym, 0) + e
    return tuple(sorted(exps.items()))


def _mono_sort_key(item: tuple[Monomial, Fraction]) -> tuple:
    m, _ = item
    return (-sum(e for _, e in m), m)


ZERO = Poly(0)
ONE = Poly(1)


def poly_sum(polys: Iterable[Poly]) -> Poly:
    total = ZERO
    for p in polys:
        total = total + p
    return total
