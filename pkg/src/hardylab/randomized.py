"""Seeded random instances for the property sweeps: good-class growth
functions, shift combinations, and nice tuple families."""

from __future__ import annotations

import random
from fractions import Fraction

from .families import TupleFamily
from .hardy import (
    HardyExpr,
    Offset,
    ZERO_EXPR,
    degree,
    expr_from_terms,
    in_good_class,
    lincomb,
    monomial,
    shift,
)

__all__ = [
    "random_good_expr",
    "random_shift_combo",
    "random_nice_family",
]

_DENOMS = (1, 2, 3, 4, 10)
_COEFS = (1, 2, 3, -1, -2, Fraction(1, 2), Fraction(3, 2))


def random_good_expr(rng: random.Random, max_degree: int = 3,
                     min_degree: int = 0, extra_terms: int = 2) -> HardyExpr:
    """A random element of the good growth class with the given degree range."""
    d = rng.randint(min_degree, max_degree)
    if rng.random() < 0.75:
        den = rng.choice(_DENOMS[1:])
        num = rng.randrange(d * den + 1, (d + 1) * den)
        p = Fraction(num, den)
        if p.denominator == 1:
            p += Fraction(1, 2)
        q = Fraction(rng.choice((0, 0, 0, 1, -1, 2)))
    else:
        p = Fraction(d)
        q = Fraction(rng.choice((2, 3)))
        if d == 0:
            # Degree 0 with integer exponent: growth comes from the log power.
            p = Fraction(0)
    lead = (rng.choice(_COEFS), p, q)
    terms = [lead]
    for _ in range(rng.randrange(extra_terms + 1)):
        dp = Fraction(rng.randrange(1, 8), rng.choice((2, 3, 4)))
        terms.append((rng.choice(_COEFS), p - dp, 0))
    e = expr_from_terms(terms)
    if not in_good_class(e) or degree(e) != d:
        return random_good_expr(rng, max_degree, min_degree, extra_terms)
    return e


def random_shift_combo(rng: random.Random, max_len: int = 3
                       ) -> list[tuple[int, int]]:
    """Random integer combination of shifts: list of (multiplier, offset)."""
    combo = []
    for _ in range(rng.randint(1, max_len)):
        k = rng.choice((1, 2, 3, -1, -2, -3))
        h = rng.randint(0, 4)
        combo.append((k, h))
    return combo


def combo_expr(base: HardyExpr, combo: list[tuple[int, int]]) -> HardyExpr:
    parts = [shift(base, h) if h else base for _, h in combo]
    return lincomb([k for k, _ in combo], parts)


def _distinct_growth_bases(rng: random.Random, ell: int, lead_degree: int,
                           other_max: int) -> list[HardyExpr]:
    """Bases with pairwise distinct leading keys, sorted by decreasing growth,
    with the first base of exactly lead_degree."""
    while True:
        bases = [random_good_expr(rng, max_degree=lead_degree,
                                  min_degree=lead_degree, extra_terms=1)]
        bases += [random_good_expr(rng, max_degree=other_max, extra_terms=1)
                  for _ in range(ell - 1)]
        keys = [b.terms[0].key() for b in bases]
        if len(set(keys)) == ell and max(keys) == keys[0]:
            bases.sort(key=lambda b: b.terms[0].key(), reverse=True)
            return bases


def random_nice_family(rng: random.Random, max_ell: int = 3, max_m: int = 3,
                       max_degree: int = 3) -> TupleFamily:
    """A random nice family with d <= max_degree, ell <= max_ell, m <= max_m.

    The tuple-doubling operation makes generic multi-tuple traces grow
    exponentially once the leading degree exceeds 1, so the draw mixes the
    shapes whose full traces stay at desk scale: degree-0 families (empty
    trace), degree-1 families with extra tuples, single-tuple families of
    any degree, and two-tuple diagonal families of degree 2.
    """
    shape = rng.choices(
        ("deg0", "deg1", "singleton", "deg2pair"),
        weights=(0.15, 0.45, 0.25, 0.15),
    )[0]
    ell = rng.randint(1, max_ell)
    if shape == "deg0":
        bases = _distinct_growth_bases(rng, ell, 0, 0)
        m = rng.randint(1, min(max_m, ell))
        tuples = _diagonal(bases)[:m]
    elif shape == "deg1":
        bases = _distinct_growth_bases(rng, ell, 1, 1)
        m_target = rng.randint(1, max_m)
        tuples = _diagonal(bases)[: min(ell, m_target)]
        while len(tuples) < m_target:
            i = rng.randrange(ell)
            k = rng.choice((2, 3, -1, -2))
            c = rng.choice((0, 1, 2))
            entry = lincomb([k], [shift(bases[i], c) if c else bases[i]])
            row = [ZERO_EXPR] * ell
            row[i] = entry
            tuples.append(tuple(row))
    elif shape == "singleton":
        bases = _distinct_growth_bases(rng, ell, rng.randint(1, max_degree),
                                       max_degree)
        row = [bases[0]]
        for i in range(1, ell):
            row.append(ZERO_EXPR if rng.random() < 0.4 else bases[i])
        tuples = [tuple(row)]
    else:
        ell = 2
        bases = _distinct_growth_bases(rng, 2, 2, rng.randint(0, 1))
        tuples = _diagonal(bases)
    return TupleFamily(tuple(tuples), tuple(bases))


def _diagonal(bases: list[HardyExpr]) -> list[tuple[HardyExpr, ...]]:
    ell = len(bases)
    out = []
    for j in range(ell):
        row = [ZERO_EXPR] * ell
        row[j] = bases[j]
        out.append(tuple(row))
    return out
