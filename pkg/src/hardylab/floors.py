"""Exact floor sequences [a(n)] for n in a range, vectorized.

Values must be exact: the fast paths run in float64 and certify every value
whose distance to the nearest integer clears an error bound that dominates
the rounding error of the vectorized evaluation; every uncertified n is
settled by exact integer root extraction or escalating-precision interval
arithmetic.  The per-sequence certificate records which n needed escalation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .hardy import HardyExpr, floor_eval

__all__ = ["FloorSequence", "floor_range"]

# Relative error budget granted to the float64 evaluation: ~1000 ulp per
# term, far above anything numpy's pow/log produce.
_REL_ERR = 1e-13
_MIN_MARGIN = 1e-7


@dataclass(frozen=True)
class FloorSequence:
    """Exact values [expr(n)] for n = n_start .. n_start+len-1."""

    expr: HardyExpr
    n_start: int
    values: np.ndarray
    escalated: tuple[int, ...] = ()  # n settled outside the float fast path

    def __len__(self) -> int:
        return len(self.values)

    def value(self, n: int) -> int:
        return int(self.values[n - self.n_start])


def _is_single_power(e: HardyExpr) -> Optional[tuple[Fraction, Fraction]]:
    if len(e.terms) == 1 and e.terms[0].q == 0:
        t = e.terms[0]
        return t.coef.constant_value(), t.p
    return None


def _all_integer_exponents(e: HardyExpr) -> bool:
    return all(t.q == 0 and t.p.denominator == 1 and t.p >= 0 for t in e.terms)


def _float_eval(e: HardyExpr, ns: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Float64 values and an absolute error bound per n."""
    t = ns.astype(np.float64)
    total = np.zeros(len(ns))
    err = np.zeros(len(ns))
    logt = None
    for term in e.terms:
        c = float(term.coef.constant_value())
        part = np.full(len(ns), c)
        if term.p != 0:
            part = part * t ** float(term.p)
        if term.q != 0:
            if logt is None:
                logt = np.log(t)
            part = part * logt ** float(term.q)
        total += part
        err += np.abs(part) * _REL_ERR
    return total, err + _MIN_MARGIN


def _exact_int_poly(e: HardyExpr, ns: np.ndarray) -> np.ndarray:
    """Exact floors for integer-exponent rational-coefficient sums."""
    den = 1
    for t in e.terms:
        d = t.coef.constant_value().denominator
        den = den * d // math.gcd(den, d)
    parts = [(int(t.coef.constant_value() * den), int(t.p)) for t in e.terms]
    out = np.empty(len(ns), dtype=np.int64)
    for i, n in enumerate(ns):
        n = int(n)
        num = sum(a * n**p for a, p in parts)
        out[i] = num // den
    return out


def floor_range(expr: HardyExpr, n_end: int, n_start: int = 1) -> FloorSequence:
    """Exact [expr(n)] for n_start <= n <= n_end."""
    if expr.has_formal_symbols():
        raise ValueError("floor sequences require rational coefficients")
    if n_start < 2 and any(t.q < 0 for t in expr.terms):
        raise ValueError(
            "expression is undefined at n=1 (negative log power); use n_start >= 2")
    ns = np.arange(n_start, n_end + 1, dtype=np.int64)
    if len(expr.terms) == 0:
        return FloorSequence(expr, n_start, np.zeros(len(ns), dtype=np.int64))
    if _all_integer_exponents(expr):
        return FloorSequence(expr, n_start, _exact_int_poly(expr, ns))

    single = _is_single_power(expr)
    if single is not None:
        c, p = single
        if c == 1 and p.denominator == 2 and p > 0 and int(ns[-1]) ** p.numerator < 2**62:
            vals = _isqrt_exact(ns.astype(object) ** p.numerator)
            return FloorSequence(expr, n_start, vals)

    vals, err = _float_eval(expr, ns)
    floors = np.floor(vals)
    dist = np.minimum(vals - floors, floors + 1 - vals)
    # Values too large for float64 to resolve integers are always escalated.
    unresolved = (dist <= err) | (np.abs(vals) > 2**46) | ~np.isfinite(vals)
    out = floors.astype(np.int64, copy=True)
    escalated = []
    for idx in np.nonzero(unresolved)[0]:
        n = int(ns[idx])
        out[idx] = _exact_floor_scalar(expr, n, single)
        escalated.append(n)
    return FloorSequence(expr, n_start, out, tuple(escalated))


def _isqrt_exact(x_obj: np.ndarray) -> np.ndarray:
    """Exact integer sqrt for int64-range inputs, vectorized with correction."""
    x = x_obj.astype(np.int64)
    r = np.floor(np.sqrt(x.astype(np.float64))).astype(np.int64)
    for _ in range(3):
        r = np.where(r * r > x, r - 1, r)
        r = np.where((r + 1) * (r + 1) <= x, r + 1, r)
    bad = (r * r > x) | ((r + 1) * (r + 1) <= x)
    if bad.any():
        raise AssertionError("integer sqrt correction did not converge")
    return r


def _exact_floor_scalar(expr: HardyExpr, n: int,
                        single: Optional[tuple[Fraction, Fraction]]) -> int:
    return floor_eval(expr, n)
