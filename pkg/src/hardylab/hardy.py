"""Exact growth calculus on the fragment spanned by c * t^p * (log t)^q.

Expressions are finite sums of terms coef * t^p * (log t)^q with rational
exponents and coefficients that are polynomials in formal shift symbols.
The fragment is closed under shift t -> t+h, differentiation, and integer
combinations, which is exactly what the family-reduction engine consumes.

Shifting by a non-integer-power offset produces an infinite asymptotic
series; expressions therefore carry an optional truncation marker
(p*, q*) meaning "every dropped term is O(t^p* (log t)^q*)", plus a
structural origin record that lets an all-cancelled expression be either
re-expanded at a higher order or recognized as exactly zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Literal, NamedTuple, Optional, Sequence, Union

import gmpy2
import mpmath

from .qpoly import ONE, ZERO, Poly, Scalar

__all__ = [
    "HardyError",
    "PrecisionExhausted",
    "Term",
    "Offset",
    "HardyExpr",
    "GrowthClass",
    "Comparison",
    "expr_from_terms",
    "monomial",
    "t_power",
    "shift",
    "derivative",
    "combine",
    "lincomb",
    "scale_by_t_power",
    "leading_term",
    "growth_key",
    "compare_growth",
    "degree",
    "equivalent",
    "in_good_class",
    "different_growth",
    "shift_combo_coefficients",
    "floor_eval",
    "eval_numeric",
    "DEFAULT_ORDER",
    "MAX_ORDER",
]

DEFAULT_ORDER = 8
MAX_ORDER = 64

Rat = Fraction
Key = tuple[Fraction, Fraction]


class HardyError(Exception):
    """Base class for growth-calculus failures."""


class PrecisionExhausted(HardyError):
    """All stored terms cancelled below the truncation horizon, or a floor
    value sits provably within the certification threshold of an integer."""


class Term(NamedTuple):
    coef: Poly
    p: Fraction
    q: Fraction

    def key(self) -> Key:
        return (self.p, self.q)


@dataclass(frozen=True)
class Offset:
    """A shift offset: rational constant plus integer combination of formal symbols."""

    const: Fraction = Fraction(0)
    syms: tuple[tuple[int, int], ...] = ()

    def __add__(self, other: "Offset") -> "Offset":
        acc = dict(self.syms)
        for v, c in other.syms:
            acc[v] = acc.get(v, 0) + c
        return Offset(self.const + other.const,
                      tuple(sorted((v, c) for v, c in acc.items() if c)))

    def is_zero(self) -> bool:
        return self.const == 0 and not self.syms

    def to_poly(self) -> Poly:
        p = Poly(self.const)
        for v, c in self.syms:
            p = p + Poly.sym(v) * c
        return p

    def __str__(self) -> str:
        parts = []
        for v, c in self.syms:
            name = "h" if v == 1 else f"h{v}"
            parts.append(name if c == 1 else f"{c}*{name}")
        if self.const or not parts:
            parts.append(str(self.const))
        return "+".join(parts)


OffsetLike = Union[int, Fraction, str, Offset]


def as_offset(x: OffsetLike) -> Offset:
    if isinstance(x, Offset):
        return x
    if isinstance(x, str):
        if x == "h":
            return Offset(syms=((1, 1),))
        if x.startswith("h") and x[1:].isdigit():
            return Offset(syms=((int(x[1:]), 1),))
        return Offset(const=Fraction(x))
    return Offset(const=Fraction(x))


# Atom: (base term key, derivative order, accumulated offset).  The base key
# is the canonical term tuple of a raw expression, so atoms are
# self-describing and any expression can be re-expanded from its origin.
BaseKey = tuple[tuple[tuple, Fraction, Fraction], ...]
Atom = tuple[BaseKey, int, Offset]


class HardyExpr:
    """Canonical fragment expression: sorted merged terms plus truncation tail."""

    __slots__ = ("terms", "trunc", "origin", "_leading")

    def __init__(self, terms: tuple[Term, ...], trunc: Optional[Key],
                 origin: Optional[dict[Atom, Poly]]):
        self.terms = terms
        self.trunc = trunc
        self.origin = origin
        self._leading: Optional[Term] = None

    # Identity is on the visible canonical form; origin is bookkeeping.
    def __eq__(self, other: object) -> bool:
        if not isinstance(other, HardyExpr):
            return NotImplemented
        return self.terms == other.terms and self.trunc == other.trunc

    def __hash__(self) -> int:
        return hash((self.terms, self.trunc))

    def __repr__(self) -> str:
        from .grammar import format_expr

        return f"HardyExpr({format_expr(self)!r})"

    def is_zero(self) -> bool:
        return not self.terms and self.trunc is None

    def is_exact(self) -> bool:
        return self.trunc is None

    def base_key(self) -> BaseKey:
        return tuple((t.coef.key(), t.p, t.q) for t in self.terms)

    def has_formal_symbols(self) -> bool:
        return any(t.coef.symbols() for t in self.terms) or any(
            off.syms for (_, _, off) in (self.origin or {})
        )

    def is_bounded(self) -> bool:
        """limsup |a| < infinity, decided from visible term keys."""
        return all(t.key() <= (0, 0) for t in self.terms)

    def is_vanishing(self) -> bool:
        """a(t) -> 0, decided from visible term keys (zero counts)."""
        return all(t.key() < (Fraction(0), Fraction(0)) for t in self.terms)


def _canonical(raw: Iterable[Term], trunc: Optional[Key],
               origin: Optional[dict[Atom, Poly]]) -> HardyExpr:
    merged: dict[Key, Poly] = {}
    for t in raw:
        k = (t.p, t.q)
        merged[k] = merged.get(k, ZERO) + t.coef
    if origin is not None:
        origin = {a: c for a, c in origin.items() if not c.is_zero()}
        if not origin:
            # The expression is a vanishing combination of its atoms: exact zero.
            return HardyExpr((), None, {})
    terms = []
    for k in sorted(merged, reverse=True):
        c = merged[k]
        if c.is_zero():
            continue
        if trunc is not None and k <= trunc:
            continue
        terms.append(Term(c, k[0], k[1]))
    return HardyExpr(tuple(terms), trunc, origin)


def expr_from_terms(items: Sequence[tuple[Scalar | Poly, Scalar, Scalar]]) -> HardyExpr:
    """Build an exact expression from (coef, p, q) triples."""
    terms = [Term(c if isinstance(c, Poly) else Poly(c), Fraction(p), Fraction(q))
             for c, p, q in items]
    e = _canonical(terms, None, None)
    e.origin = {} if not e.terms else {(e.base_key(), 0, Offset()): ONE}
    return e


def monomial(coef: Scalar | Poly, p: Scalar, q: Scalar = 0) -> HardyExpr:
    return expr_from_terms([(coef, p, q)])


def t_power(p: Scalar) -> HardyExpr:
    return monomial(1, p, 0)


ZERO_EXPR = expr_from_terms([])


def _binom(p: Fraction, k: int) -> Fraction:
    out = Fraction(1)
    for i in range(k):
        out *= (p - i)
        out /= (i + 1)
    return out


def _lexmax(a: Optional[Key], b: Optional[Key]) -> Optional[Key]:
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _shift_term(term: Term, H: Poly, order: int) -> tuple[list[Term], Optional[Key]]:
    """Expand coef*(t+H)^p*log(t+H)^q as terms with tail marker (p-order, q)."""
    c, p, q = term.coef, term.p, term.q
    if q == 0:
        if p.denominator == 1 and p >= 0:
            ts = [Term(c * _binom(p, k) * H**k, p - k, q) for k in range(int(p) + 1)]
            return ts, None
        ts = [Term(c * _binom(p, k) * H**k, p - k, q) for k in range(order)]
        return ts, (p - order, q)
    # log(1 + H/t) = sum_{i>=1} (-1)^{i+1}/i * H^i t^-i: the t^-i coefficient
    # always carries H^i, so powers of the series stay homogeneous and the
    # rational parts r[j][i] can be convolved on their own.
    r: list[list[Fraction]] = [[Fraction(0)] * order for _ in range(order)]
    r[0][0] = Fraction(1)
    base = [Fraction(0)] + [Fraction((-1) ** (i + 1), i) for i in range(1, order)]
    for j in range(1, order):
        for i in range(j, order):
            acc = Fraction(0)
            for s in range(1, i - j + 2):
                acc += base[s] * r[j - 1][i - s]
            r[j][i] = acc
    jmax = int(q) if (q.denominator == 1 and 0 <= q < order) else order - 1
    kmax = int(p) if (p.denominator == 1 and 0 <= p < order) else order - 1
    out = []
    for k in range(kmax + 1):
        ck = _binom(p, k)
        for j in range(jmax + 1):
            cj = _binom(q, j)
            for i in range(j, order - k):
                rji = r[j][i]
                if rji == 0 and j > 0:
                    continue
                coef = c * (ck * cj * rji) * H ** (k + i)
                if i == 0 and j == 0:
                    coef = c * ck * H**k
                out.append(Term(coef, p - k - i, q - j))
    return out, (p - order, q)


def shift(e: HardyExpr, offset: OffsetLike, order: int = DEFAULT_ORDER) -> HardyExpr:
    """Asymptotic expansion of e(t + offset) to the given inverse order."""
    off = as_offset(offset)
    if off.is_zero():
        return e
    H = off.to_poly()
    terms: list[Term] = []
    marker = e.trunc
    for t in e.terms:
        ts, m = _shift_term(t, H, order)
        terms.extend(ts)
        marker = _lexmax(marker, m)
    origin = None
    if e.origin is not None:
        origin = {(b, d, o + off): c for (b, d, o), c in e.origin.items()}
    return _canonical(terms, marker, origin)


def derivative(e: HardyExpr) -> HardyExpr:
    """Exact term-wise derivative; the tail marker drops by one t-order."""
    terms = []
    for t in e.terms:
        if t.p != 0:
            terms.append(Term(t.coef * t.p, t.p - 1, t.q))
        if t.q != 0:
            terms.append(Term(t.coef * t.q, t.p - 1, t.q - 1))
    marker = None if e.trunc is None else (e.trunc[0] - 1, e.trunc[1])
    origin = None
    if e.origin is not None:
        origin = {(b, d + 1, o): c for (b, d, o), c in e.origin.items()}
    return _canonical(terms, marker, origin)


def lincomb(coeffs: Sequence[Poly | Scalar], exprs: Sequence[HardyExpr]) -> HardyExpr:
    """Canonical sum of coeff_i * expr_i with polynomial coefficients."""
    if len(coeffs) != len(exprs):
        raise ValueError("coefficient and expression lists differ in length")
    terms: list[Term] = []
    marker: Optional[Key] = None
    origin: Optional[dict[Atom, Poly]] = {}
    for c, e in zip(coeffs, exprs):
        cp = c if isinstance(c, Poly) else Poly(c)
        if cp.is_zero():
            continue
        terms.extend(Term(t.coef * cp, t.p, t.q) for t in e.terms)
        marker = _lexmax(marker, e.trunc)
        if origin is not None:
            if e.origin is None:
                origin = None
            else:
                for a, oc in e.origin.items():
                    origin[a] = origin.get(a, ZERO) + oc * cp
    return _canonical(terms, marker, origin)


def combine(coeffs: Sequence[int], exprs: Sequence[HardyExpr]) -> HardyExpr:
    """Integer combination sum k_i * e_i in canonical form."""
    return lincomb([Poly(k) for k in coeffs], exprs)


def scale_by_t_power(e: HardyExpr, dp: Scalar) -> HardyExpr:
    """Multiply by t^dp (fresh origin: the result is treated as a new base)."""
    dp = Fraction(dp)
    out = _canonical([Term(t.coef, t.p + dp, t.q) for t in e.terms],
                     None if e.trunc is None else (e.trunc[0] + dp, e.trunc[1]),
                     None)
    out.origin = {} if not out.terms else {(out.base_key(), 0, Offset()): ONE}
    return out


def _expr_from_base_key(key: BaseKey) -> HardyExpr:
    terms = tuple(Term(Poly(dict(pk)), p, q) for pk, p, q in key)
    return HardyExpr(terms, None, {(key, 0, Offset()): ONE})


def rebuild(e: HardyExpr, order: int) -> HardyExpr:
    """Re-expand an expression from its origin record at a higher order."""
    if e.origin is None:
        raise PrecisionExhausted("expression has no origin record to re-expand")
    coeffs: list[Poly] = []
    parts: list[HardyExpr] = []
    for (base, d, off), c in e.origin.items():
        b = _expr_from_base_key(base)
        for _ in range(d):
            b = derivative(b)
        if not off.is_zero():
            b = shift(b, off, order)
        coeffs.append(c)
        parts.append(b)
    return lincomb(coeffs, parts)


def leading_term(e: HardyExpr, max_order: int = MAX_ORDER) -> Optional[Term]:
    """First term with a nonzero coefficient polynomial; None means exact zero.

    When every stored term has cancelled below the truncation horizon the
    expression is re-expanded from its origin at doubling orders up to
    max_order before PrecisionExhausted is raised.
    """
    if e._leading is not None:
        return e._leading
    if e.terms:
        e._leading = e.terms[0]
        return e.terms[0]
    if e.trunc is None:
        return None
    if e.origin is not None and not e.origin:
        return None
    order = DEFAULT_ORDER * 2
    while order <= max_order:
        cur = rebuild(e, order)
        if cur.terms:
            e._leading = cur.terms[0]
            return cur.terms[0]
        if cur.trunc is None or (cur.origin is not None and not cur.origin):
            return None
        order *= 2
    raise PrecisionExhausted(
        f"no surviving term above the truncation horizon at order {max_order}")


def growth_key(e: HardyExpr) -> Optional[Key]:
    lt = leading_term(e)
    return None if lt is None else (lt.p, lt.q)


@dataclass(frozen=True)
class GrowthClass:
    tag: Literal["vanishing", "bounded", "unbounded"]
    degree: int


@dataclass(frozen=True)
class Comparison:
    """Outcome of a growth comparison of |a| against |b|."""

    verdict: Literal["less", "greater", "similar"]
    ratio: Optional[tuple[Poly, Poly]] = None  # (num, den) of lim a/b when similar

    def ratio_value(self, subs: Optional[dict[int, int]] = None) -> Fraction:
        num, den = self.ratio
        return num(subs or {}) / den(subs or {})


def compare_growth(a: HardyExpr, b: HardyExpr) -> Comparison:
    """Decide a < b, a > b, or a ~ b with the limiting ratio, by leading keys."""
    ta, tb = leading_term(a), leading_term(b)
    if ta is None or tb is None:
        raise ValueError("growth comparison requires nonzero expressions")
    ka, kb = (ta.p, ta.q), (tb.p, tb.q)
    if ka < kb:
        return Comparison("less")
    if ka > kb:
        return Comparison("greater")
    return Comparison("similar", (ta.coef, tb.coef))


def precedes(a: HardyExpr, b: HardyExpr) -> bool:
    """a strictly below b: a/b -> 0."""
    return compare_growth(a, b).verdict == "less"


def growth_class(e: HardyExpr) -> GrowthClass:
    lt = leading_term(e)
    if lt is None:
        return GrowthClass("vanishing", -1)
    p, q = lt.p, lt.q
    if p < 0 or (p == 0 and q < 0):
        return GrowthClass("vanishing", -1)
    if p == 0 and q == 0:
        return GrowthClass("bounded", 0)
    if p.denominator != 1:
        d = p.numerator // p.denominator
    elif q >= 0:
        d = int(p)
    else:
        d = int(p) - 1
    return GrowthClass("unbounded", max(d, -1))


def degree(e: HardyExpr) -> int:
    """Largest d with t^d << |a| < t^(d+1); -1 when a -> 0 (or a == 0)."""
    return growth_class(e).degree


def equivalent(a: HardyExpr, b: HardyExpr) -> bool:
    """Same-degree functions whose difference has strictly smaller degree.

    Inputs where either side is bounded are degenerate; the comparison
    returns False for them.
    """
    ga, gb = growth_class(a), growth_class(b)
    if ga.tag != "unbounded" or gb.tag != "unbounded":
        return False
    diff = lincomb([ONE, -ONE], [a, b])
    if leading_term(diff) is None:
        return True
    return degree(diff) < min(ga.degree, gb.degree)


def in_good_class(e: HardyExpr) -> bool:
    """Growth test t^d log t < |a| < t^(d+1) for d = degree(a) >= 0."""
    g = growth_class(e)
    if g.tag != "unbounded" or g.degree < 0:
        return False
    key = growth_key(e)
    return key > (Fraction(g.degree), Fraction(1))


def different_growth(exprs: Sequence[HardyExpr]) -> bool:
    """Pairwise quotients tend to 0 or infinity: all leading keys distinct."""
    keys = [growth_key(e) for e in exprs]
    if any(k is None for k in keys):
        raise ValueError("different_growth is undefined for the zero expression")
    return len(set(keys)) == len(keys)


def shift_combo_coefficients(
    base: HardyExpr, combo: Sequence[tuple[int, int]]
) -> tuple[list[Fraction], bool]:
    """Derivative-basis coefficients of sum k_i * (S_{h_i} base).

    Returns (c_0..c_d, vanishing) with c_j = sum_i k_i h_i^j / j! ; when every
    c_j vanishes the combination tends to zero.
    """
    if not in_good_class(base):
        raise ValueError("base must lie in the good growth class")
    d = degree(base)
    cs = []
    for j in range(d + 1):
        c = Fraction(0)
        for k, h in combo:
            c += Fraction(k) * Fraction(h) ** j
        cs.append(c / math.factorial(j))
    return cs, all(c == 0 for c in cs)


# ---------------------------------------------------------------------------
# Exact floor evaluation


def _floor_int_times_root(M: int, n: int, u: int, v: int) -> tuple[int, bool]:
    """floor(M * n^(u/v)) for integers with n >= 1, v >= 1; also whether exact."""
    if M == 0:
        return 0, True
    if M > 0:
        r, exact = gmpy2.iroot(gmpy2.mpz(M) ** v * gmpy2.mpz(n) ** u, v)
        return int(r), bool(exact)
    f, exact = _floor_int_times_root(-M, n, u, v)
    return (-f, True) if exact else (-f - 1, False)


def _floor_rational_plus_power(rat: Fraction, coef: Fraction, p: Fraction, n: int) -> int:
    """Exact floor(rat + coef * n^p) via integer v-th roots."""
    u, v = p.numerator, p.denominator
    if u < 0:
        # Rewrite coef * n^(u/v) = (coef / n^|u|) * n^((v*|u| - |u|) ... ):
        # fold the integer part of the exponent into the rational coefficient.
        k = (-u) // v + 1
        coef = coef / Fraction(n) ** k
        u += k * v
    A, B = rat.numerator, rat.denominator
    a, b = coef.numerator, coef.denominator
    f1, _ = _floor_int_times_root(B * a, n, u, v)
    return (A * b + f1) // (B * b)


def _try_exact_value(e: HardyExpr, n: int) -> Optional[Fraction]:
    """Exact rational value of e(n) when every term is rational at n."""
    total = Fraction(0)
    for t in e.terms:
        if t.q != 0:
            return None
        c = t.coef.constant_value()
        p = t.p
        if p.denominator == 1:
            total += c * Fraction(n) ** int(p)
            continue
        r, exact = gmpy2.iroot(gmpy2.mpz(n) ** abs(p.numerator), p.denominator)
        if not exact:
            return None
        val = Fraction(int(r))
        total += c * (val if p >= 0 else 1 / val)
    return total


_FLOOR_PRECS = (80, 160, 320, 640, 1280, 2560)
_CERT_THRESHOLD = Fraction(1, 2**80)


def floor_eval(e: HardyExpr, n: int) -> int:
    """Exact floor of e(n) for expressions with purely rational coefficients.

    Pure rational values and single fractional-power terms are settled by
    integer root extraction; anything involving log factors falls back to
    escalating-precision interval arithmetic with a certified enclosure.
    """
    if n < 1:
        raise ValueError("floor_eval requires a positive integer argument")
    if e.has_formal_symbols():
        raise ValueError("floor_eval requires rational coefficients, not formal symbols")
    if not e.terms:
        return 0
    exact = _try_exact_value(e, n)
    if exact is not None:
        return exact.numerator // exact.denominator
    power_terms = [t for t in e.terms if t.q == 0 and t.p.denominator != 1]
    rational_terms = [t for t in e.terms if t.q == 0 and t.p.denominator == 1]
    if len(power_terms) == 1 and len(rational_terms) + len(power_terms) == len(e.terms):
        rat = sum((t.coef.constant_value() * Fraction(n) ** int(t.p)
                   for t in rational_terms), Fraction(0))
        t = power_terms[0]
        return _floor_rational_plus_power(rat, t.coef.constant_value(), t.p, n)
    return _floor_by_intervals(e, n)


def _floor_by_intervals(e: HardyExpr, n: int) -> int:
    for prec in _FLOOR_PRECS:
        iv = mpmath.iv.mpf(0)
        with mpmath.workprec(prec):
            ctx = mpmath.iv
            old = ctx.prec
            ctx.prec = prec
            try:
                t_iv = ctx.mpf(n)
                log_iv = ctx.log(t_iv)
                total = ctx.mpf(0)
                for t in e.terms:
                    c = t.coef.constant_value()
                    part = ctx.mpf(c.numerator) / ctx.mpf(c.denominator)
                    if t.p != 0:
                        part *= ctx.exp(log_iv * (ctx.mpf(t.p.numerator) / ctx.mpf(t.p.denominator)))
                    if t.q != 0:
                        part *= ctx.exp(ctx.log(log_iv) * (ctx.mpf(t.q.numerator) / ctx.mpf(t.q.denominator)))
                    total += part
                iv = total
            finally:
                ctx.prec = old
        lo = mpmath.mpf(iv.a)
        hi = mpmath.mpf(iv.b)
        flo = int(mpmath.floor(lo))
        fhi = int(mpmath.floor(hi))
        if flo == fhi:
            return flo
        if mpmath.mpf(hi - lo) < mpmath.mpf(_CERT_THRESHOLD.numerator) / mpmath.mpf(_CERT_THRESHOLD.denominator):
            raise PrecisionExhausted(
                f"value of expression at n={n} is within 2^-80 of the integer {fhi}")
    raise PrecisionExhausted(f"interval evaluation did not separate floor at n={n}")


def eval_numeric(e: HardyExpr, t, subs: Optional[dict[int, int]] = None, prec: int = 120):
    """Numeric value of the stored terms at t (truncation tail ignored)."""
    subs = subs or {}
    with mpmath.workprec(prec):
        tv = mpmath.mpf(t)
        lg = mpmath.log(tv)
        total = mpmath.mpf(0)
        for term in e.terms:
            c = term.coef(subs)
            part = mpmath.mpf(c.numerator) / mpmath.mpf(c.denominator)
            if term.p != 0:
                part *= tv ** (mpmath.mpf(term.p.numerator) / term.p.denominator)
            if term.q != 0:
                part *= lg ** (mpmath.mpf(term.q.numerator) / term.q.denominator)
            total += part
        return total
