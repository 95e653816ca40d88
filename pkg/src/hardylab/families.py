"""Ordered families of tuples of growth functions and their reduction.

A family is an ordered list of m tuples, each of length ell, with entries
drawn from integer combinations of shifts of per-row base functions.  The
engine computes the family's matrix type, verifies the domination conditions
that make a family "nice", applies the shift-and-difference operation with a
fresh formal offset, and iterates until every entry has sub-linear growth.
Each step must strictly reduce the type in the row-major lexicographic
order, which is what forces termination.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

from . import hardy
from .hardy import (
    DEFAULT_ORDER,
    HardyExpr,
    Offset,
    OffsetLike,
    ZERO_EXPR,
    as_offset,
    degree,
    equivalent,
    growth_key,
    in_good_class,
    leading_term,
    lincomb,
    shift,
)

__all__ = [
    "ReductionError",
    "NotNice",
    "DegreeZero",
    "MaxStepsExceeded",
    "TupleFamily",
    "TypeMatrix",
    "ReductionStep",
    "ReductionTrace",
    "prime_subfamily",
    "type_matrix",
    "type_less",
    "is_nice",
    "vdc_operation",
    "choose_reduction_tuple",
    "reduce_fully",
]


class ReductionError(Exception):
    pass


class NotNice(ReductionError):
    pass


class DegreeZero(ReductionError):
    pass


class MaxStepsExceeded(ReductionError):
    def __init__(self, message: str, family: "TupleFamily"):
        super().__init__(message)
        self.family = family


def _is_bounded(e: HardyExpr) -> bool:
    lt = leading_term(e)
    return lt is None or (lt.p, lt.q) <= (0, 0)


def _is_unbounded(e: HardyExpr) -> bool:
    return not _is_bounded(e)


@dataclass(frozen=True)
class TupleFamily:
    """Ordered family of m ell-tuples, optionally tied to per-row bases.

    When bases are given, every entry must be an integer combination of
    shifts of the corresponding base (or zero); mixed display-only families
    pass bases=None, which disables reduction.
    """

    tuples: tuple[tuple[HardyExpr, ...], ...]
    bases: Optional[tuple[HardyExpr, ...]] = None

    def __post_init__(self):
        if not self.tuples:
            raise ValueError("family must contain at least one tuple")
        ells = {len(t) for t in self.tuples}
        if len(ells) != 1:
            raise ValueError("all tuples must share one length")
        if self.bases is not None and len(self.bases) != self.ell:
            raise ValueError("one base per coordinate is required")
        for tup in self.tuples:
            if all(_is_bounded(e) for e in tup):
                raise ValueError(
                    "families must not contain tuples of bounded functions")

    @property
    def ell(self) -> int:
        return len(self.tuples[0])

    @property
    def m(self) -> int:
        return len(self.tuples)

    @property
    def degree(self) -> int:
        return max(degree(e) for tup in self.tuples for e in tup)

    def entry(self, row: int, j: int) -> HardyExpr:
        """Entry in 1-based row `row` of 1-based tuple `j`."""
        return self.tuples[j - 1][row - 1]

    def __str__(self) -> str:
        from .grammar import format_family

        return format_family(list(self.tuples))


def prime_subfamily(family: TupleFamily, row: int) -> list[HardyExpr]:
    """Row entries that are unbounded while all earlier rows of their tuple
    are bounded (1-based row index)."""
    return [e for _, e in _prime_indexed(family, row - 1)]


def _prime_indexed(family: TupleFamily, row0: int) -> list[tuple[int, HardyExpr]]:
    out = []
    for j, tup in enumerate(family.tuples):
        if _is_bounded(tup[row0]):
            continue
        if all(_is_bounded(tup[i]) for i in range(row0)):
            out.append((j, tup[row0]))
    return out


@dataclass(frozen=True, order=False)
class TypeMatrix:
    """ell x (d+1) counts of non-equivalent degree classes, leftmost column
    holding degree d; ordered row-major lexicographically."""

    rows: tuple[tuple[int, ...], ...]

    @property
    def d(self) -> int:
        return len(self.rows[0]) - 1

    def __lt__(self, other: "TypeMatrix") -> bool:
        return self.rows < other.rows

    def as_lists(self) -> list[list[int]]:
        return [list(r) for r in self.rows]

    def __str__(self) -> str:
        return "(" + " / ".join(" ".join(str(x) for x in r) for r in self.rows) + ")"


def _equivalence_class_count(entries: Sequence[HardyExpr]) -> int:
    """Number of pairwise non-equivalent entries (all of equal degree).

    Entries with different leading (exponent, coefficient) data are never
    equivalent at equal degree, so the quadratic check runs only inside
    those groups.
    """
    groups: dict[tuple, list[HardyExpr]] = {}
    for e in entries:
        lt = leading_term(e)
        groups.setdefault((lt.p, lt.q, lt.coef.key()), []).append(e)
    count = 0
    for group in groups.values():
        reps: list[HardyExpr] = []
        for e in group:
            if not any(equivalent(e, r) for r in reps):
                reps.append(e)
        count += len(reps)
    return count


def type_matrix(family: TupleFamily, d: Optional[int] = None) -> TypeMatrix:
    """Matrix type of the family; d fixes the column count (family degree
    by default) so that types along a reduction trace share a shape."""
    if d is None:
        d = family.degree
    if d < 0:
        raise ValueError("family degree must be nonnegative")
    rows = []
    for row0 in range(family.ell):
        prime = [e for _, e in _prime_indexed(family, row0)]
        by_degree: dict[int, list[HardyExpr]] = {}
        for e in prime:
            by_degree.setdefault(degree(e), []).append(e)
        counts = [0] * (d + 1)
        for dd, group in by_degree.items():
            if dd > d:
                raise ValueError("entry degree exceeds the declared matrix width")
            counts[d - dd] = _equivalence_class_count(group)
        rows.append(tuple(counts))
    return TypeMatrix(tuple(rows))


def type_less(w1: TypeMatrix, w2: TypeMatrix) -> bool:
    """Strict row-major lexicographic comparison w1 < w2."""
    if w1.d != w2.d or len(w1.rows) != len(w2.rows):
        raise ValueError("type matrices must share a shape to be compared")
    return w1.rows < w2.rows


@dataclass(frozen=True)
class NiceReport:
    ok: bool
    violations: tuple[str, ...] = ()


def _diff(a: HardyExpr, b: HardyExpr) -> HardyExpr:
    return lincomb([1, -1], [a, b])


def _tends_to_infinity(e: HardyExpr) -> bool:
    lt = leading_term(e)
    return lt is not None and (lt.p, lt.q) > (0, 0)


def _weakly_dominated(a: HardyExpr, b: HardyExpr) -> bool:
    """|a| <= C |b|: leading key of a is at most that of b."""
    ka = growth_key(a) if leading_term(a) is not None else None
    if ka is None:
        return True
    kb = growth_key(b) if leading_term(b) is not None else None
    if kb is None:
        return False
    return ka <= kb


def _strictly_dominated(a: HardyExpr, b: HardyExpr) -> bool:
    """a/b -> 0: leading key of a strictly below that of b."""
    ka = growth_key(a) if leading_term(a) is not None else None
    if ka is None:
        return leading_term(b) is not None
    kb = growth_key(b) if leading_term(b) is not None else None
    if kb is None:
        return False
    return ka < kb


def _member_of_shift_span(e: HardyExpr, base: HardyExpr) -> bool:
    """Structural check that e is an integer combination of natural shifts
    of the base (formal offsets count as large naturals)."""
    if e.is_zero():
        return True
    if e.origin is None:
        return False
    bk = base.base_key()
    for (atom_base, deriv, off), coef in e.origin.items():
        if atom_base != bk or deriv != 0:
            return False
        if not coef.is_constant() or coef.constant_value().denominator != 1:
            return False
        if off.const.denominator != 1 or off.const < 0:
            return False
        if any(c < 0 for _, c in off.syms):
            return False
    return True


def is_nice(family: TupleFamily) -> NiceReport:
    """Check the three domination conditions (plus base membership when the
    family declares bases).  Formal-offset claims hold for all large enough
    offsets because surviving coefficient polynomials are not identically
    zero."""
    v: list[str] = []
    tuples = family.tuples
    a11 = tuples[0][0]
    if family.bases is not None:
        for i, base in enumerate(family.bases):
            if not in_good_class(base):
                v.append(f"base {i+1} is not in the good growth class")
        for j, tup in enumerate(family.tuples):
            for i, e in enumerate(tup):
                if family.bases is not None and not _member_of_shift_span(e, family.bases[i]):
                    v.append(f"entry ({i+1},{j+1}) is not a shift combination of base {i+1}")
    if _is_bounded(a11):
        v.append("leading entry (1,1) is bounded")
        return NiceReport(False, tuple(v))
    for j in range(1, family.m):
        d1j = _diff(a11, tuples[j][0])
        if not _tends_to_infinity(d1j):
            v.append(f"condition 1: (1,1)-(1,{j+1}) does not tend to infinity")
        if not _weakly_dominated(tuples[j][0], a11):
            v.append(f"condition 1: entry (1,{j+1}) is not dominated by (1,1)")
    for i in range(1, family.ell):
        for j in range(family.m):
            if not _strictly_dominated(tuples[j][i], a11):
                v.append(f"condition 2: entry ({i+1},{j+1}) does not grow strictly below (1,1)")
    for i in range(1, family.ell):
        for j in range(1, family.m):
            lhs = _diff(tuples[0][i], tuples[j][i])
            rhs = _diff(a11, tuples[j][0])
            if not _strictly_dominated(lhs, rhs):
                v.append(
                    f"condition 3: row-{i+1} difference of tuples 1,{j+1} "
                    f"is not strictly below the row-1 difference")
    return NiceReport(not v, tuple(v))


def vdc_operation(
    family: TupleFamily,
    anchor: Sequence[HardyExpr],
    offset: OffsetLike,
    order: int = DEFAULT_ORDER,
) -> TupleFamily:
    """Shift-and-difference operation: emit (S_off tuple - anchor) for every
    tuple, then (tuple - anchor), dropping tuples of bounded entries."""
    if len(anchor) != family.ell:
        raise ValueError("anchor must have one entry per coordinate")
    off = as_offset(offset)
    out: list[tuple[HardyExpr, ...]] = []
    for shifted in (True, False):
        for tup in family.tuples:
            row = []
            for i in range(family.ell):
                e = shift(tup[i], off, order) if shifted else tup[i]
                row.append(_diff(e, anchor[i]))
            out.append(tuple(row))
    kept = [tup for tup in out if any(_is_unbounded(e) for e in tup)]
    if not kept:
        raise ReductionError("operation removed every tuple")
    return TupleFamily(tuple(kept), family.bases)


def _shift_complexity(e: HardyExpr) -> int:
    if e.origin is None:
        return 0
    return sum(
        sum(abs(c) for _, c in off.syms) + (0 if off.const == 0 else 1)
        for (_, _, off) in e.origin
    )


def choose_reduction_tuple(family: TupleFamily) -> tuple[HardyExpr, ...]:
    """Anchor choice that makes the shift-and-difference step reduce the type.

    Highest nonempty prime row wins: anchored there with zeros above, using
    the minimal-degree donor.  When only row 1 is populated the anchor is a
    whole tuple: a minimal-degree one whose first entry is non-equivalent to
    the leading entry, otherwise (all equivalent) the structurally simplest
    tuple.  Ties break by tuple index.
    """
    report = is_nice(family)
    if not report.ok:
        raise NotNice("; ".join(report.violations))
    a11 = family.tuples[0][0]
    if degree(a11) < 1:
        raise DegreeZero("reduction applies only to families of positive degree")
    rows = [_prime_indexed(family, i) for i in range(family.ell)]
    top = max(i for i, r in enumerate(rows) if r)
    if top > 0:
        dmin = min(degree(e) for _, e in rows[top])
        j = next(j for j, e in rows[top] if degree(e) == dmin)
        donor = family.tuples[j]
        return tuple(
            ZERO_EXPR if i < top else donor[i] for i in range(family.ell)
        )
    if family.m == 1:
        return family.tuples[0]
    non_equiv = [
        (j, e) for j, e in rows[0] if not equivalent(e, a11)
    ]
    if non_equiv:
        dmin = min(degree(e) for _, e in non_equiv)
        j = next(j for j, e in non_equiv if degree(e) == dmin)
        return family.tuples[j]
    complexities = [
        (sum(_shift_complexity(e) for e in tup), j)
        for j, tup in enumerate(family.tuples)
    ]
    _, j = min(complexities)
    return family.tuples[j]


@dataclass(frozen=True)
class ReductionStep:
    family: TupleFamily
    type_before: TypeMatrix
    anchor: tuple[HardyExpr, ...]
    offset: Offset
    result: TupleFamily
    type_after: TypeMatrix


@dataclass(frozen=True)
class ReductionTrace:
    initial: TupleFamily
    steps: tuple[ReductionStep, ...]
    terminal: TupleFamily

    @property
    def types(self) -> list[TypeMatrix]:
        if not self.steps:
            return [type_matrix(self.terminal)]
        return [self.steps[0].type_before] + [s.type_after for s in self.steps]


def _fresh_symbol_start(family: TupleFamily) -> int:
    used = set()
    for tup in family.tuples:
        for e in tup:
            for t in e.terms:
                used |= t.coef.symbols()
            for (_, _, off) in e.origin or {}:
                used |= {v for v, _ in off.syms}
    return max(used, default=0) + 1


def reduce_fully(
    family: TupleFamily,
    max_steps: int = 64,
    order: int = DEFAULT_ORDER,
) -> ReductionTrace:
    """Iterate anchor choice + shift-and-difference until the family has
    degree 0, asserting strict type decrease and niceness at every step.

    Each step gets a fresh formal offset symbol, so all claims are generic
    in the offsets.
    """
    report = is_nice(family)
    if not report.ok:
        raise NotNice("; ".join(report.violations))
    width = family.degree
    if width <= 0:
        return ReductionTrace(family, (), family)
    current = family
    sym = _fresh_symbol_start(family)
    steps: list[ReductionStep] = []
    while current.degree >= 1:
        if len(steps) >= max_steps:
            raise MaxStepsExceeded(
                f"no degree-0 family after {max_steps} steps; "
                f"stuck at type {type_matrix(current, width)} with m={current.m}",
                current,
            )
        w_before = type_matrix(current, width)
        anchor = choose_reduction_tuple(current)
        offset = Offset(syms=((sym, 1),))
        sym += 1
        nxt = vdc_operation(current, anchor, offset, order)
        w_after = type_matrix(nxt, width)
        if not type_less(w_after, w_before):
            raise ReductionError(
                f"type did not decrease: {w_before} -> {w_after}")
        nice = is_nice(nxt)
        if not nice.ok:
            raise NotNice(
                "intermediate family is not nice: " + "; ".join(nice.violations))
        steps.append(ReductionStep(current, w_before, anchor, offset, nxt, w_after))
        current = nxt
    return ReductionTrace(family, tuple(steps), current)
