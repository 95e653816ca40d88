"""Finite-scale witnesses for density and syndetic pattern statements.

Searches are exhaustive over declared boxes, so an empty result is always
reported as absence at scale, never as a refutation of an asymptotic claim.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .floors import floor_range
from .hardy import HardyExpr

__all__ = [
    "DenseSet",
    "SyndeticSet",
    "ConfigWitness",
    "find_multidim_config",
    "verify_config",
    "SyndeticWitness",
    "syndetic_system_solve",
    "IntersectionReport",
    "intersection_average",
]


@dataclass(frozen=True)
class DenseSet:
    """Subset of the lattice box [-L, L]^dim held as a bit array."""

    dim: int
    radius: int
    cells: np.ndarray  # bool, shape (2L+1,)*dim

    def __post_init__(self):
        expect = (2 * self.radius + 1,) * self.dim
        if self.cells.shape != expect:
            raise ValueError(f"cells shape {self.cells.shape} != {expect}")

    @property
    def density(self) -> Fraction:
        return Fraction(int(self.cells.sum()), (2 * self.radius) ** self.dim)

    def contains(self, point: Sequence[int]) -> bool:
        idx = tuple(int(c) + self.radius for c in point)
        if any(not 0 <= i < 2 * self.radius + 1 for i in idx):
            return False
        return bool(self.cells[idx])

    @staticmethod
    def full(radius: int, dim: int) -> "DenseSet":
        return DenseSet(dim, radius, np.ones((2 * radius + 1,) * dim, dtype=bool))

    @staticmethod
    def random(radius: int, dim: int, density: float, seed: int) -> "DenseSet":
        rng = np.random.default_rng(seed)
        cells = rng.random((2 * radius + 1,) * dim) < density
        return DenseSet(dim, radius, cells)


def _shifted(cells: np.ndarray, offset: Sequence[int]) -> np.ndarray:
    """cells translated by -offset with False fill: out[v] = cells[v + offset]."""
    out = np.zeros_like(cells)
    src = []
    dst = []
    for o, size in zip(offset, cells.shape):
        o = int(o)
        if abs(o) >= size:
            return out
        if o >= 0:
            src.append(slice(o, size))
            dst.append(slice(0, size - o))
        else:
            src.append(slice(0, size + o))
            dst.append(slice(-o, size))
    out[tuple(dst)] = cells[tuple(src)]
    return out


@dataclass(frozen=True)
class ConfigWitness:
    v: tuple[int, ...]
    n: int


def find_multidim_config(
    E: DenseSet,
    vectors: Sequence[Sequence[int]],
    exprs: Sequence[HardyExpr],
    n_max: int,
    limit: Optional[int] = None,
) -> list[ConfigWitness]:
    """All (v, n) with v, v + [a_1(n)] v_1, ..., v + [a_l(n)] v_l inside E,
    ordered lexicographically by (v, n)."""
    if len(vectors) != len(exprs):
        raise ValueError("one direction vector per iterate is required")
    seqs = [floor_range(a, n_max) for a in exprs]
    masks = []
    for n in range(1, n_max + 1):
        mask = E.cells.copy()
        for v, fs in zip(vectors, seqs):
            offset = [fs.value(n) * int(c) for c in v]
            mask &= _shifted(E.cells, offset)
            if not mask.any():
                break
        masks.append(mask)
    any_mask = np.zeros_like(E.cells)
    for m in masks:
        any_mask |= m
    # argwhere is row-major, which is exactly lexicographic order in v.
    found: list[ConfigWitness] = []
    for idx in np.argwhere(any_mask):
        pos = tuple(idx)
        v = tuple(int(i) - E.radius for i in idx)
        for n, m in enumerate(masks, start=1):
            if m[pos]:
                found.append(ConfigWitness(v, n))
                if limit is not None and len(found) >= limit:
                    return found
    return found


def verify_config(
    E: DenseSet,
    w: ConfigWitness,
    vectors: Sequence[Sequence[int]],
    exprs: Sequence[HardyExpr],
) -> bool:
    """Independent membership re-check of one witness."""
    from .hardy import floor_eval

    if not E.contains(w.v):
        return False
    for v, a in zip(vectors, exprs):
        p = floor_eval(a, w.n)
        point = tuple(int(c) + p * int(vi) for c, vi in zip(w.v, v))
        if not E.contains(point):
            return False
    return True


@dataclass(frozen=True)
class SyndeticSet:
    """Subset of [1, limit] with verified gap bound."""

    elements: np.ndarray
    gap_bound: int
    limit: int

    def __post_init__(self):
        e = self.elements
        if len(e) == 0:
            raise ValueError("a syndetic set cannot be empty")
        gaps = np.diff(np.concatenate(([0], e, [self.limit + 1])))
        if gaps.max() > self.gap_bound + 1:
            raise ValueError(
                f"gap {int(gaps.max()) - 1} exceeds declared bound {self.gap_bound}")

    @staticmethod
    def arithmetic_progression(start: int, modulus: int, limit: int) -> "SyndeticSet":
        if not 1 <= start <= modulus:
            raise ValueError("progression start must lie in [1, modulus]")
        return SyndeticSet(np.arange(start, limit + 1, modulus, dtype=np.int64),
                           modulus, limit)

    def bitmap(self) -> np.ndarray:
        b = np.zeros(self.limit + 1, dtype=bool)
        b[self.elements] = True
        return b


@dataclass(frozen=True)
class SyndeticWitness:
    xs: tuple[int, ...]  # x_0, x_1, ..., x_l
    n: int
    found: bool = True


def syndetic_system_solve(
    sets: Sequence[SyndeticSet],
    c: int,
    cs: Sequence[int],
    exprs: Sequence[HardyExpr],
    n_max: int,
) -> Optional[SyndeticWitness]:
    """First solution of c_i x_i - c x_0 = [a_i(n)] with x_i in the i-th set,
    scanning n upward then x_0 upward; None reports absence at this scale."""
    if not (len(sets) == len(cs) + 1 == len(exprs) + 1):
        raise ValueError("need one set per variable and one expression per equation")
    seqs = [floor_range(a, n_max) for a in exprs]
    bitmaps = [s.bitmap() for s in sets]
    limits = [s.limit for s in sets]
    x0s = sets[0].elements
    for n in range(1, n_max + 1):
        ok = np.ones(len(x0s), dtype=bool)
        quotients = []
        for i, (ci, fs) in enumerate(zip(cs, seqs), start=1):
            t = c * x0s + fs.value(n)
            q = t // ci
            valid = (t % ci == 0) & (q >= 1) & (q <= limits[i])
            safe_q = np.where(valid, q, 1)
            valid &= bitmaps[i][safe_q]
            ok &= valid
            quotients.append(q)
            if not ok.any():
                break
        else:
            j = int(np.argmax(ok))
            xs = (int(x0s[j]),) + tuple(int(q[j]) for q in quotients)
            return SyndeticWitness(xs, n)
    return None


@dataclass(frozen=True)
class IntersectionReport:
    n: int
    mean_density: float
    alpha: float
    lower_bound: float
    boundary_fraction: float
    vacuous: bool


def intersection_average(
    sets: Sequence[DenseSet],
    vectors: Sequence[Sequence[int]],
    exprs: Sequence[HardyExpr],
    N: int,
    alpha: Optional[float] = None,
) -> IntersectionReport:
    """Box-truncated average of the density of E_0 cap (E_1 - [a_1(n)] v_1)
    cap ... against alpha^(l+1).

    Densities are taken over the overlap region where every shifted position
    stays inside the box; the worst truncated fraction is reported.
    """
    e0 = sets[0]
    others = sets[1:]
    if len(others) != len(vectors) or len(vectors) != len(exprs):
        raise ValueError("need one set, one vector, and one expression per shift")
    if alpha is None:
        inter = e0.cells.copy()
        for s in others:
            inter &= s.cells
        a = float(inter.sum() / e0.cells.size)
    else:
        a = float(alpha)
    seqs = [floor_range(ex, N) for ex in exprs]
    total = 0.0
    worst_boundary = 0.0
    box = np.prod(e0.cells.shape)
    for n in range(1, N + 1):
        mask = e0.cells.copy()
        region = np.ones_like(mask)
        for s, v, fs in zip(others, vectors, seqs):
            offset = [fs.value(n) * int(cc) for cc in v]
            mask &= _shifted(s.cells, offset)
            region &= _shifted(np.ones_like(s.cells), offset)
        overlap = int(region.sum())
        worst_boundary = max(worst_boundary, 1.0 - overlap / box)
        total += (mask.sum() / overlap) if overlap else 0.0
    mean_density = total / N
    ell = len(others)
    vacuous = a <= 0.0
    return IntersectionReport(N, float(mean_density), a, a ** (ell + 1),
                              float(worst_boundary), vacuous)
