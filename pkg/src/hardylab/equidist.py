"""Weyl sums, discrepancy, and joint equidistribution of floor sequences.

Phases [a(n)] * alpha are reduced modulo one in exact fixed point before any
floating-point accumulation, so the only float error is in the final complex
exponentials and sums.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np

from .dynamics import MOD, Angle, angle, phase_array
from .floors import FloorSequence, floor_range
from .hardy import HardyExpr

__all__ = [
    "FloorSequence",
    "floor_seq",
    "WeylReport",
    "weyl_sum",
    "star_discrepancy",
    "box_discrepancy",
    "JointEquiReport",
    "joint_equidistribution_check",
    "factorization_check",
]


def floor_seq(expr: HardyExpr, n_end: int, n_start: int = 1) -> FloorSequence:
    """Exact floor sequence [expr(n)]; see floors.floor_range."""
    return floor_range(expr, n_end, n_start)


@dataclass(frozen=True)
class WeylReport:
    expr: str
    alpha: str
    freq: int
    schedule: tuple[int, ...]
    magnitudes: tuple[float, ...]


def weyl_sum(
    expr: HardyExpr,
    alpha: Union[Angle, Fraction, str, float],
    freq: int,
    schedule: Sequence[int],
) -> WeylReport:
    """|(1/N) sum_n e(freq * [expr(n)] * alpha)| at each N of the schedule."""
    from .grammar import format_expr

    a = angle(alpha)
    checkpoints = sorted(set(int(n) for n in schedule))
    fs = floor_range(expr, checkpoints[-1])
    raw = (freq * a.raw) % MOD
    phases = phase_array(raw, fs.values)
    z = np.exp(2j * np.pi * phases)
    csum = np.cumsum(z)
    mags = tuple(float(abs(csum[n - 1]) / n) for n in checkpoints)
    return WeylReport(format_expr(expr), a.label or str(alpha), freq,
                      tuple(checkpoints), mags)


def star_discrepancy(points: np.ndarray) -> float:
    """Exact 1-D star discrepancy via the sorted-sample formula."""
    x = np.sort(np.asarray(points, dtype=np.float64))
    n = len(x)
    i = np.arange(1, n + 1)
    return float(np.max(np.maximum(i / n - x, x - (i - 1) / n)))


def box_discrepancy(points: np.ndarray, grid_bits: int = 4) -> float:
    """Multi-dimensional proxy: max deviation of counts over anchored dyadic
    boxes [0, j/2^g)^d from their volumes (the grid is part of the report)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    n, d = pts.shape
    g = 1 << grid_bits
    idx = np.minimum((pts * g).astype(np.int64), g - 1)
    hist = np.zeros((g,) * d)
    np.add.at(hist, tuple(idx.T), 1.0)
    cum = hist
    for axis in range(d):
        cum = np.cumsum(cum, axis=axis)
    vols = np.ones((g,) * d)
    for axis in range(d):
        shape = [1] * d
        shape[axis] = g
        vols = vols * (np.arange(1, g + 1) / g).reshape(shape)
    return float(np.max(np.abs(cum / n - vols)))


@dataclass(frozen=True)
class JointEquiReport:
    n: int
    grid: int
    max_deviation_uniform: float
    max_deviation_target: float
    finite_orbit: bool


def _marginal_masses(a: Angle, x0: Angle, grid: int) -> np.ndarray:
    """Per-bin mass of the closure of the orbit x0 + n*a on the declared grid."""
    if a.rational is None:
        return np.full(grid, 1.0 / grid)
    q = a.rational.denominator
    pts = [((x0.raw + n * a.raw) % MOD) / MOD for n in range(q)]
    masses = np.zeros(grid)
    for p in pts:
        masses[min(int(p * grid), grid - 1)] += 1.0 / q
    return masses


def joint_equidistribution_check(
    items: Sequence[tuple[HardyExpr, Union[Angle, str, Fraction], Union[Angle, str, Fraction, float]]],
    N: int,
    grid: int = 8,
) -> JointEquiReport:
    """Empirical box frequencies of (frac([a_i(n)] alpha_i + x_i))_i against
    the product measure on the declared grid.

    Rational angles give finite orbit closures; the target measure is then
    the product of the uniform orbit measures instead of Lebesgue, and both
    deviations are reported.
    """
    fracs = []
    marginals = []
    finite = False
    for expr, al, x0 in items:
        a = angle(al)
        x = angle(x0) if not isinstance(x0, Angle) else x0
        fs = floor_range(expr, N)
        raws = (int(p) * a.raw + x.raw for p in fs.values)
        fracs.append(np.fromiter((r % MOD / MOD for r in raws),
                                 dtype=np.float64, count=len(fs.values)))
        marginals.append(_marginal_masses(a, x, grid))
        finite = finite or a.rational is not None
    pts = np.stack(fracs, axis=-1)
    d = pts.shape[1]
    idx = np.minimum((pts * grid).astype(np.int64), grid - 1)
    hist = np.zeros((grid,) * d)
    np.add.at(hist, tuple(idx.T), 1.0)
    emp = hist / N
    uniform = np.full((grid,) * d, (1.0 / grid) ** d)
    target = np.ones((grid,) * d)
    for axis, m in enumerate(marginals):
        shape = [1] * d
        shape[axis] = grid
        target = target * m.reshape(shape)
    return JointEquiReport(
        N, grid,
        float(np.max(np.abs(emp - uniform))),
        float(np.max(np.abs(emp - target))),
        finite,
    )


def factorization_check(
    items: Sequence[tuple[HardyExpr, Union[Angle, str, Fraction], Union[Angle, str, Fraction, float]]],
    N: int,
    blocks: int = 100,
) -> tuple[float, float, float, bool]:
    """Joint character average against the product of per-coordinate orbit
    limits: returns (|joint|, |product|, std_error, within_3_se)."""
    zs = np.ones(N, dtype=np.complex128)
    product = 1.0 + 0j
    for expr, al, x0 in items:
        a = angle(al)
        x = angle(x0) if not isinstance(x0, Angle) else x0
        fs = floor_range(expr, N)
        raws = (int(p) * a.raw + x.raw for p in fs.values)
        ph = np.fromiter((r % MOD / MOD for r in raws), dtype=np.float64, count=N)
        zs = zs * np.exp(2j * np.pi * ph)
        if a.rational is None:
            product *= 0.0
        else:
            q = a.rational.denominator
            orbit = np.exp(2j * np.pi * np.array(
                [((x.raw + n * a.raw) % MOD) / MOD for n in range(q)]))
            product *= orbit.mean()
    joint = zs.mean()
    bl = np.array([b.mean() for b in np.array_split(zs, blocks)])
    se = float(np.abs(bl - joint).std(ddof=1) / math.sqrt(blocks))
    ok = abs(joint - product) <= 3 * se + 1e-12
    return float(abs(joint)), float(abs(product)), se, bool(ok)
