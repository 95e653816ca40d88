"""Multiple ergodic averages along integer-part iterates, and their checks.

The central quantity is (1/N) sum_n  prod_i f_i(T_i^[a_i(n)] x) evaluated at
every sample point, with a running pass that captures each N of a schedule.
Orbit phases are reduced in exact fixed point; observables are evaluated in
floating point; reduction order over n is fixed so reports are reproducible
bit for bit for a given configuration.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from .dynamics import (
    MOD,
    BoxIndicator,
    CyclicRotation,
    FourierSeries,
    ObservableSpec,
    SkewProduct,
    SystemConfig,
    TableObservable,
    TorusRotation,
    TransformSpec,
    conditional_expectation,
)
from .floors import FloorSequence, floor_range
from .hardy import HardyExpr, different_growth, in_good_class

__all__ = [
    "AverageExperiment",
    "ExperimentReport",
    "multi_average",
    "multi_average_schedule",
    "limit_formula_report",
    "recurrence_report",
    "RecurrenceReport",
    "block_average_check",
    "BlockAverageReport",
    "degree_zero_block_check",
    "subsequence_average_check",
    "SubsequenceReport",
    "parity_runs",
    "ParityReport",
]

_CHUNK = 1 << 14


@dataclass(frozen=True)
class AverageExperiment:
    """A multiple-average run: commuting system, observables, iterates.

    Theorem-regime experiments must use good-class iterates of pairwise
    different growth; anything else must declare which hypothesis fails in
    the regime tag (e.g. "out-of-regime: integer exponent").
    """

    system: SystemConfig
    observables: tuple[ObservableSpec, ...]
    iterates: tuple[HardyExpr, ...]
    schedule: tuple[int, ...]
    regime: str = "theorem"

    def __post_init__(self):
        if len(self.observables) != len(self.iterates):
            raise ValueError("one observable per iterate is required")
        if len(self.iterates) != len(self.system.transforms):
            raise ValueError("one iterate per transform is required")
        if self.regime == "theorem":
            if not all(in_good_class(a) for a in self.iterates):
                raise ValueError(
                    "theorem-regime iterates must lie in the good growth class; "
                    "tag the experiment out-of-regime otherwise")
            if not different_growth(list(self.iterates)):
                raise ValueError(
                    "theorem-regime iterates must have pairwise different growth")
        elif not self.regime.startswith("out-of-regime"):
            raise ValueError(
                "regime must be 'theorem' or 'out-of-regime: <failing hypothesis>'")


BlockEvaluator = Callable[[np.ndarray, int], np.ndarray]


def _torus_fourier_evaluator(T: TorusRotation, f: FourierSeries, points) -> BlockEvaluator:
    combined = []
    for k, c in f.coeffs:
        B = sum(ki * a.raw for ki, a in zip(k, T.angles)) % MOD
        sample_phase = np.array(
            [sum(ki * (x[i] / MOD) for i, ki in enumerate(k)) for x in points]
        )
        combined.append((B, c * np.exp(2j * np.pi * sample_phase)))

    def evaluate(powers: np.ndarray, _n0: int) -> np.ndarray:
        out = np.zeros((len(powers), len(points)), dtype=np.complex128)
        ps = [int(p) for p in powers]
        for B, row in combined:
            if B == 0:
                out += row[None, :]
                continue
            ph = np.fromiter(((p * B) % MOD / MOD for p in ps),
                             dtype=np.float64, count=len(ps))
            out += np.exp(2j * np.pi * ph)[:, None] * row[None, :]
        return out

    return evaluate


def _torus_box_evaluator(T: TorusRotation, f: BoxIndicator, points) -> BlockEvaluator:
    base = np.array([[x[i] / MOD for i in range(T.dim)] for x in points])

    def evaluate(powers: np.ndarray, _n0: int) -> np.ndarray:
        ps = [int(p) for p in powers]
        ok = np.ones((len(ps), len(base)), dtype=bool)
        for i, a in enumerate(T.angles):
            ph = np.fromiter(((p * a.raw) % MOD / MOD for p in ps),
                             dtype=np.float64, count=len(ps))
            y = np.mod(base[None, :, i] + ph[:, None], 1.0)
            lo, hi = f.intervals[i]
            ok &= (y >= float(lo)) & (y < float(hi))
        return ok.astype(np.complex128)

    return evaluate


def _cyclic_evaluator(T: CyclicRotation, f: ObservableSpec, points) -> BlockEvaluator:
    m = T.modulus
    xs = np.array(points, dtype=np.int64)
    if isinstance(f, TableObservable):
        table = np.asarray(f.values, dtype=np.complex128)
    else:
        table = f.eval_fracs((np.arange(m) / m)[:, None])

    def evaluate(powers: np.ndarray, _n0: int) -> np.ndarray:
        shift = (np.asarray(powers, dtype=object) * T.step) % m
        res = (xs[None, :] + shift.astype(np.int64)[:, None]) % m
        return table[res]

    return evaluate


def _skew_evaluator(T: SkewProduct, f: ObservableSpec, points) -> BlockEvaluator:
    def evaluate(powers: np.ndarray, _n0: int) -> np.ndarray:
        ps = [int(p) for p in powers]
        out = np.empty((len(ps), len(points)), dtype=np.complex128)
        for j, (xr, yr) in enumerate(points):
            c1 = np.fromiter((((xr + p * T.alpha.raw) % MOD) / MOD for p in ps),
                             dtype=np.float64, count=len(ps))
            c2 = np.fromiter(
                (((yr + p * xr + (p * (p - 1) // 2) * T.alpha.raw
                   + p * T.beta.raw) % MOD) / MOD for p in ps),
                dtype=np.float64, count=len(ps))
            out[:, j] = f.eval_fracs(np.stack([c1, c2], axis=-1))
        return out

    return evaluate


def _make_evaluator(T: TransformSpec, f: ObservableSpec, points) -> BlockEvaluator:
    if isinstance(T, CyclicRotation):
        return _cyclic_evaluator(T, f, points)
    if isinstance(T, TorusRotation) and isinstance(f, FourierSeries):
        return _torus_fourier_evaluator(T, f, points)
    if isinstance(T, TorusRotation) and isinstance(f, BoxIndicator):
        return _torus_box_evaluator(T, f, points)
    if isinstance(T, SkewProduct):
        return _skew_evaluator(T, f, points)
    raise TypeError(f"no evaluator for {type(T).__name__} with {type(f).__name__}")


def _schedule_pass(
    evaluators: Sequence[BlockEvaluator],
    floor_seqs: Sequence[FloorSequence],
    schedule: Sequence[int],
    n_points: int,
    static: Optional[np.ndarray] = None,
) -> dict[int, np.ndarray]:
    """One pass over n = 1..max(schedule), capturing partial means."""
    checkpoints = sorted(set(schedule))
    max_n = checkpoints[-1]
    running = np.zeros(n_points, dtype=np.complex128)
    results: dict[int, np.ndarray] = {}
    ci = 0
    for start in range(1, max_n + 1, _CHUNK):
        stop = min(start + _CHUNK - 1, max_n)
        prod = None
        for ev, fs in zip(evaluators, floor_seqs):
            powers = fs.values[start - fs.n_start : stop - fs.n_start + 1]
            block = ev(powers, start)
            prod = block if prod is None else prod * block
        if static is not None:
            prod = prod * static[None, :]
        csum = np.cumsum(prod, axis=0)
        while ci < len(checkpoints) and checkpoints[ci] <= stop:
            results[checkpoints[ci]] = (
                running + csum[checkpoints[ci] - start]
            ) / checkpoints[ci]
            ci += 1
        running += csum[-1]
    return results


def multi_average_schedule(exp: AverageExperiment) -> dict[int, np.ndarray]:
    """Per-sample averages (1/N) sum_n prod_i f_i(T_i^[a_i(n)] x) at every
    N in the schedule, in one deterministic pass."""
    points = exp.system.points()
    max_n = max(exp.schedule)
    floor_seqs = [floor_range(a, max_n) for a in exp.iterates]
    evaluators = [
        _make_evaluator(T, f, points)
        for T, f in zip(exp.system.transforms, exp.observables)
    ]
    return _schedule_pass(evaluators, floor_seqs, exp.schedule, len(points))


def multi_average(exp: AverageExperiment, N: int) -> np.ndarray:
    """Per-sample value of the multiple average at one N."""
    sub = AverageExperiment(exp.system, exp.observables, exp.iterates,
                            (N,), exp.regime)
    return multi_average_schedule(sub)[N]


def _target_product(system: SystemConfig, observables, est_n: int, points):
    """Product over i of the invariant projections, per sample point."""
    target = np.ones(len(points), dtype=np.complex128)
    exact = True
    for T, f in zip(system.transforms, observables):
        ce = conditional_expectation(T, f, est_n, points)
        if ce.oracle is not None:
            target = target * ce.oracle
        else:
            target = target * ce.estimates
            exact = False
    return target, exact


@dataclass(frozen=True)
class ExperimentReport:
    """Recorded schedule of averages against the product-projection target."""

    schedule: tuple[int, ...]
    distances: tuple[float, ...]
    target_exact: bool
    verdict: str
    regime: str
    seed: int
    sample_count: int
    tolerance: float

    def rows(self) -> list[tuple[int, float]]:
        return list(zip(self.schedule, self.distances))


def limit_formula_report(
    exp: AverageExperiment,
    tolerance: Optional[float] = None,
    target_estimate_n: int = 20000,
) -> ExperimentReport:
    """L2 distance (over the sample cloud) between the multiple average and
    the product of invariant projections, across the schedule.

    Theorem regime: verdict "consistent" iff the final distance is below
    tolerance and the distances are nonincreasing over the last three
    schedule points.  Out-of-regime runs get verdict "failure-demo" when the
    distance stabilizes away from zero, which is what they exist to show.
    """
    schedule = sorted(set(exp.schedule))
    if tolerance is None:
        tolerance = 10.0 / math.sqrt(schedule[-1])
    points = exp.system.points()
    averages = multi_average_schedule(exp)
    target, exact = _target_product(exp.system, exp.observables,
                                    target_estimate_n, points)
    distances = []
    for N in schedule:
        d = float(np.sqrt(np.mean(np.abs(averages[N] - target) ** 2)))
        distances.append(d)
    tail = distances[-3:]
    monotone = all(tail[i + 1] <= tail[i] + 1e-12 for i in range(len(tail) - 1))
    if exp.regime == "theorem":
        verdict = "consistent" if (distances[-1] <= tolerance and monotone) else "violated"
    else:
        verdict = "failure-demo" if distances[-1] > tolerance else "unexpected-convergence"
    return ExperimentReport(
        tuple(schedule), tuple(distances), exact, verdict, exp.regime,
        exp.system.seed, exp.system.sample_count, tolerance)


@dataclass(frozen=True)
class RecurrenceReport:
    schedule: tuple[int, ...]
    values: tuple[float, ...]
    std_errors: tuple[float, ...]
    floor: float
    verdict: str
    seed: int
    sample_count: int

    def rows(self) -> list[tuple[int, float, float]]:
        return [(n, v, s) for n, v, s in zip(self.schedule, self.values, self.std_errors)]


def recurrence_report(
    system: SystemConfig,
    box: BoxIndicator,
    iterates: Sequence[HardyExpr],
    schedule: Sequence[int],
) -> RecurrenceReport:
    """Sample-measure estimate of (1/N) sum_n mu(A cap T_1^-p1 A cap ...)
    against the mu(A)^(l+1) lower bound, with the sampling standard error."""
    points = system.points()
    schedule = sorted(set(schedule))
    max_n = schedule[-1]
    floor_seqs = [floor_range(a, max_n) for a in iterates]
    evaluators = [_make_evaluator(T, box, points) for T in system.transforms]
    if system.is_cyclic:
        static = _cyclic_indicator(system, box, points)
    else:
        static = box.eval_fracs(
            np.array([[x[i] / MOD for i in range(system.dim)] for x in points]))
    per_sample = _schedule_pass(evaluators, floor_seqs, schedule, len(points), static)
    ell = len(iterates)
    floor_value = float(box.volume()) ** (ell + 1)
    values, ses = [], []
    for N in schedule:
        vals = per_sample[N].real
        values.append(float(vals.mean()))
        ses.append(float(vals.std(ddof=1) / math.sqrt(len(vals))))
    ok = values[-1] >= floor_value - 3 * ses[-1]
    return RecurrenceReport(
        tuple(schedule), tuple(values), tuple(ses), floor_value,
        "floor-holds" if ok else "floor-violated", system.seed, system.sample_count)


def _cyclic_indicator(system: SystemConfig, box: BoxIndicator, points) -> np.ndarray:
    m = system.transforms[0].modulus
    return box.eval_fracs((np.array(points)[:, None] / m))


@dataclass(frozen=True)
class BlockAverageReport:
    r_schedule: tuple[int, ...]
    values: tuple[float, ...]
    n_outer: int
    verdict: str


def block_average_check(
    system: SystemConfig,
    observables: Sequence[ObservableSpec],
    iterates: Sequence[HardyExpr],
    r_schedule: Sequence[int],
    n_outer: int,
    target_estimate_n: int = 20000,
) -> BlockAverageReport:
    """Double-average deviation (1/N) sum_n | (1/R) sum_r prod_i
    f_i(T_i^[a_i(Rn+r)] x) - target(x) |, averaged over samples; the theorem
    says this tends to 0 as R grows, so the verdict checks decrease in R."""
    points = system.points()
    target, _ = _target_product(system, observables, target_estimate_n, points)
    values = []
    for R in sorted(r_schedule):
        top = R * n_outer + R
        floor_seqs = [floor_range(a, top) for a in iterates]
        evaluators = [
            _make_evaluator(T, f, points)
            for T, f in zip(system.transforms, observables)
        ]
        acc = np.zeros(len(points))
        for n in range(1, n_outer + 1):
            lo, hi = R * n + 1, R * n + R
            prod = None
            for ev, fs in zip(evaluators, floor_seqs):
                powers = fs.values[lo - fs.n_start : hi - fs.n_start + 1]
                block = ev(powers, lo)
                prod = block if prod is None else prod * block
            inner = prod.mean(axis=0)
            acc += np.abs(inner - target)
        values.append(float((acc / n_outer).mean()))
    decreasing = all(values[i + 1] <= values[i] + 1e-12 for i in range(len(values) - 1))
    return BlockAverageReport(tuple(sorted(r_schedule)), tuple(values), n_outer,
                              "decreasing" if decreasing else "not-decreasing")


def degree_zero_block_check(expr: HardyExpr, R: int, n_outer: int) -> float:
    """Fraction of n <= n_outer with [a(Rn+r)] = [a(Rn)] for all r <= R;
    tends to 1 for degree-0 iterates."""
    fs = floor_range(expr, R * n_outer + R, n_start=R)
    vals = fs.values
    good = 0
    for n in range(1, n_outer + 1):
        window = vals[n * R - R : n * R - R + R + 1]
        if np.all(window == window[0]):
            good += 1
    return good / n_outer


@dataclass(frozen=True)
class SubsequenceReport:
    direct_average: float
    sampled_average: float
    n: int


def subsequence_average_check(expr: HardyExpr, beta, N: int) -> SubsequenceReport:
    """|1/N sum e(n beta)| next to |1/N sum e([a(n)] beta)| for a sub-linear
    iterate a: averaging along [a(n)] inherits the vanishing mean."""
    from .dynamics import angle, phase_array

    b = angle(beta)
    start = 2 if any(t.q < 0 for t in expr.terms) else 1
    ns = np.arange(start, N + 1)
    direct = abs(np.mean(np.exp(2j * np.pi * phase_array(b.raw, ns))))
    fs = floor_range(expr, N, n_start=start)
    sampled = abs(np.mean(np.exp(2j * np.pi * phase_array(b.raw, fs.values))))
    return SubsequenceReport(float(direct), float(sampled), N)


@dataclass(frozen=True)
class ParityReport:
    longest_run: int
    start_n: int
    parity: int
    n: int


def parity_runs(expr: HardyExpr, N: int) -> ParityReport:
    """Longest run of constant parity in [a(n)], n <= N, and where it sits."""
    fs = floor_range(expr, N)
    par = np.asarray(fs.values, dtype=np.int64) & 1
    change = np.nonzero(np.diff(par))[0]
    starts = np.concatenate(([0], change + 1))
    ends = np.concatenate((change, [len(par) - 1]))
    lengths = ends - starts + 1
    best = int(np.argmax(lengths))
    return ParityReport(int(lengths[best]), int(starts[best] + 1),
                        int(par[starts[best]]), N)
