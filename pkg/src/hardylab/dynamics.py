"""Simulable commuting measure-preserving systems and observables.

Torus coordinates are exact fixed-point fractions with 128 bits below the
point, so iterating a rotation by an exponent up to 2^63 costs one big-int
multiply and loses nothing the observables can see.  Floating point enters
only when an observable is evaluated.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import mpmath
import numpy as np

FRAC_BITS = 128
MOD = 1 << FRAC_BITS

__all__ = [
    "FRAC_BITS",
    "MOD",
    "Angle",
    "angle",
    "TorusRotation",
    "CyclicRotation",
    "SkewProduct",
    "TransformSpec",
    "FourierSeries",
    "BoxIndicator",
    "TableObservable",
    "ObservableSpec",
    "SystemConfig",
    "iterate_power",
    "phase_array",
    "orbit_values",
    "conditional_expectation",
    "sample_offsets",
    "OverflowBeyondRange",
]

_MAX_POWER = 1 << 63


class OverflowBeyondRange(Exception):
    """Iterate exponent outside the configured 63-bit magnitude."""


_NAMED_ANGLES = {
    "sqrt2": mpmath.sqrt(2),
    "sqrt3": mpmath.sqrt(3),
    "sqrt5": mpmath.sqrt(5),
    "golden": (1 + mpmath.sqrt(5)) / 2,
    "pi": mpmath.pi,
    "e": mpmath.e,
}


@dataclass(frozen=True)
class Angle:
    """A circle element stored as raw/2^128; rational angles also remember
    their exact fraction so orbit closures stay decidable."""

    raw: int
    rational: Optional[Fraction] = None
    label: str = ""

    def frac_float(self) -> float:
        return self.raw / MOD


def angle(value: Union[Angle, Fraction, int, str, float]) -> Angle:
    """Build an Angle; strings name irrational constants (sqrt2, golden, ...)."""
    if isinstance(value, Angle):
        return value
    if isinstance(value, str):
        if value not in _NAMED_ANGLES:
            raise ValueError(f"unknown named angle {value!r}")
        with mpmath.workprec(FRAC_BITS + 64):
            x = mpmath.frac(+_NAMED_ANGLES[value])
            raw = int(mpmath.floor(x * MOD))
        return Angle(raw, None, value)
    if isinstance(value, float):
        value = Fraction(value).limit_denominator(10**12)
    if isinstance(value, int):
        value = Fraction(value)
    q = value - (value.numerator // value.denominator)
    raw = (q.numerator * MOD) // q.denominator
    return Angle(raw, q, str(value))


@dataclass(frozen=True)
class TorusRotation:
    """x -> x + alpha on the dim-torus."""

    angles: tuple[Angle, ...]

    @property
    def dim(self) -> int:
        return len(self.angles)

    @property
    def is_ergodic_hint(self) -> bool:
        return all(a.rational is None for a in self.angles)


@dataclass(frozen=True)
class CyclicRotation:
    """x -> x + step on Z/modulus."""

    modulus: int
    step: int

    @property
    def dim(self) -> int:
        return 1


@dataclass(frozen=True)
class SkewProduct:
    """(x, y) -> (x + alpha, y + x + beta) on the 2-torus."""

    alpha: Angle
    beta: Angle

    @property
    def dim(self) -> int:
        return 2


TransformSpec = Union[TorusRotation, CyclicRotation, SkewProduct]


def iterate_power(T: TransformSpec, p: int, x):
    """Closed-form T^p applied to a state (tuple of raw ints, or a residue)."""
    if abs(p) >= _MAX_POWER:
        raise OverflowBeyondRange(f"|p| = {abs(p)} exceeds 2^63")
    if isinstance(T, TorusRotation):
        return tuple((xi + p * a.raw) % MOD for xi, a in zip(x, T.angles))
    if isinstance(T, CyclicRotation):
        return (x + p * T.step) % T.modulus
    if isinstance(T, SkewProduct):
        xr, yr = x
        binom = p * (p - 1) // 2
        new_x = (xr + p * T.alpha.raw) % MOD
        new_y = (yr + p * xr + binom * T.alpha.raw + p * T.beta.raw) % MOD
        return (new_x, new_y)
    raise TypeError(f"unsupported transform {T!r}")


def phase_array(raw_angle: int, powers: Sequence[int]) -> np.ndarray:
    """frac(p * alpha) for each p, exactly reduced then converted to float."""
    return np.fromiter(
        ((int(p) * raw_angle) % MOD / MOD for p in powers),
        dtype=np.float64,
        count=len(powers),
    )


# ---------------------------------------------------------------------------
# Observables


@dataclass(frozen=True)
class FourierSeries:
    """Finite trigonometric polynomial sum c_k e(k . x)."""

    coeffs: tuple[tuple[tuple[int, ...], complex], ...]

    @staticmethod
    def from_dict(d: dict) -> "FourierSeries":
        items = []
        for k, c in sorted(d.items()):
            k = (k,) if isinstance(k, int) else tuple(k)
            items.append((k, complex(c)))
        return FourierSeries(tuple(items))

    @property
    def dim(self) -> int:
        return len(self.coeffs[0][0]) if self.coeffs else 1

    @property
    def bound(self) -> float:
        return sum(abs(c) for _, c in self.coeffs)

    def mean(self) -> complex:
        zero = tuple([0] * self.dim)
        for k, c in self.coeffs:
            if k == zero:
                return c
        return 0j

    def eval_fracs(self, fracs: np.ndarray) -> np.ndarray:
        """Evaluate at points given as fractional coordinates (..., dim)."""
        fracs = np.asarray(fracs, dtype=np.float64)
        if fracs.ndim == 1:
            fracs = fracs[:, None]
        out = np.zeros(fracs.shape[:-1], dtype=np.complex128)
        for k, c in self.coeffs:
            phase = np.zeros(fracs.shape[:-1])
            for i, ki in enumerate(k):
                if ki:
                    phase = phase + ki * fracs[..., i]
            out += c * np.exp(2j * np.pi * phase)
        return out


@dataclass(frozen=True)
class BoxIndicator:
    """Indicator of a product of half-open intervals inside [0,1)^dim."""

    intervals: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self):
        for lo, hi in self.intervals:
            if not (0 <= lo < hi <= 1):
                raise ValueError("box intervals must satisfy 0 <= lo < hi <= 1")

    @property
    def dim(self) -> int:
        return len(self.intervals)

    @property
    def bound(self) -> float:
        return 1.0

    def volume(self) -> Fraction:
        v = Fraction(1)
        for lo, hi in self.intervals:
            v *= hi - lo
        return v

    def mean(self) -> complex:
        return complex(float(self.volume()))

    def eval_fracs(self, fracs: np.ndarray) -> np.ndarray:
        fracs = np.asarray(fracs, dtype=np.float64)
        if fracs.ndim == 1:
            fracs = fracs[:, None]
        ok = np.ones(fracs.shape[:-1], dtype=bool)
        for i, (lo, hi) in enumerate(self.intervals):
            x = np.mod(fracs[..., i], 1.0)
            ok &= (x >= float(lo)) & (x < float(hi))
        return ok.astype(np.complex128)


@dataclass(frozen=True)
class TableObservable:
    """Arbitrary complex values on the residues of a cyclic system."""

    values: tuple[complex, ...]

    @property
    def bound(self) -> float:
        return max(abs(v) for v in self.values)

    def eval_residues(self, residues: np.ndarray) -> np.ndarray:
        table = np.asarray(self.values, dtype=np.complex128)
        return table[np.asarray(residues, dtype=np.int64) % len(table)]


ObservableSpec = Union[FourierSeries, BoxIndicator, TableObservable]


# ---------------------------------------------------------------------------
# Systems and orbits


def _commute(T1: TransformSpec, T2: TransformSpec) -> bool:
    if isinstance(T1, TorusRotation) and isinstance(T2, TorusRotation):
        return T1.dim == T2.dim
    if isinstance(T1, CyclicRotation) and isinstance(T2, CyclicRotation):
        return T1.modulus == T2.modulus
    if isinstance(T1, SkewProduct) and isinstance(T2, SkewProduct):
        return T1.alpha == T2.alpha
    return False


def sample_offsets(count: int, dim: int, seed: int, kind: str = "grid") -> list[tuple[int, ...]]:
    """Deterministic sample states as raw fixed-point tuples.

    "grid" places points equispaced with a seeded offset (exact character
    averaging for small frequencies); "random" draws seeded uniforms.
    """
    rng = np.random.default_rng(seed)

    def rand_raw() -> int:
        return int.from_bytes(rng.bytes(16), "big") % MOD

    if kind == "grid":
        per_axis = max(1, round(count ** (1 / dim)))
        offs = [rand_raw() for _ in range(dim)]
        axes = [[(j * MOD + offs[d]) // per_axis % MOD for j in range(per_axis)]
                for d in range(dim)]
        pts = [()]
        for d in range(dim):
            pts = [p + (a,) for p in pts for a in axes[d]]
        return pts
    if kind == "random":
        return [tuple(rand_raw() for _ in range(dim)) for _ in range(count)]
    raise ValueError(f"unknown sample kind {kind!r}")


@dataclass(frozen=True)
class SystemConfig:
    """Commuting transforms on one state space plus a deterministic sample set."""

    transforms: tuple[TransformSpec, ...]
    sample_count: int = 256
    seed: int = 1
    sample_kind: str = "grid"

    def __post_init__(self):
        for i, t1 in enumerate(self.transforms):
            for t2 in self.transforms[i + 1:]:
                if not _commute(t1, t2):
                    raise ValueError(f"transforms {t1} and {t2} do not commute")

    @property
    def dim(self) -> int:
        return self.transforms[0].dim

    @property
    def is_cyclic(self) -> bool:
        return isinstance(self.transforms[0], CyclicRotation)

    def points(self):
        if self.is_cyclic:
            m = self.transforms[0].modulus
            if m <= self.sample_count:
                return list(range(m))
            rng = np.random.default_rng(self.seed)
            return sorted(int(x) for x in rng.choice(m, self.sample_count, replace=False))
        return sample_offsets(self.sample_count, self.dim, self.seed, self.sample_kind)


def orbit_values(T: TransformSpec, f: ObservableSpec, x, powers: Sequence[int]) -> np.ndarray:
    """f(T^p x) for each exponent p, with exact phase reduction."""
    if isinstance(T, CyclicRotation):
        res = np.fromiter(((x + int(p) * T.step) % T.modulus for p in powers),
                          dtype=np.int64, count=len(powers))
        if isinstance(f, TableObservable):
            return f.eval_residues(res)
        fr = res.astype(np.float64) / T.modulus
        return f.eval_fracs(fr[:, None])
    if isinstance(T, TorusRotation):
        cols = []
        for i, a in enumerate(T.angles):
            base = x[i] / MOD
            cols.append(np.mod(base + phase_array(a.raw, powers), 1.0))
        return f.eval_fracs(np.stack(cols, axis=-1))
    if isinstance(T, SkewProduct):
        xr, yr = x
        ps = [int(p) for p in powers]
        col1 = np.fromiter((((xr + p * T.alpha.raw) % MOD) / MOD for p in ps),
                           dtype=np.float64, count=len(ps))
        col2 = np.fromiter(
            (((yr + p * xr + (p * (p - 1) // 2) * T.alpha.raw + p * T.beta.raw) % MOD) / MOD
             for p in ps),
            dtype=np.float64, count=len(ps))
        return f.eval_fracs(np.stack([col1, col2], axis=-1))
    raise TypeError(f"unsupported transform {T!r}")


@dataclass(frozen=True)
class ConditionalExpectation:
    """Birkhoff estimates per sample point, with an exact oracle when the
    transform admits one (ergodic rotation mean, cyclic orbit averages)."""

    estimates: np.ndarray
    oracle: Optional[np.ndarray]
    exact: bool


def conditional_expectation(
    T: TransformSpec, f: ObservableSpec, N: int, points
) -> ConditionalExpectation:
    ests = np.array(
        [np.mean(orbit_values(T, f, x, range(1, N + 1))) for x in points]
    )
    oracle = None
    exact = False
    if isinstance(T, TorusRotation) and T.is_ergodic_hint and not isinstance(f, TableObservable):
        oracle = np.full(len(points), f.mean(), dtype=np.complex128)
        exact = True
    elif isinstance(T, CyclicRotation):
        g = math.gcd(T.step, T.modulus)
        table = _cyclic_table(f, T.modulus)
        orbit_mean = np.empty(T.modulus, dtype=np.complex128)
        for r in range(g):
            idx = np.arange(r, T.modulus, g)
            orbit_mean[idx] = table[idx].mean()
        oracle = np.array([orbit_mean[x] for x in points])
        exact = True
    return ConditionalExpectation(ests, oracle, exact)


def _cyclic_table(f: ObservableSpec, m: int) -> np.ndarray:
    if isinstance(f, TableObservable):
        return np.asarray(f.values, dtype=np.complex128)
    fr = (np.arange(m) / m)[:, None]
    return f.eval_fracs(fr)
