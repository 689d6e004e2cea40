"""Finite-lifetime examples and homotopy sweeps of the chiral index.

On ``(0, T) x S^1`` with plane waves ``e_{k,L} ~ e^{ikt + ik phi}`` and
``e_{k,R} ~ e^{-ikt + ik phi}`` the signature operator splits into 2x2
blocks, one per momentum.  On the basis ``(e_{k,L}, e_{k,R})``

    (e_{k,R} | S e_{k,L}) = (e^{2ikT} - 1) / (4 pi i k),    k != 0,
    (e_{0,R} | S e_{0,L}) = T / 2pi,

and the other off-diagonal entry is the complex conjugate, so each block
is Hermitian.  With a conformal factor ``f(t)`` the pairing becomes
``c_k = (1/2pi) int_0^T f(t) e^{2ikt} dt``, whose leading behaviour is
``-f(0) / (4 pi i k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Any, Callable, Sequence

import numpy as np

from .index import IndexReport, TruncationPolicy, stabilize_index
from .modes import LEFT, RIGHT, Mode
from .pinum import PiRational
from .spectral import SparseComplexOperator, adjoint

MIN_SAMPLES = 4096
ASYMPTOTIC_SAMPLES = 2**18 + 1


def lifetime_modes(K: int, chirality: str) -> tuple[Mode, ...]:
    sign = -1 if chirality == LEFT else 1
    return tuple(Mode(k, chirality, Fraction(sign * k)) for k in range(-K, K + 1))


def lifetime_pairing(k: int, T) -> complex:
    """``(e_{k,R} | S e_{k,L})``."""
    T = PiRational.parse(T)
    if k == 0:
        return float(T) / (2 * math.pi)
    return (T.exp_i(2 * k) - 1) / (4j * math.pi * k)


def lifetime_block(k: int, T) -> SparseComplexOperator:
    """The 2x2 block of ``S`` on ``(e_{k,L}, e_{k,R})``."""
    L, R = Mode(k, LEFT, Fraction(-k)), Mode(k, RIGHT, Fraction(k))
    v = lifetime_pairing(k, T)
    return SparseComplexOperator((L, R), (L, R), {(R, L): v, (L, R): v.conjugate()})


def assemble_lifetime(T, K: int) -> tuple[SparseComplexOperator, SparseComplexOperator]:
    """``S_L`` restricted to ``H_L`` and ``S_R`` restricted to ``H_R`` for ``|k| <= K``."""
    T = PiRational.parse(T)
    left, right = lifetime_modes(K, LEFT), lifetime_modes(K, RIGHT)
    entries = {(r, l): lifetime_pairing(l.k, T) for l, r in zip(left, right)}
    S_L = SparseComplexOperator(left, right, entries)
    return S_L, adjoint(S_L)


def lifetime_index0(T, K: int, policy: TruncationPolicy | None = None) -> IndexReport:
    """Index stabilized at ``K // 2`` and ``K``; ``zero_blocks`` is the degenerate-block census."""
    T = PiRational.parse(T)
    return stabilize_index(lambda kk: assemble_lifetime(T, kk), K // 2, K, policy)


# -- conformal bumps ------------------------------------------------------


@dataclass(frozen=True)
class SampledFunction:
    """Values on the uniform grid ``t_j = j T / (M - 1)``, ``j = 0 .. M-1``."""

    T: float
    values: np.ndarray

    @classmethod
    def from_callable(cls, f: Callable[[np.ndarray], np.ndarray], T, M: int = MIN_SAMPLES) -> "SampledFunction":
        T = float(PiRational.parse(T)) if not isinstance(T, float) else T
        t = np.linspace(0.0, T, M)
        return cls(T, np.asarray(f(t), dtype=float))

    @property
    def f0(self) -> float:
        return float(self.values[0])

    def scaled(self, c: float) -> "SampledFunction":
        return SampledFunction(self.T, c * self.values)


def cos4_bump(T: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda t: np.cos(np.pi * t / (2 * T)) ** 4


def poly_bump(T: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda t: (1 - (t / T) ** 2) ** 3


def sin4_bump(T: float) -> Callable[[np.ndarray], np.ndarray]:
    """A bump with ``f(0) = 0``."""
    return lambda t: np.sin(np.pi * t / T) ** 4


BUMPS = {"cos4": cos4_bump, "poly3": poly_bump, "sin4": sin4_bump}


def conformal_coeffs(f: SampledFunction, ks: Sequence[int], chunk: int = 16) -> np.ndarray:
    """``c_k = (1/2pi) int_0^T f e^{2ikt} dt`` by the trapezoid rule."""
    M = len(f.values)
    if M < MIN_SAMPLES:
        raise ValueError(f"grid too coarse: {M} samples, need at least {MIN_SAMPLES}")
    h = f.T / (M - 1)
    t = np.linspace(0.0, f.T, M)
    w = np.full(M, h)
    w[0] = w[-1] = h / 2
    fw = f.values * w
    ks = np.asarray(list(ks))
    out = np.empty(len(ks), dtype=complex)
    for start in range(0, len(ks), chunk):
        kk = ks[start : start + chunk]
        out[start : start + chunk] = np.exp(2j * np.outer(kk, t)) @ fw
    return out / (2 * math.pi)


def conformal_coeff(f: SampledFunction, k: int) -> complex:
    return complex(conformal_coeffs(f, [k])[0])


@dataclass(frozen=True)
class AsymptoticReport:
    ks: tuple[int, ...]
    residuals: dict  # sign -> array of |k^2 (c_k - sign f(0)/(4 pi i k))|
    bounded: dict  # sign -> bool
    bounded_sign: int | None
    tolerance: float = 0.25

    def max_residual(self, sign: int) -> float:
        return float(np.max(self.residuals[sign]))


def asymptotic_check(f: SampledFunction, K: int, tolerance: float = 0.25) -> AsymptoticReport:
    """Compare ``c_k`` with ``sign * f(0) / (4 pi i k)`` for ``k`` in ``[K/2, K]``.

    A sign counts as bounded when the largest scaled residual over the range
    stays within ``1 + tolerance`` times its value at ``k = K/2``.  ``f``
    should be sampled finely: the trapezoid error grows like ``k h^2``.
    """
    ks = tuple(range(max(1, K // 2), K + 1))
    c = conformal_coeffs(f, ks)
    kk = np.array(ks, dtype=float)
    residuals, bounded = {}, {}
    for sign in (1, -1):
        lead = sign * f.f0 / (4j * math.pi * kk)
        r = np.abs(kk**2 * (c - lead))
        residuals[sign] = r
        bounded[sign] = bool(np.max(r) <= (1 + tolerance) * r[0])
    good = [s for s in (1, -1) if bounded[s]]
    return AsymptoticReport(ks, residuals, bounded, good[0] if len(good) == 1 else None, tolerance)


def assemble_conformal(f: SampledFunction, K: int) -> tuple[SparseComplexOperator, SparseComplexOperator]:
    left, right = lifetime_modes(K, LEFT), lifetime_modes(K, RIGHT)
    c = conformal_coeffs(f, range(-K, K + 1))
    S_L = SparseComplexOperator(left, right, {(r, l): v for l, r, v in zip(left, right, c)})
    return S_L, adjoint(S_L)


# -- sweeps ----------------------------------------------------------------


@dataclass(frozen=True)
class HomotopyPath:
    """``family(s)`` gives the scenario parameters at ``s``; ``steps`` values from 0 to 1."""

    steps: int
    family: Callable[[Fraction], Any]
    description: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.steps < 2:
            raise ValueError("a path needs at least two steps")

    @property
    def parameters(self) -> list[Fraction]:
        return [Fraction(i, self.steps - 1) for i in range(self.steps)]


@dataclass(frozen=True)
class SweepReport:
    s: tuple[Fraction, ...]
    reports: tuple[IndexReport, ...]
    operator_diffs: tuple[float, ...]
    sobolev_diffs: tuple[float, ...]
    verdict: str
    verdict_step: int | None

    @property
    def indices(self) -> list[int | None]:
        return [r.index for r in self.reports]


def _op_norm(A: SparseComplexOperator) -> float:
    if A.nnz == 0:
        return 0.0
    return float(np.linalg.norm(A.to_dense(), 2))


def _sobolev_weighted(A: SparseComplexOperator) -> SparseComplexOperator:
    entries = {(r, c): v * math.sqrt(1 + r.k * r.k) for (r, c), v in A.entries.items()}
    return SparseComplexOperator(A.domain, A.codomain, entries)


def homotopy_sweep(
    path: HomotopyPath,
    builder: Callable[[Any, int], tuple],
    K: int,
    policy: TruncationPolicy | None = None,
) -> SweepReport:
    """Stabilized index at every step (cutoffs ``K // 2`` and ``K``) plus continuity data.

    ``builder(params, K)`` returns the restricted pair ``(S_L, S_R)``.  The
    Sobolev-weighted difference multiplies each output row of momentum
    ``k`` by ``sqrt(1 + k^2)``.
    """
    if path.steps < 3:
        raise ValueError("a sweep needs at least three steps")
    params = [path.family(s) for s in path.parameters]
    reports = tuple(stabilize_index(lambda kk, q=q: builder(q, kk), K // 2, K, policy) for q in params)
    ops = [builder(q, K)[0] for q in params]
    op_diffs, sob_diffs = [], []
    for a, b in zip(ops, ops[1:]):
        d = b - a
        op_diffs.append(_op_norm(d))
        sob_diffs.append(_op_norm(_sobolev_weighted(d)))
    verdict, step = "constant", None
    for i, r in enumerate(reports):
        if not r.finite:
            verdict, step = f"undefined at step {i}", i
            break
    else:
        for i in range(1, len(reports)):
            if reports[i].index != reports[i - 1].index:
                verdict, step = f"jump at step {i}", i
                break
    return SweepReport(tuple(path.parameters), reports, tuple(op_diffs), tuple(sob_diffs), verdict, step)


def lifetime_path(T0, T1, steps: int) -> HomotopyPath:
    T0, T1 = PiRational.parse(T0), PiRational.parse(T1)
    return HomotopyPath(steps, lambda s: T0.lerp(T1, s), {"scenario": "lifetime", "from": str(T0), "to": str(T1)})


def conformal_path(f0: SampledFunction, f1: SampledFunction, steps: int) -> HomotopyPath:
    if f0.T != f1.T or len(f0.values) != len(f1.values):
        raise ValueError("endpoint bumps must share the lifetime and the sample grid")

    def family(s):
        s = float(s)
        return SampledFunction(f0.T, (1 - s) * f0.values + s * f1.values)

    return HomotopyPath(steps, family, {"scenario": "conformal"})


def lifetime_builder(T, K: int):
    return assemble_lifetime(T, K)


def conformal_builder(f: SampledFunction, K: int):
    return assemble_conformal(f, K)


def census(report: IndexReport) -> dict:
    """Degenerate-block counts at both stabilization cutoffs."""
    stab = report.truncation.get("stabilization", {})
    return {"K1": stab.get("zero_blocks_K1"), "K2": report.zero_blocks}


def with_note(report: IndexReport, note: str) -> IndexReport:
    return replace(report, notes=report.notes + (note,))
