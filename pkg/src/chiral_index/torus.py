"""Massless odd example on the torus ``(0, 2pi) x S^1``.

Plane waves ``e_{k,c}(t, phi) = (1/2pi) exp(-i omega_{k,c} t + i k phi)``
sit in one chiral spinor component.  After the conformal change with factor
``f(phi)`` the space-time inner product of two transformed waves of
opposite chirality is ``delta(omega_R, omega_L) * fhat_{k-k'} / 2pi``, and
waves of equal chirality are orthogonal.  Pairs are found by matching
frequencies from :func:`dispersion` directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .index import IndexReport, TruncationPolicy, chiral_index_odd, stabilize_index
from .modes import LEFT, RIGHT, Mode, chiral_modes, dispersion
from .spectral import SparseComplexOperator, adjoint

__all__ = [
    "FourierSeries",
    "FourierCutoffError",
    "dispersion",
    "fourier_coefficients",
    "poisson_series",
    "poisson_function",
    "constant_series",
    "series_from_function",
    "assemble_torus_sl",
    "torus_index0",
    "quadrature_entry",
]


class FourierCutoffError(ValueError):
    pass


@dataclass(frozen=True)
class FourierSeries:
    """Coefficients of ``f(phi) = (1/2pi) sum_k fhat_k e^{ik phi}`` for ``|k| <= K``.

    Missing coefficients inside the range are zero.  With ``real=True`` the
    series must satisfy ``fhat_{-k} = conj(fhat_k)``.
    """

    K: int
    coeffs: Mapping[int, complex] = field(default_factory=dict)
    real: bool = True

    def __post_init__(self):
        if self.K < 0:
            raise ValueError("cutoff must be nonnegative")
        clean = {}
        for k, v in self.coeffs.items():
            k = int(k)
            if abs(k) > self.K:
                raise ValueError(f"coefficient index {k} beyond cutoff {self.K}")
            clean[k] = complex(v)
        object.__setattr__(self, "coeffs", clean)
        if self.real:
            for k, v in clean.items():
                mirror = clean.get(-k, 0j)
                if abs(mirror - v.conjugate()) > 1e-12 * max(1.0, abs(v)):
                    raise ValueError(f"realness violated at k={k}: fhat_-k != conj(fhat_k)")

    def __getitem__(self, k: int) -> complex:
        if abs(k) > self.K:
            raise FourierCutoffError(f"coefficient {k} needed but series stops at {self.K}")
        return self.coeffs.get(k, 0j)

    def evaluate(self, phi) -> np.ndarray:
        phi = np.asarray(phi, dtype=float)
        out = np.zeros(phi.shape, dtype=complex)
        for k, v in self.coeffs.items():
            out += v * np.exp(1j * k * phi)
        return out / (2 * math.pi)

    def rotated(self, theta: float) -> "FourierSeries":
        """Every coefficient times ``e^{i theta}``; the result is no longer real."""
        phase = complex(math.cos(theta), math.sin(theta))
        return FourierSeries(self.K, {k: v * phase for k, v in self.coeffs.items()}, real=False)


def fourier_coefficients(samples: Sequence[tuple[float, float]], K: int) -> FourierSeries:
    """Coefficients from samples of a real function on a uniform grid.

    ``fhat_k = (2pi/M) sum_j f(phi_j) e^{-ik phi_j}``; the result is
    symmetrized so that the realness condition holds exactly.
    """
    arr = np.asarray(samples, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError("samples must be (phi, value) pairs")
    M = len(arr)
    if M < 8 * K:
        raise ValueError(f"aliasing risk: {M} samples for cutoff {K}, need at least {8 * K}")
    phi, vals = arr[:, 0], arr[:, 1]
    ks = np.arange(-K, K + 1)
    raw = (2 * math.pi / M) * (np.exp(-1j * np.outer(ks, phi)) @ vals)
    coeffs = {}
    for k in range(0, K + 1):
        pos, neg = raw[k + K], raw[-k + K]
        sym = (pos + neg.conjugate()) / 2
        coeffs[k] = sym
        coeffs[-k] = sym.conjugate()
    coeffs[0] = complex(coeffs[0].real)
    return FourierSeries(K, coeffs)


def poisson_series(r: float, K: int) -> FourierSeries:
    """``f(phi) = (1 - r^2) / (1 - 2r cos phi + r^2)``, with ``fhat_k = 2pi r^|k|``."""
    if not 0 <= r < 1:
        raise ValueError("Poisson parameter r must lie in [0, 1)")
    return FourierSeries(K, {k: 2 * math.pi * r ** abs(k) for k in range(-K, K + 1)})


def poisson_function(r: float) -> Callable[[np.ndarray], np.ndarray]:
    return lambda phi: (1 - r * r) / (1 - 2 * r * np.cos(phi) + r * r)


def constant_series(K: int, value: float = 1.0) -> FourierSeries:
    return FourierSeries(K, {0: 2 * math.pi * value})


def series_from_function(f: Callable[[np.ndarray], np.ndarray], K: int, M: int | None = None) -> FourierSeries:
    M = M or max(8 * K, 1024)
    phi = 2 * math.pi * np.arange(M) / M
    return fourier_coefficients(list(zip(phi, f(phi))), K)


def pairing_partner(k_left: int, p: int) -> int | None:
    """Momentum of the right-handed wave sharing the frequency of ``L_k``.

    ``None`` for ``k = -1 .. -p``, whose frequencies fall into the gap.
    """
    omega = dispersion(k_left, p, LEFT)
    if omega <= 0:
        return int(omega)
    k = int(omega) - p
    return k if k > 0 else None


def assemble_torus_sl(
    fhat: FourierSeries, p: int, K: int
) -> tuple[SparseComplexOperator, SparseComplexOperator]:
    """``S_L`` restricted to ``H_L`` (into ``H_R``) and ``S_R`` restricted to ``H_R``.

    Same-chirality entries are never created.
    """
    if p < 1:
        raise ValueError("p must be a positive integer")
    if fhat.K < 2 * K + p:
        raise FourierCutoffError(f"Fourier cutoff {fhat.K} below 2K+p = {2 * K + p}")
    left = chiral_modes(K, p, LEFT)
    right = chiral_modes(K, p, RIGHT)
    by_omega = {m.omega: m for m in right}
    entries = {}
    for col in left:
        row = by_omega.get(col.omega)
        if row is None:
            continue
        entries[(row, col)] = fhat[row.k - col.k] / (2 * math.pi)
    S_L = SparseComplexOperator(left, right, entries)
    return S_L, adjoint(S_L)


def torus_index0(
    fhat: FourierSeries,
    p: int,
    K: int,
    policy: TruncationPolicy | None = None,
    stabilize: bool = True,
) -> IndexReport:
    """Index of the restricted operators, by default stabilized at ``K`` and ``2K``.

    Stabilization needs ``fhat`` to reach ``4K + p``.
    """
    if not stabilize:
        return chiral_index_odd(*assemble_torus_sl(fhat, p, K), policy or TruncationPolicy(K))
    if fhat.K < 4 * K + p:
        raise FourierCutoffError(f"stabilization at 2K needs Fourier cutoff {4 * K + p}, have {fhat.K}")
    return stabilize_index(lambda kk: assemble_torus_sl(fhat, p, kk), K, 2 * K, policy)


def expected_kernel_modes(p: int) -> list[Mode]:
    return [Mode.of(-j, LEFT, p) for j in range(1, p + 1)]


def quadrature_entry(
    f: Callable[[np.ndarray], np.ndarray], row: Mode, col: Mode, n: int = 400
) -> complex:
    """``<e~_row | e~_col>`` by a direct trapezoid rule on an ``n x n`` grid.

    Works with the transformed spinors ``f^{-1/2} e`` and the volume factor
    ``f^2``; the antidiagonal spin product pairs opposite components, so
    same-chirality pairs give zero.
    """
    t = 2 * math.pi * np.arange(n) / n
    phi = 2 * math.pi * np.arange(n) / n
    T, PHI = np.meshgrid(t, phi, indexing="ij")
    fv = f(PHI)

    def spinor(m: Mode):
        wave = np.exp(-1j * float(m.omega) * T + 1j * m.k * PHI) / (2 * math.pi)
        wave = wave / np.sqrt(fv)
        zero = np.zeros_like(wave)
        return (wave, zero) if m.chirality == LEFT else (zero, wave)

    a1, a2 = spinor(row)
    b1, b2 = spinor(col)
    spin = a1.conj() * b2 + a2.conj() * b1
    h = (2 * math.pi / n) ** 2
    return complex(np.sum(spin * fv**2) * h)
