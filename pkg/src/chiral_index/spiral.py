"""Example with a nonzero chiral index of the full signature operator.

Space-time is ``(0, 6pi) x S^1``.  The plane waves are the torus waves; the
time-dependent matrix ``V(t) = [[1, i nu cos(t/3)], [i nu cos(t/3), 1]]``
mixes each wave with two opposite-chirality sidebands shifted in frequency
by ``+-1/3``, and the weight ``mu(t, phi)`` couples lattice points.  The
matrix element of ``S_L`` is

    (e_a | S_L e_b) = int int  conj(R-part of V e_a) * (L-part of V e_b) * mu

over the cell, evaluated exactly as ``12 pi^2`` times a constant term.

Three kinds of ``mu`` terms matter:

* the ``t``-independent part of ``mu_hor`` with ``phi``-frequency ``m``
  links ``L_k'`` to the right-handed wave of equal frequency and momentum
  ``k' + m`` (horizontal links);
* ``mu_vert`` at ``t``-frequency ``n +- 1/3`` links ``R_k`` to ``L_k``
  through the sidebands (vertical links);
* ``a_{+-1}`` and ``Re b_0`` would couple waves of equal chirality
  (nearest-neighbour and diagonal entries), which breaks the single-chain
  structure.  The seeded generator therefore leaves ``a_1 = b_0 = 0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .index import IndexReport, TruncationPolicy, stabilize_index
from .modes import LEFT, RIGHT, Mode, all_modes
from .spectral import SparseComplexOperator
from .trigpoly import CELL_AREA, TrigPoly, TrigSpinor, integrate_cell, trig_mul

POSITIVITY_GRID = 96


class MuPositivityError(ValueError):
    def __init__(self, t: float, phi: float, value: float):
        super().__init__(f"mu is not positive: mu({t:.6g}, {phi:.6g}) = {value:.6g}")
        self.t, self.phi, self.value = t, phi, value


@dataclass(frozen=True)
class MuCoefficients:
    """Coefficients of the weight ``mu = 1 + mu_hor + mu_vert``.

    ``a[k]`` for ``k >= 1`` multiplies ``e^{ik phi}``; ``e^{-ik phi}`` gets
    ``conj(a[k])``, which is what makes ``a(phi)`` real.  ``b[n]`` for any
    integer ``n`` multiplies ``e^{i(n + 1/3)t}``.
    """

    a: Mapping[int, complex] = field(default_factory=dict)
    b: Mapping[int, complex] = field(default_factory=dict)
    nu: float = 1.0

    def __post_init__(self):
        if self.nu == 0:
            raise ValueError("nu must be nonzero")
        a = {}
        for k, v in sorted(self.a.items(), key=lambda kv: -int(kv[0])):
            k, v = int(k), complex(v)
            if k == 0:
                raise ValueError("a has no k = 0 coefficient")
            if k < 0:
                # a real a(phi) forces a_{-k} = a_k; accept only that
                if a.setdefault(-k, v) != v:
                    raise ValueError(f"a_{k} must equal a_{-k} for a real-valued mu")
                continue
            a[k] = v
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", {int(n): complex(v) for n, v in self.b.items()})

    @property
    def a_cutoff(self) -> int:
        return max(self.a, default=0)

    @property
    def b_cutoff(self) -> int:
        return max((abs(n) for n in self.b), default=0)

    def magnitude(self) -> float:
        vals = [abs(v) for v in self.a.values()] + [abs(v) for v in self.b.values()]
        return max(vals, default=0.0)

    def scaled(self, lam: float) -> "MuCoefficients":
        return MuCoefficients(
            {k: lam * v for k, v in self.a.items()}, {n: lam * v for n, v in self.b.items()}, self.nu
        )

    def to_dict(self) -> dict:
        return {
            "nu": self.nu,
            "a": [[k, v.real, v.imag] for k, v in sorted(self.a.items())],
            "b": [[n, v.real, v.imag] for n, v in sorted(self.b.items())],
        }


def required_cutoffs(p: int, K: int) -> tuple[int, int]:
    """Largest ``a`` and ``b`` indices the assembly at cutoff ``K`` reads."""
    return 2 * K + p, 2 * K + p + 1


def seeded_coefficients(
    p: int,
    K: int,
    seed: int = 0,
    amplitude: float = 0.01,
    decay: float = 0.85,
    nu: float = 1.0,
) -> MuCoefficients:
    """``|a_k| = amplitude * decay^k``, ``|b_n| = amplitude * decay^|n|`` with seeded phases.

    Covers what assembly at cutoff ``K`` needs.  ``a_1`` and ``b_0`` stay
    zero.  Phases come from separate streams for ``a`` and ``b`` drawn in
    index order, so a larger ``K`` only appends coefficients.
    """
    na, nb = required_cutoffs(p, K)
    rng_a = np.random.default_rng([seed, 0])
    rng_b = np.random.default_rng([seed, 1])
    a = {}
    for k in range(2, na + 1):
        a[k] = amplitude * decay**k * np.exp(2j * math.pi * rng_a.random())
    b = {}
    for n in range(1, nb + 1):
        for s in (n, -n):
            b[s] = amplitude * decay**n * np.exp(2j * math.pi * rng_b.random())
    return MuCoefficients(a, b, nu)


def build_mu_terms(co: MuCoefficients) -> TrigPoly:
    terms: dict[tuple[int, int], complex] = {(0, 0): 1.0}

    def add(key, c):
        terms[key] = terms.get(key, 0j) + c

    for k, ak in co.a.items():
        for m, c in ((k, ak), (-k, ak.conjugate())):
            add((0, m), c)
            add((2, m), -c)
            add((-2, m), -c)
    for n in set(co.b) | {-n for n in co.b}:
        add((3 * n + 1, 0), co.b.get(n, 0j))
        add((3 * n - 1, 0), co.b.get(-n, 0j).conjugate())
    return TrigPoly(terms)


@dataclass(frozen=True)
class PositivityReport:
    grid_min: float
    argmin: tuple[float, float]
    coefficient_bound: float  # 1 - sum |nonconstant coefficients|

    @property
    def rigorous(self) -> bool:
        return self.coefficient_bound > 0


def mu_positivity(mu: TrigPoly, grid: int = POSITIVITY_GRID) -> PositivityReport:
    t = 6 * math.pi * np.arange(grid) / grid
    phi = 2 * math.pi * np.arange(grid) / grid
    T, PHI = np.meshgrid(t, phi, indexing="ij")
    vals = mu.evaluate(T, PHI).real
    i, j = np.unravel_index(np.argmin(vals), vals.shape)
    bound = 1.0 - (mu.abs_sum() - abs(mu.coeff(0, 0)))
    return PositivityReport(float(vals[i, j]), (float(t[i]), float(phi[j])), bound)


def build_mu(co: MuCoefficients, check: bool = True) -> TrigPoly:
    """``mu`` as an exact trigonometric polynomial, checked for positivity on a grid."""
    mu = build_mu_terms(co)
    if check:
        rep = mu_positivity(mu)
        if rep.grid_min <= 0:
            raise MuPositivityError(rep.argmin[0], rep.argmin[1], rep.grid_min)
    return mu


def v_conjugate_mode(k: int, c: str, p: int, nu: float) -> TrigSpinor:
    """``V e_{k,c}``: the wave in its own component plus sidebands at ``+-1/3`` in the other."""
    if nu == 0:
        raise ValueError("nu must be nonzero")
    mode = Mode.of(k, c, p)
    n0 = int(-3 * mode.omega)
    main = TrigPoly({(n0, k): 1 / (2 * math.pi)})
    side = TrigPoly({(n0 + 1, k): 1j * nu / (4 * math.pi), (n0 - 1, k): 1j * nu / (4 * math.pi)})
    return TrigSpinor(main, side) if c == LEFT else TrigSpinor(side, main)


def matrix_element(row: Mode, col: Mode, mu: TrigPoly, p: int, nu: float, chirality: str = LEFT) -> complex:
    """``(e_row | S_c e_col)`` through the full product of polynomials."""
    a = v_conjugate_mode(row.k, row.chirality, p, nu)
    b = v_conjugate_mode(col.k, col.chirality, p, nu)
    if chirality == LEFT:
        integrand = trig_mul(trig_mul(a.right.conj(), b.left), mu)
    else:
        integrand = trig_mul(trig_mul(a.left.conj(), b.right), mu)
    return integrate_cell(integrand)


def _constant_term(x: TrigPoly, y: TrigPoly, mu: TrigPoly) -> complex:
    # constant term of x * y * mu without forming the product
    total = 0j
    for (n1, m1), c1 in x.terms.items():
        for (n2, m2), c2 in y.terms.items():
            w = mu.terms.get((-n1 - n2, -m1 - m2))
            if w is not None:
                total += c1 * c2 * w
    return total


def _assemble(co: MuCoefficients, p: int, K: int, mu: TrigPoly | None, chirality: str) -> SparseComplexOperator:
    if p < 1:
        raise ValueError("p must be a positive integer")
    na, nb = required_cutoffs(p, K)
    if co.a_cutoff and co.a_cutoff < na or co.b_cutoff and co.b_cutoff < nb:
        raise ValueError(f"coefficients stop before the indices needed at K={K} (a up to {na}, b up to {nb})")
    mu = build_mu(co) if mu is None else mu
    modes = all_modes(K, p)
    spinors = {m: v_conjugate_mode(m.k, m.chirality, p, co.nu) for m in modes}
    bras = {}
    kets = {}
    for m, s in spinors.items():
        bras[m] = (s.right if chirality == LEFT else s.left).conj()
        kets[m] = s.left if chirality == LEFT else s.right
    entries = {}
    for row in modes:
        for col in modes:
            v = _constant_term(bras[row], kets[col], mu)
            if v != 0:
                entries[(row, col)] = CELL_AREA * v
    return SparseComplexOperator(modes, modes, entries)


def assemble_spiral_sl(co: MuCoefficients, p: int, K: int, mu: TrigPoly | None = None) -> SparseComplexOperator:
    """``S_L`` on all ``2(2K+1)`` modes with ``|k| <= K``."""
    return _assemble(co, p, K, mu, LEFT)


def assemble_spiral_sr(co: MuCoefficients, p: int, K: int, mu: TrigPoly | None = None) -> SparseComplexOperator:
    """``S_R`` assembled on its own with the right-handed projector."""
    return _assemble(co, p, K, mu, RIGHT)


def spiral_index(
    co: MuCoefficients, p: int, K: int, policy: TruncationPolicy | None = None
) -> IndexReport:
    """Index of ``S_L``, stabilized at ``K`` and ``2K``."""
    mu = build_mu(co)
    return stabilize_index(lambda kk: assemble_spiral_sl(co, p, kk, mu), K, 2 * K, policy)


def trace_chain(S_L: SparseComplexOperator, start: Mode, limit: int = 10_000) -> list[Mode]:
    """Follow ``S_L`` backwards from ``start``: each step picks the unique column feeding the row.

    Stops when a row has no entry or more than one.
    """
    feeders: dict = {}
    for r, c in S_L.entries:
        feeders.setdefault(r, []).append(c)
    chain = [start]
    seen = {start}
    node = start
    while len(chain) < limit:
        cols = feeders.get(node, [])
        if len(cols) != 1 or cols[0] in seen:
            break
        node = cols[0]
        chain.append(node)
        seen.add(node)
    return chain


def link_kind(a: Mode, b: Mode) -> str:
    if a.k == b.k and a.chirality != b.chirality:
        return "vertical"
    if a.chirality != b.chirality and a.omega == b.omega:
        return "horizontal"
    return "other"


class SpiralQuadrature:
    """Trapezoid rule for spiral matrix elements on an ``n x n`` grid.

    Evaluates ``V(t)``, the plane waves and ``mu`` pointwise from their
    defining formulas, independently of the polynomial algebra.
    """

    def __init__(self, co: MuCoefficients, p: int, n: int = 600):
        self.co, self.p, self.n = co, p, n
        t = 6 * math.pi * np.arange(n) / n
        phi = 2 * math.pi * np.arange(n) / n
        self.T, self.PHI = np.meshgrid(t, phi, indexing="ij")
        self.weight = (6 * math.pi / n) * (2 * math.pi / n)
        self.mu = self._mu()
        self.offdiag = 1j * co.nu * np.cos(self.T / 3)

    def _mu(self) -> np.ndarray:
        T, PHI = self.T, self.PHI
        a_phi = np.zeros_like(PHI, dtype=complex)
        for k, ak in self.co.a.items():
            a_phi += ak * np.exp(1j * k * PHI) + np.conj(ak) * np.exp(-1j * k * PHI)
        hor = a_phi * (1 - 2 * np.cos(2 * T / 3))
        vert = np.zeros_like(T, dtype=complex)
        for n in set(self.co.b) | {-n for n in self.co.b}:
            bn = self.co.b.get(n, 0j)
            bm = self.co.b.get(-n, 0j)
            vert += np.exp(1j * n * T) * (bn * np.exp(1j * T / 3) + np.conj(bm) * np.exp(-1j * T / 3))
        return 1 + hor + vert

    def _v_wave(self, m: Mode) -> tuple[np.ndarray, np.ndarray]:
        wave = np.exp(-1j * float(m.omega) * self.T + 1j * m.k * self.PHI) / (2 * math.pi)
        if m.chirality == LEFT:
            return wave, self.offdiag * wave
        return self.offdiag * wave, wave

    def entry(self, row: Mode, col: Mode, chirality: str = LEFT) -> complex:
        r0, r1 = self._v_wave(row)
        c0, c1 = self._v_wave(col)
        if chirality == LEFT:
            c1 = np.zeros_like(c1)
        else:
            c0 = np.zeros_like(c0)
        spin = np.conj(r0) * c1 + np.conj(r1) * c0
        return complex(np.sum(spin * self.mu) * self.weight)
