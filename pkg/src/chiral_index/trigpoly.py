"""Exact trigonometric polynomials in ``(t, phi)``.

A term ``(n, m) -> c`` stands for ``c * exp(i (n/3) t + i m phi)``.  Time
frequencies are kept as integer numerators over the fixed denominator 3, so
deciding whether a product has a constant part is exact integer arithmetic.
The integration cell is ``(0, 6pi) x (0, 2pi)``, on which every term but the
constant one integrates to zero.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

MAX_TERMS = 10**6
CELL_AREA = 12 * math.pi**2


class TermOverflowError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrigPoly:
    terms: Mapping[tuple[int, int], complex] = field(default_factory=dict)

    def __post_init__(self):
        clean = {}
        for (n, m), c in self.terms.items():
            c = complex(c)
            if c != 0:
                clean[(int(n), int(m))] = c
        if len(clean) > MAX_TERMS:
            raise TermOverflowError(f"{len(clean)} terms exceed the limit of {MAX_TERMS}")
        object.__setattr__(self, "terms", clean)

    @classmethod
    def constant(cls, c: complex = 1.0) -> "TrigPoly":
        return cls({(0, 0): c})

    @classmethod
    def monomial(cls, n: int, m: int, c: complex = 1.0) -> "TrigPoly":
        return cls({(n, m): c})

    def coeff(self, n: int, m: int) -> complex:
        return self.terms.get((n, m), 0j)

    def __len__(self) -> int:
        return len(self.terms)

    def __add__(self, other: "TrigPoly") -> "TrigPoly":
        out = dict(self.terms)
        for key, c in other.terms.items():
            out[key] = out.get(key, 0j) + c
        return TrigPoly(out)

    def __neg__(self) -> "TrigPoly":
        return self.scale(-1)

    def __sub__(self, other: "TrigPoly") -> "TrigPoly":
        return self + (-other)

    def scale(self, factor: complex) -> "TrigPoly":
        return TrigPoly({key: c * factor for key, c in self.terms.items()})

    def __mul__(self, other: "TrigPoly") -> "TrigPoly":
        return trig_mul(self, other)

    def conj(self) -> "TrigPoly":
        """Pointwise complex conjugate: ``(n, m) -> (-n, -m)`` with conjugated coefficient."""
        return TrigPoly({(-n, -m): c.conjugate() for (n, m), c in self.terms.items()})

    def is_real(self, tol: float = 0.0) -> bool:
        return all(abs(self.coeff(-n, -m) - c.conjugate()) <= tol for (n, m), c in self.terms.items())

    def evaluate(self, t, phi) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        phi = np.asarray(phi, dtype=float)
        out = np.zeros(np.broadcast(t, phi).shape, dtype=complex)
        for (n, m), c in self.terms.items():
            out = out + c * np.exp(1j * (n / 3.0) * t + 1j * m * phi)
        return out

    def abs_sum(self) -> float:
        return float(sum(abs(c) for c in self.terms.values()))


def trig_mul(P: TrigPoly, Q: TrigPoly) -> TrigPoly:
    if len(P) * len(Q) > MAX_TERMS * 10:
        raise TermOverflowError("product would exceed the term limit")
    out: dict[tuple[int, int], complex] = {}
    for (n1, m1), c1 in P.terms.items():
        for (n2, m2), c2 in Q.terms.items():
            key = (n1 + n2, m1 + m2)
            out[key] = out.get(key, 0j) + c1 * c2
    return TrigPoly(out)


def integrate_cell(P: TrigPoly) -> complex:
    """``int_0^{6pi} int_0^{2pi} P dphi dt``."""
    return CELL_AREA * P.coeff(0, 0)


@dataclass(frozen=True)
class TrigSpinor:
    left: TrigPoly
    right: TrigPoly
