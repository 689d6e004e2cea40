"""Discrete causal fermion systems with a chiral grading.

A system is a finite list of weighted points.  Each point is a self-adjoint
finite-rank operator ``x`` on ``C^N`` together with a pseudoscalar
``gamma``; the measure is the weighted counting measure on the points.
Sequence labels run ``1..N``.

The left-handed projector at a point is ``chi_L = (1 - gamma) / 2``.  This
is the sign that turns the shift family into ``S_L u = (u_2, u_3, ...)``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .spectral import SparseComplexOperator, adjoint

SELF_ADJOINT_TOL = 1e-12
PSEUDOSCALAR_TOL = 1e-10


class CFSError(ValueError):
    pass


@dataclass(frozen=True)
class CFSPoint:
    x: SparseComplexOperator
    gamma: SparseComplexOperator
    weight: float = 1.0

    def __post_init__(self):
        if self.weight <= 0:
            raise CFSError("point weights must be positive")
        if not (self.x.is_endomorphism() and self.gamma.is_endomorphism()):
            raise CFSError("point operators must be endomorphisms")
        if self.x.domain != self.gamma.domain:
            raise CFSError("x and gamma act on different bases")


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    self_adjoint: float
    positive: int
    negative: int
    gamma_off_spin_space: float
    gamma_leaves_spin_space: float
    anticommutation: float
    violations: tuple[str, ...] = field(default=())


def _support(point: CFSPoint) -> list:
    touched = set()
    for op in (point.x, point.gamma):
        for r, c in op.entries:
            touched.add(r)
            touched.add(c)
    return [lab for lab in point.x.domain if lab in touched]


def validate_pseudoscalar(point: CFSPoint, spin_dim: int = 1) -> ValidationReport:
    """Check the conditions a point and its pseudoscalar must satisfy.

    Both operators vanish off the labels they touch, so all checks run on
    that small support.
    """
    sup = _support(point)
    x = point.x.restrict(sup, sup).to_dense()
    g = point.gamma.restrict(sup, sup).to_dense()
    n = len(sup)
    sa = float(np.max(np.abs(x - x.conj().T), initial=0.0))
    if n:
        evals, evecs = np.linalg.eigh((x + x.conj().T) / 2)
        scale = max(1.0, float(np.max(np.abs(evals))))
        nonzero = np.abs(evals) > SELF_ADJOINT_TOL * scale
        pos = int(np.count_nonzero(evals[nonzero] > 0))
        neg = int(np.count_nonzero(evals[nonzero] < 0))
        basis = evecs[:, nonzero]
        proj = basis @ basis.conj().T
        comp = np.eye(n) - proj
        off = float(np.linalg.norm(g @ comp, 2))
        leave = float(np.linalg.norm(comp @ g @ proj, 2))
        anti = float(np.max(np.abs(x @ g + g.conj().T @ x)))
    else:
        pos = neg = 0
        off = leave = anti = 0.0
    violations = []
    if sa > SELF_ADJOINT_TOL:
        violations.append(f"x not self-adjoint (max deviation {sa:.3g})")
    if pos > spin_dim or neg > spin_dim:
        violations.append(f"eigenvalue signature ({pos}, {neg}) exceeds spin dimension {spin_dim}")
    if off > PSEUDOSCALAR_TOL:
        violations.append(f"gamma nonzero off the spin space (norm {off:.3g})")
    if leave > PSEUDOSCALAR_TOL:
        violations.append(f"gamma does not preserve the spin space (norm {leave:.3g})")
    if anti > PSEUDOSCALAR_TOL:
        violations.append(f"x gamma + gamma* x = {anti:.3g}, expected 0")
    return ValidationReport(not violations, sa, pos, neg, off, leave, anti, tuple(violations))


@dataclass(frozen=True)
class DiscreteCFS:
    hilbert_dim: int
    points: tuple[CFSPoint, ...]
    spin_dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        basis = self.basis
        for pt in self.points:
            if pt.x.domain != basis:
                raise CFSError(f"point operators must act on labels 1..{self.hilbert_dim}")

    @property
    def basis(self) -> tuple[int, ...]:
        return tuple(range(1, self.hilbert_dim + 1))

    def validate(self) -> list[ValidationReport]:
        return [validate_pseudoscalar(pt, self.spin_dim) for pt in self.points]

    def with_negated_gamma(self) -> "DiscreteCFS":
        """Exchange the roles of left- and right-handed components."""
        pts = tuple(CFSPoint(pt.x, -pt.gamma, pt.weight) for pt in self.points)
        return DiscreteCFS(self.hilbert_dim, pts, self.spin_dim)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        def triplets(op):
            return [[r, c, v.real, v.imag] for (r, c), v in sorted(op.entries.items())]

        return {
            "hilbert_dim": self.hilbert_dim,
            "spin_dim": self.spin_dim,
            "points": [
                {"weight": pt.weight, "x": triplets(pt.x), "gamma": triplets(pt.gamma)}
                for pt in self.points
            ],
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DiscreteCFS":
        allowed = {"hilbert_dim", "spin_dim", "points"}
        extra = set(doc) - allowed
        if extra:
            raise CFSError(f"unknown keys in CFS document: {sorted(extra)}")
        try:
            n = int(doc["hilbert_dim"])
            spin = int(doc.get("spin_dim", 1))
            raw_points = doc["points"]
        except (KeyError, TypeError, ValueError) as exc:
            raise CFSError(f"malformed CFS document: {exc}") from exc
        basis = tuple(range(1, n + 1))

        def op(rows):
            entries = {}
            for row in rows:
                if len(row) not in (3, 4):
                    raise CFSError("sparse entries are [row, col, re] or [row, col, re, im]")
                r, c = int(row[0]), int(row[1])
                im = row[3] if len(row) == 4 else 0.0
                entries[(r, c)] = complex(row[2], im)
            return SparseComplexOperator(basis, basis, entries)

        pts = []
        for raw in raw_points:
            extra = set(raw) - {"weight", "x", "gamma"}
            if extra:
                raise CFSError(f"unknown keys in CFS point: {sorted(extra)}")
            pts.append(CFSPoint(op(raw["x"]), op(raw.get("gamma", [])), float(raw.get("weight", 1.0))))
        return cls(n, tuple(pts), spin)

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "DiscreteCFS":
        return cls.from_dict(json.loads(text))


def assemble_signature(sys: DiscreteCFS) -> SparseComplexOperator:
    """``S = -sum_x w(x) x``."""
    total = SparseComplexOperator.zero(sys.basis)
    for pt in sys.points:
        total = total + pt.x.scale(-pt.weight)
    return total


def _assemble_with(sys: DiscreteCFS, sign: float) -> SparseComplexOperator:
    total = SparseComplexOperator.zero(sys.basis)
    for pt in sys.points:
        # x (1 + sign*gamma) / 2 without forming the identity
        x_chi = (pt.x + (pt.x @ pt.gamma).scale(sign)).scale(0.5)
        total = total + x_chi.scale(-pt.weight)
    return total


def assemble_chiral(sys: DiscreteCFS) -> tuple[SparseComplexOperator, SparseComplexOperator]:
    """``S_L = -sum w x chi_L`` and ``S_R = S_L*``."""
    S_L = _assemble_with(sys, -1.0)
    return S_L, adjoint(S_L)


def assemble_right_direct(sys: DiscreteCFS) -> SparseComplexOperator:
    """``-sum w x chi_R`` assembled on its own, as a cross-check of ``S_L*``."""
    return _assemble_with(sys, +1.0)


def build_shift_cfs(p: int, N: int) -> DiscreteCFS:
    """Points ``x_k`` coupling slots ``k`` and ``k+p`` for ``k = 1..N-p``.

    ``x_k u`` has ``-u_{k+p}`` in slot ``k`` and ``-u_k`` in slot ``k+p``;
    ``gamma(x_k) u`` has ``u_k`` in slot ``k`` and ``-u_{k+p}`` in slot
    ``k+p``.  Each point carries weight one.
    """
    if p < 1:
        raise CFSError("shift distance p must be positive")
    if N <= p + 2:
        raise CFSError(f"N={N} too small for p={p}; need N > p + 2")
    basis = tuple(range(1, N + 1))
    pts = []
    for k in range(1, N - p + 1):
        x = SparseComplexOperator(basis, basis, {(k, k + p): -1.0, (k + p, k): -1.0})
        g = SparseComplexOperator(basis, basis, {(k, k): 1.0, (k + p, k + p): -1.0})
        pts.append(CFSPoint(x, g, 1.0))
    return DiscreteCFS(N, tuple(pts), spin_dim=1)


def shift_sl(p: int, N: int, negate_gamma: bool = False) -> SparseComplexOperator:
    sys = build_shift_cfs(p, N)
    if negate_gamma:
        sys = sys.with_negated_gamma()
    return assemble_chiral(sys)[0]


def point_eigenvalues(point: CFSPoint) -> np.ndarray:
    sup = _support(point)
    if not sup:
        return np.zeros(0)
    evals = np.linalg.eigvalsh(point.x.restrict(sup, sup).to_dense())
    return evals[np.abs(evals) > SELF_ADJOINT_TOL]
