"""Chiral index verdicts from truncated chiral signature operators.

The infinite operators are only ever seen through a cutoff.  Compressing a
shift-like operator to finitely many labels always produces a spurious
kernel vector near the cutoff (the compressed right shift loses injectivity
at its last slot), so kernel vectors whose mass sits on the boundary band
are split off and counted separately.  Kernels are computed block by block
on the connected components of the sparsity graph, each block with its own
relative threshold.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence, Union

import numpy as np

from .modes import Mode
from .spectral import (
    DEFAULT_REL_TOL,
    ILL_CONDITIONED_GAP,
    BasisError,
    SparseComplexOperator,
    adjoint,
    block_decompose,
    dense_kernel,
)


@dataclass(frozen=True)
class TruncationPolicy:
    K: int
    boundary_band: int | None = None
    mass_threshold: float = 0.5
    rel_tol: float = DEFAULT_REL_TOL

    def __post_init__(self):
        if self.K <= 0:
            raise ValueError("cutoff K must be positive")
        if self.boundary_band is None:
            # small cutoffs keep at least one interior momentum
            object.__setattr__(self, "boundary_band", min(max(5, self.K // 10), max(self.K - 1, 1)))
        if not 0 < self.boundary_band < self.K:
            raise ValueError(f"boundary band {self.boundary_band} must satisfy 0 < w < K={self.K}")
        if not 0.0 < self.mass_threshold < 1.0:
            raise ValueError("mass_threshold must lie in (0, 1)")

    def is_boundary(self, label) -> bool:
        edge = self.K - self.boundary_band
        if isinstance(label, Mode):
            return abs(label.k) > edge
        if isinstance(label, (int, np.integer)):
            return label > edge
        return False

    def with_cutoff(self, K: int) -> "TruncationPolicy":
        """Same thresholds at a new cutoff; the band is re-derived unless it still fits."""
        band = self.boundary_band if self.boundary_band < K else None
        return replace(self, K=K, boundary_band=band)

    def describe(self) -> dict:
        return {
            "K": self.K,
            "boundary_band": self.boundary_band,
            "mass_threshold": self.mass_threshold,
            "rel_tol": self.rel_tol,
        }


@dataclass(frozen=True)
class FilteredKernel:
    dimension: int
    discarded: int
    vectors: np.ndarray  # rows over the operator's domain
    gap_ratio: float
    singular_values: np.ndarray  # every block's values, descending
    zero_blocks: int


@dataclass(frozen=True)
class IndexReport:
    dim_ker_L: int
    dim_ker_R: int
    index: int | None
    finite: bool
    boundary_discarded_L: int
    boundary_discarded_R: int
    gap_ratios: tuple[float, float]
    truncation: dict
    zero_blocks: int = 0
    kernel_basis_L: np.ndarray | None = None
    kernel_basis_R: np.ndarray | None = None
    domain_L: tuple = ()
    domain_R: tuple = ()
    singular_values_L: np.ndarray | None = None
    singular_values_R: np.ndarray | None = None
    notes: tuple[str, ...] = ()

    @property
    def ill_conditioned(self) -> bool:
        return min(self.gap_ratios) < ILL_CONDITIONED_GAP

    def kernel_labels(self, side: str = "L", cutoff: float = 1e-8) -> list:
        """Labels carrying weight in the retained kernel vectors of one side."""
        vecs = self.kernel_basis_L if side == "L" else self.kernel_basis_R
        domain = self.domain_L if side == "L" else self.domain_R
        if vecs is None or len(vecs) == 0:
            return []
        weight = np.sum(np.abs(vecs) ** 2, axis=0)
        return [domain[i] for i in np.flatnonzero(weight > cutoff)]


def _as_report_index(dim_l: int, dim_r: int, finite: bool) -> int | None:
    return dim_l - dim_r if finite else None


def filtered_kernel(op: SparseComplexOperator, policy: TruncationPolicy) -> FilteredKernel:
    """Blockwise kernel of ``op`` with boundary artifacts split off.

    Inside each block the kernel basis is first rotated to diagonalize the
    band-mass form, so the classification does not depend on which basis
    the SVD happened to return for a degenerate kernel.
    """
    pos = {lab: i for i, lab in enumerate(op.domain)}
    kept: list[np.ndarray] = []
    discarded = 0
    gap = math.inf
    sigmas: list[np.ndarray] = []
    zero_blocks = 0
    for block in block_decompose(op):
        if not block.domain:
            continue
        if block.is_zero:
            zero_blocks += 1
        res = dense_kernel(block.operator.to_dense(), policy.rel_tol)
        sigmas.append(res.singular_values)
        gap = min(gap, res.gap_ratio)
        if res.dimension == 0:
            continue
        band = np.array([policy.is_boundary(lab) for lab in block.domain], dtype=float)
        vecs = res.basis_vectors
        if band.any():
            gram = (vecs.conj() * band) @ vecs.T
            mass, rot = np.linalg.eigh(gram)
            vecs = rot.T @ vecs
        else:
            mass = np.zeros(len(vecs))
        idx = [pos[lab] for lab in block.domain]
        for v, m in zip(vecs, mass):
            if m > policy.mass_threshold:
                discarded += 1
                continue
            full = np.zeros(len(op.domain), dtype=complex)
            full[idx] = v
            kept.append(full)
    vectors = np.array(kept) if kept else np.zeros((0, len(op.domain)), dtype=complex)
    all_sigma = np.sort(np.concatenate(sigmas))[::-1] if sigmas else np.zeros(0)
    return FilteredKernel(len(kept), discarded, vectors, gap, all_sigma, zero_blocks)


def _assemble(
    ker_l: FilteredKernel,
    ker_r: FilteredKernel,
    op_l: SparseComplexOperator,
    op_r: SparseComplexOperator,
    policy: TruncationPolicy,
) -> IndexReport:
    gaps = (ker_l.gap_ratio, ker_r.gap_ratio)
    finite = min(gaps) >= ILL_CONDITIONED_GAP
    notes = () if finite else (f"ill-conditioned kernel: gap ratios {gaps[0]:.3g}, {gaps[1]:.3g}",)
    return IndexReport(
        dim_ker_L=ker_l.dimension,
        dim_ker_R=ker_r.dimension,
        index=_as_report_index(ker_l.dimension, ker_r.dimension, finite),
        finite=finite,
        boundary_discarded_L=ker_l.discarded,
        boundary_discarded_R=ker_r.discarded,
        gap_ratios=gaps,
        truncation=policy.describe(),
        zero_blocks=ker_l.zero_blocks,
        kernel_basis_L=ker_l.vectors,
        kernel_basis_R=ker_r.vectors,
        domain_L=op_l.domain,
        domain_R=op_r.domain,
        singular_values_L=ker_l.singular_values,
        singular_values_R=ker_r.singular_values,
        notes=notes,
    )


def noether_index(S_L: SparseComplexOperator, policy: TruncationPolicy) -> IndexReport:
    """``dim ker S_L - dim ker S_L*`` for an endomorphism truncation."""
    if not S_L.is_endomorphism():
        raise BasisError("noether_index needs identical domain and codomain bases")
    S_R = adjoint(S_L)
    return _assemble(filtered_kernel(S_L, policy), filtered_kernel(S_R, policy), S_L, S_R, policy)


def _chirality_of(basis: Sequence, name: str) -> str:
    kinds = {lab.chirality if isinstance(lab, Mode) else None for lab in basis}
    if None in kinds:
        raise BasisError(f"{name} basis must consist of chiral modes")
    if len(kinds) > 1:
        raise BasisError(f"{name} basis mixes chiralities")
    return kinds.pop() if kinds else ""


def chiral_index_odd(
    S_L_restricted: SparseComplexOperator,
    S_R_restricted: SparseComplexOperator,
    policy: TruncationPolicy,
) -> IndexReport:
    """Index of the massless odd case from the restricted operators.

    ``S_L_restricted`` maps left-handed modes to right-handed ones and
    ``S_R_restricted`` the reverse.
    """
    dl = _chirality_of(S_L_restricted.domain, "S_L domain")
    cl = _chirality_of(S_L_restricted.codomain, "S_L codomain")
    dr = _chirality_of(S_R_restricted.domain, "S_R domain")
    cr = _chirality_of(S_R_restricted.codomain, "S_R codomain")
    if (dl, cl) != ("L", "R") or (dr, cr) != ("R", "L"):
        raise BasisError("restricted operators must map H_L -> H_R and H_R -> H_L")
    return _assemble(
        filtered_kernel(S_L_restricted, policy),
        filtered_kernel(S_R_restricted, policy),
        S_L_restricted,
        S_R_restricted,
        policy,
    )


Built = Union[SparseComplexOperator, tuple]


def index_of(built: Built, policy: TruncationPolicy) -> IndexReport:
    if isinstance(built, SparseComplexOperator):
        return noether_index(built, policy)
    S_L, S_R = built
    return chiral_index_odd(S_L, S_R, policy)


def stabilize_index(
    builder: Callable[[int], Built],
    K1: int,
    K2: int,
    policy: TruncationPolicy | None = None,
) -> IndexReport:
    """Run the index at two cutoffs and keep it only if it is stable.

    ``builder(K)`` returns an endomorphism ``S_L`` or a pair of restricted
    operators.  ``policy`` supplies thresholds; its cutoff is replaced by
    ``K1`` and ``K2``.
    """
    if K2 < 2 * K1:
        raise ValueError("stabilization needs K2 >= 2*K1")
    base = policy or TruncationPolicy(K1)
    r1 = index_of(builder(K1), base.with_cutoff(K1))
    r2 = index_of(builder(K2), base.with_cutoff(K2))
    notes = list(r2.notes)
    agree = (r1.dim_ker_L, r1.dim_ker_R) == (r2.dim_ker_L, r2.dim_ker_R)
    if not agree:
        notes.append(
            f"kernel dimensions disagree: K={K1} gives ({r1.dim_ker_L}, {r1.dim_ker_R}), "
            f"K={K2} gives ({r2.dim_ker_L}, {r2.dim_ker_R})"
        )
    grew = r2.zero_blocks > r1.zero_blocks
    if grew:
        notes.append(f"zero-block census grew from {r1.zero_blocks} to {r2.zero_blocks}")
    finite = r1.finite and r2.finite and agree and not grew
    truncation = dict(r2.truncation)
    truncation["stabilization"] = {
        "K1": K1,
        "K2": K2,
        "index_K1": r1.index,
        "zero_blocks_K1": r1.zero_blocks,
        "dims_K1": [r1.dim_ker_L, r1.dim_ker_R],
    }
    return replace(
        r2,
        finite=finite,
        index=_as_report_index(r2.dim_ker_L, r2.dim_ker_R, finite),
        truncation=truncation,
        notes=tuple(notes),
    )
