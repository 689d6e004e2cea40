"""Complex linear algebra over labeled bases.

Operators are stored as sparse maps ``(row_label, col_label) -> complex`` and
materialized densely, in the declared basis order, whenever a decomposition
is needed.  Labels are hashable and pairwise distinct inside one basis; the
order of the basis tuple fixes the matrix layout.
"""

from __future__ import annotations

import csv
import math
import os
import tempfile
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Mapping, Sequence

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components

Label = Hashable

DEFAULT_REL_TOL = 1e-10
ILL_CONDITIONED_GAP = 1e3


class BasisError(ValueError):
    """Raised for malformed bases or label mismatches."""


class KernelComputationError(RuntimeError):
    """SVD failed to converge; ``dump_path`` points at the offending matrix."""

    def __init__(self, message: str, dump_path: str):
        super().__init__(f"{message} (matrix dumped to {dump_path})")
        self.dump_path = dump_path


def _check_basis(basis: Sequence[Label], name: str) -> tuple:
    basis = tuple(basis)
    if len(set(basis)) != len(basis):
        raise BasisError(f"{name} basis contains repeated labels")
    return basis


@dataclass(frozen=True, eq=False)
class SparseComplexOperator:
    """Finitely supported complex matrix indexed by labels.

    ``entries[(r, c)]`` is the matrix element in row ``r`` (a codomain label)
    and column ``c`` (a domain label).  Entries whose modulus does not
    exceed ``drop_tol`` are not stored.
    """

    domain: tuple
    codomain: tuple
    entries: Mapping[tuple, complex]
    drop_tol: float = 0.0
    _dom_index: dict = field(init=False, repr=False, compare=False)
    _cod_index: dict = field(init=False, repr=False, compare=False)

    def __init__(
        self,
        domain: Sequence[Label],
        codomain: Sequence[Label],
        entries: Mapping[tuple, complex] | Iterable[tuple] = (),
        drop_tol: float = 0.0,
    ):
        domain = _check_basis(domain, "domain")
        codomain = _check_basis(codomain, "codomain")
        dom_index = {lab: i for i, lab in enumerate(domain)}
        cod_index = {lab: i for i, lab in enumerate(codomain)}
        items = entries.items() if isinstance(entries, Mapping) else entries
        stored: dict[tuple, complex] = {}
        for (r, c), v in items:
            if r not in cod_index or c not in dom_index:
                raise BasisError(f"entry ({r!r}, {c!r}) outside the declared bases")
            v = complex(v)
            if abs(v) > drop_tol:
                stored[(r, c)] = v
        object.__setattr__(self, "domain", domain)
        object.__setattr__(self, "codomain", codomain)
        object.__setattr__(self, "entries", stored)
        object.__setattr__(self, "drop_tol", float(drop_tol))
        object.__setattr__(self, "_dom_index", dom_index)
        object.__setattr__(self, "_cod_index", cod_index)

    # -- constructors -----------------------------------------------------

    @classmethod
    def from_dense(cls, matrix, domain=None, codomain=None, drop_tol: float = 0.0):
        matrix = np.asarray(matrix, dtype=complex)
        rows, cols = matrix.shape
        domain = tuple(range(cols)) if domain is None else tuple(domain)
        codomain = tuple(range(rows)) if codomain is None else tuple(codomain)
        if len(domain) != cols or len(codomain) != rows:
            raise BasisError("basis sizes do not match the matrix shape")
        nz = np.argwhere(np.abs(matrix) > drop_tol)
        entries = {(codomain[i], domain[j]): matrix[i, j] for i, j in nz}
        return cls(domain, codomain, entries, drop_tol)

    @classmethod
    def identity(cls, basis: Sequence[Label]):
        basis = tuple(basis)
        return cls(basis, basis, {(b, b): 1.0 for b in basis})

    @classmethod
    def zero(cls, domain: Sequence[Label], codomain: Sequence[Label] | None = None):
        domain = tuple(domain)
        return cls(domain, domain if codomain is None else tuple(codomain), {})

    # -- basic queries ----------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.codomain), len(self.domain)

    @property
    def nnz(self) -> int:
        return len(self.entries)

    def is_endomorphism(self) -> bool:
        return self.domain == self.codomain

    def __getitem__(self, key: tuple) -> complex:
        r, c = key
        if r not in self._cod_index or c not in self._dom_index:
            raise BasisError(f"({r!r}, {c!r}) outside the declared bases")
        return self.entries.get((r, c), 0j)

    def to_dense(self) -> np.ndarray:
        out = np.zeros(self.shape, dtype=complex)
        for (r, c), v in self.entries.items():
            out[self._cod_index[r], self._dom_index[c]] = v
        return out

    def apply(self, vector) -> np.ndarray:
        return self.to_dense() @ np.asarray(vector, dtype=complex)

    # -- algebra ----------------------------------------------------------

    def adjoint(self) -> "SparseComplexOperator":
        return adjoint(self)

    def scale(self, factor: complex) -> "SparseComplexOperator":
        return SparseComplexOperator(
            self.domain,
            self.codomain,
            {k: factor * v for k, v in self.entries.items()},
            self.drop_tol,
        )

    def __add__(self, other: "SparseComplexOperator") -> "SparseComplexOperator":
        self._check_same_bases(other)
        out = dict(self.entries)
        for k, v in other.entries.items():
            out[k] = out.get(k, 0j) + v
        return SparseComplexOperator(self.domain, self.codomain, out, self.drop_tol)

    def __sub__(self, other: "SparseComplexOperator") -> "SparseComplexOperator":
        return self + other.scale(-1.0)

    def __neg__(self) -> "SparseComplexOperator":
        return self.scale(-1.0)

    def __matmul__(self, other: "SparseComplexOperator") -> "SparseComplexOperator":
        if self.domain != other.codomain:
            raise BasisError("inner bases do not match in operator product")
        by_row: dict = {}
        for (r, c), v in other.entries.items():
            by_row.setdefault(r, []).append((c, v))
        out: dict = {}
        for (r, mid), v in self.entries.items():
            for c, w in by_row.get(mid, ()):
                out[(r, c)] = out.get((r, c), 0j) + v * w
        return SparseComplexOperator(other.domain, self.codomain, out, self.drop_tol)

    def restrict(self, domain: Sequence[Label], codomain: Sequence[Label]):
        """Compression onto sub-bases (labels must belong to the bases)."""
        domain, codomain = tuple(domain), tuple(codomain)
        dset, cset = set(domain), set(codomain)
        if not dset <= set(self.domain) or not cset <= set(self.codomain):
            raise BasisError("restriction labels outside the declared bases")
        out = {(r, c): v for (r, c), v in self.entries.items() if r in cset and c in dset}
        return SparseComplexOperator(domain, codomain, out, self.drop_tol)

    def permuted(self, domain_order: Sequence[Label], codomain_order: Sequence[Label]):
        """Same operator, laid out in a different basis order."""
        if set(domain_order) != set(self.domain) or set(codomain_order) != set(self.codomain):
            raise BasisError("permutation must reuse the same labels")
        return SparseComplexOperator(domain_order, codomain_order, self.entries, self.drop_tol)

    def max_abs_diff(self, other: "SparseComplexOperator") -> float:
        self._check_same_bases(other)
        keys = set(self.entries) | set(other.entries)
        return max((abs(self.entries.get(k, 0j) - other.entries.get(k, 0j)) for k in keys), default=0.0)

    def _check_same_bases(self, other: "SparseComplexOperator") -> None:
        if self.domain != other.domain or self.codomain != other.codomain:
            raise BasisError("operators live on different bases")

    # -- output -----------------------------------------------------------

    def dump_csv(self, path: str | os.PathLike) -> None:
        """Write ``row-label, col-label, re, im`` rows in basis order."""
        rows = sorted(
            self.entries.items(),
            key=lambda kv: (self._cod_index[kv[0][0]], self._dom_index[kv[0][1]]),
        )
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["row", "col", "re", "im"])
            for (r, c), v in rows:
                writer.writerow([label_str(r), label_str(c), repr(v.real), repr(v.imag)])


def label_str(label: Label) -> str:
    to_str = getattr(label, "as_str", None)
    return to_str() if callable(to_str) else str(label)


def adjoint(A: SparseComplexOperator) -> SparseComplexOperator:
    """Conjugate transpose; domain and codomain swap roles."""
    return SparseComplexOperator(
        A.codomain,
        A.domain,
        {(c, r): v.conjugate() for (r, c), v in A.entries.items()},
        A.drop_tol,
    )


@dataclass(frozen=True)
class KernelResult:
    """Numerical kernel of a matrix.

    ``singular_values`` has one entry per domain direction (padded with
    zeros when the matrix is wide), so ``dimension`` is exactly the number
    of discarded values.  ``basis_vectors`` are rows: unit, orthogonal.
    """

    dimension: int
    basis_vectors: np.ndarray
    singular_values: np.ndarray
    gap_ratio: float

    @property
    def ill_conditioned(self) -> bool:
        return self.gap_ratio < ILL_CONDITIONED_GAP


def _dump_failed(matrix: np.ndarray) -> str:
    fd, path = tempfile.mkstemp(prefix="svd_failure_", suffix=".csv")
    with os.fdopen(fd, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["row", "col", "re", "im"])
        for (i, j), v in np.ndenumerate(matrix):
            if v != 0:
                writer.writerow([i, j, repr(v.real), repr(v.imag)])
    return path


def dense_kernel(matrix, rel_tol: float = DEFAULT_REL_TOL) -> KernelResult:
    matrix = np.asarray(matrix, dtype=complex)
    if not 0.0 < rel_tol < 1.0:
        raise ValueError("rel_tol must lie in (0, 1)")
    m, n = matrix.shape
    if n == 0:
        return KernelResult(0, np.zeros((0, 0), dtype=complex), np.zeros(0), math.inf)
    try:
        if m == 0:
            s = np.zeros(0)
            vh = np.eye(n, dtype=complex)
        else:
            _, s, vh = np.linalg.svd(matrix, full_matrices=True)
    except np.linalg.LinAlgError as exc:
        raise KernelComputationError(f"SVD did not converge: {exc}", _dump_failed(matrix)) from exc
    sigma = np.zeros(n)
    sigma[: len(s)] = s
    smax = sigma[0] if n else 0.0
    if smax == 0.0:
        return KernelResult(n, vh.copy(), sigma, math.inf)
    rank = int(np.count_nonzero(sigma > rel_tol * smax))
    dim = n - rank
    if dim == 0:
        gap = math.inf
    else:
        largest_dropped = sigma[rank]
        with np.errstate(over="ignore"):
            gap = math.inf if largest_dropped == 0.0 else float(sigma[rank - 1] / largest_dropped)
    return KernelResult(dim, vh[rank:].conj(), sigma, gap)


def kernel(A: SparseComplexOperator, rel_tol: float = DEFAULT_REL_TOL) -> KernelResult:
    """Kernel from a full SVD of the dense materialization of ``A``.

    Singular values at or below ``rel_tol * sigma_max`` count as zero; the
    returned vectors are coefficient vectors over ``A.domain``.
    """
    return dense_kernel(A.to_dense(), rel_tol)


@dataclass(frozen=True)
class Block:
    domain: tuple
    codomain: tuple
    operator: SparseComplexOperator

    @property
    def is_zero(self) -> bool:
        return self.operator.nnz == 0


def block_decompose(A: SparseComplexOperator) -> list[Block]:
    """Connected components of the sparsity graph of ``A``.

    Nodes are the union of domain and codomain labels (a label present in
    both bases is one node); every stored entry is an edge.  Blocks come
    out ordered by the first basis position of their labels.
    """
    nodes: dict = {}
    for lab in A.domain + A.codomain:
        nodes.setdefault(lab, len(nodes))
    if not nodes:
        return []
    rows = [nodes[r] for r, _ in A.entries]
    cols = [nodes[c] for _, c in A.entries]
    graph = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(len(nodes), len(nodes)))
    _, comp = connected_components(graph, directed=False)
    groups: dict[int, tuple[list, list]] = {}
    for lab in A.domain:
        groups.setdefault(comp[nodes[lab]], ([], []))[0].append(lab)
    for lab in A.codomain:
        groups.setdefault(comp[nodes[lab]], ([], []))[1].append(lab)
    entries_by_comp: dict[int, dict] = {}
    for (r, c), v in A.entries.items():
        entries_by_comp.setdefault(comp[nodes[r]], {})[(r, c)] = v
    blocks = []
    for cid in sorted(groups, key=lambda g: min(nodes[x] for x in groups[g][0] + groups[g][1])):
        dom, cod = groups[cid]
        op = SparseComplexOperator(dom, cod, entries_by_comp.get(cid, {}), A.drop_tol)
        blocks.append(Block(tuple(dom), tuple(cod), op))
    return blocks


def reassemble(blocks: Sequence[Block], domain, codomain) -> SparseComplexOperator:
    entries: dict = {}
    for b in blocks:
        entries.update(b.operator.entries)
    return SparseComplexOperator(domain, codomain, entries)
