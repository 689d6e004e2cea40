"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line."""

from __future__ import annotations

import json
import math
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
from scipy.linalg import subspace_angles

from chiral_index.cfs import assemble_chiral, assemble_right_direct, assemble_signature, build_shift_cfs
from chiral_index.homotopy import (
    ASYMPTOTIC_SAMPLES,
    SampledFunction,
    asymptotic_check,
    assemble_conformal,
    assemble_lifetime,
    conformal_builder,
    conformal_path,
    cos4_bump,
    homotopy_sweep,
    lifetime_builder,
    lifetime_index0,
    lifetime_path,
    poly_bump,
)
from chiral_index.index import TruncationPolicy, noether_index
from chiral_index.spectral import adjoint
from chiral_index.spiral import (
    SpiralQuadrature,
    assemble_spiral_sl,
    assemble_spiral_sr,
    seeded_coefficients,
    spiral_index,
)
from chiral_index.torus import assemble_torus_sl, constant_series, expected_kernel_modes, poisson_series, torus_index0

RESULTS: dict[int, tuple[bool, str]] = {}
TESTS = Path(__file__).parent


def record(n: int, ok: bool, detail: str) -> None:
    RESULTS[n] = (bool(ok), detail)
    print(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def test_criterion_1_shift_index():
    parts, ok = [], True
    for p in (1, 2, 3):
        N = 40 * p
        t0 = time.perf_counter()
        sys_ = build_shift_cfs(p, N)
        idx = noether_index(assemble_chiral(sys_)[0], TruncationPolicy(N)).index
        elapsed = time.perf_counter() - t0
        neg = noether_index(assemble_chiral(sys_.with_negated_gamma())[0], TruncationPolicy(N)).index
        ok &= idx == p and neg == -p and elapsed < 1.0
        parts.append(f"p={p}: {idx}/{neg} in {elapsed:.3f}s")
    record(1, ok, "; ".join(parts))


def test_criterion_2_torus_index():
    t0 = time.perf_counter()
    parts, ok = [], True
    for p in (1, 2, 3):
        for K in (40, 80):
            rep = torus_index0(poisson_series(0.5, 4 * K + p), p, K)
            E = np.zeros((len(rep.domain_L), p))
            for j, m in enumerate(expected_kernel_modes(p)):
                E[rep.domain_L.index(m), j] = 1
            angle = float(np.max(subspace_angles(rep.kernel_basis_L.T, E))) if rep.dim_ker_L else math.inf
            good = rep.finite and rep.index == p and rep.dim_ker_L == p and angle < 1e-6
            ok &= good
            parts.append(f"p={p},K={K}: {rep.index} angle {angle:.1e}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 30
    record(2, ok, "; ".join(parts) + f"; {elapsed:.2f}s")


def test_criterion_3_flat_torus():
    rep = torus_index0(constant_series(200), 1, 20)
    c1 = rep.truncation["stabilization"]["zero_blocks_K1"]
    record(3, not rep.finite and rep.zero_blocks > c1, f"finite={rep.finite}, census {c1} -> {rep.zero_blocks}")


def test_criterion_4_spiral_oracle():
    p, K = 1, 12
    co = seeded_coefficients(p, K)
    S = assemble_spiral_sl(co, p, K)
    quad = SpiralQuadrature(co, p, n=600)
    rng = np.random.default_rng(2024)
    nonzero = list(S.entries)
    pairs = [nonzero[i] for i in rng.choice(len(nonzero), 40, replace=False)]
    modes = S.domain
    pairs += [(modes[i], modes[j]) for i, j in rng.integers(0, len(modes), (10, 2))]
    dev = max(abs(quad.entry(r, c) - S[(r, c)]) for r, c in pairs)
    record(4, len(pairs) >= 50 and dev <= 1e-6, f"{len(pairs)} pairs, max deviation {dev:.2e}")


def test_criterion_5_spiral_index():
    parts, ok = [], True
    t0 = time.perf_counter()
    K = 16
    for p in (1, 2):
        rep = spiral_index(seeded_coefficients(p, 2 * K), p, K)
        stab = rep.truncation["stabilization"]
        discarded = rep.boundary_discarded_L + rep.boundary_discarded_R
        labels = [str(m) for m in rep.kernel_labels("L")]
        good = rep.finite and rep.index == p and stab["index_K1"] == p and discarded > 0 and labels
        ok &= bool(good)
        parts.append(f"p={p}: index {stab['index_K1']}/{rep.index}, discarded {discarded}, kernel {labels}")
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 120
    record(5, ok, "; ".join(parts) + f"; {elapsed:.2f}s")


def _cli_lifetime(T, out):
    proc = subprocess.run(
        [sys.executable, "-m", "chiral_index", "lifetime", "--param", f"T={T}", "--param", "K=50", "--out", str(out)],
        capture_output=True,
        text=True,
    )
    return proc.returncode, json.loads((out / "report.json").read_text())


def test_criterion_6_lifetime(tmp_path):
    rep = lifetime_index0(1, 50)
    ok = rep.finite and rep.index == 0 and rep.zero_blocks == 0
    parts = [f"T=1: index {rep.index}, census {rep.zero_blocks}"]
    for T in ("pi", "pi/2"):
        out = tmp_path / T.replace("/", "_")
        code, doc = _cli_lifetime(T, out)
        c = doc["census"]
        ok &= code == 2 and c["K1"] < c["K2"]
        parts.append(f"T={T}: exit {code}, census {c['K1']} -> {c['K2']}")
    record(6, ok, "; ".join(parts))


def test_criterion_7_asymptotics():
    t0 = time.perf_counter()
    f = SampledFunction.from_callable(cos4_bump(math.pi), math.pi, ASYMPTOTIC_SAMPLES)
    rep = asymptotic_check(f, 128)
    elapsed = time.perf_counter() - t0
    ok = sum(rep.bounded.values()) == 1 and elapsed < 5
    detail = (
        f"bounded sign {rep.bounded_sign:+d}, max residual +:{rep.max_residual(1):.3g} -:{rep.max_residual(-1):.3g}"
        if rep.bounded_sign
        else f"bounded {rep.bounded}"
    )
    record(7, ok, f"{detail}; {elapsed:.2f}s")


def test_criterion_8_homotopy():
    f0 = SampledFunction.from_callable(cos4_bump(math.pi), math.pi)
    f1 = SampledFunction.from_callable(poly_bump(math.pi), math.pi)
    path = conformal_path(f0, f1, 9)
    min_f0 = min(path.family(s).f0 for s in path.parameters)
    conf = homotopy_sweep(path, conformal_builder, 32)
    life = homotopy_sweep(lifetime_path(1, "pi", 9), lifetime_builder, 50)
    ok = min_f0 >= 0.5 and conf.verdict == "constant" and life.verdict == "undefined at step 8"
    record(8, ok, f"conformal: {conf.verdict} {conf.indices}; lifetime: {life.verdict}")


PROPERTY_TESTS = [
    "test_spectral.py::test_adjoint_pairing",
    "test_spectral.py::test_kernel_dimension_is_nullity",
    "test_spectral.py::test_blockwise_kernel_matches_global_kernel",
    "test_index.py::test_index_invariant_under_basis_permutation",
    "test_index.py::test_index_invariant_under_scaling",
    "test_index.py::test_nonzero_index_needs_boundary_filtering",
    "test_cfs.py::test_chiral_operators_split_signature",
    "test_cfs.py::test_independent_right_assembly_matches_adjoint",
    "test_torus.py::test_chiral_structure",
    "test_torus.py::test_global_phase_leaves_kernels_unchanged",
    "test_torus.py::test_quadrature_oracle",
    "test_trigpoly.py::test_integral_of_square_modulus_is_nonnegative",
    "test_spiral.py::test_right_assembly_is_adjoint_of_left",
    "test_spiral.py::test_positivity_margin_shrinks_as_coefficients_grow",
    "test_spiral.py::test_generic_entries_against_quadrature",
    "test_homotopy.py::test_blocks_are_self_adjoint",
    "test_homotopy.py::test_census_is_periodic",
    "test_homotopy.py::test_conformal_sweep_is_constant_and_lipschitz",
]


def test_criterion_9_structural_invariants():
    worst, split, valid = 0.0, 0.0, True
    ops = []
    for p in (1, 2, 3):
        sys_ = build_shift_cfs(p, 40 * p)
        S_L, S_R = assemble_chiral(sys_)
        ops.append(("shift", S_L, S_R))
        worst = max(worst, assemble_right_direct(sys_).max_abs_diff(S_R))
        split = max(split, (S_L + S_R).max_abs_diff(assemble_signature(sys_)))
        valid &= all(r.ok for r in sys_.validate())
    for p in (1, 2, 3):
        ops.append(("torus", *assemble_torus_sl(poisson_series(0.5, 200), p, 40)))
    ops.append(("lifetime", *assemble_lifetime("pi/2", 50)))
    ops.append(("conformal", *assemble_conformal(SampledFunction.from_callable(cos4_bump(math.pi), math.pi), 32)))
    for p in (1, 2):
        co = seeded_coefficients(p, 16)
        ops.append(("spiral", assemble_spiral_sl(co, p, 16), assemble_spiral_sr(co, p, 16)))
    for _, S_L, S_R in ops:
        worst = max(worst, adjoint(S_L).max_abs_diff(S_R))
    proc = subprocess.run(
        [sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *PROPERTY_TESTS],
        cwd=TESTS,
        capture_output=True,
        text=True,
    )
    props_ok = proc.returncode == 0
    summary = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else "no output"
    ok = worst <= 1e-10 and split == 0 and valid and props_ok
    record(9, ok, f"adjoint deviation {worst:.1e} over {len(ops)} operators; CFS split/validation ok; properties: {summary}")
