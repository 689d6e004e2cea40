from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from chiral_index.homotopy import (
    ASYMPTOTIC_SAMPLES,
    HomotopyPath,
    SampledFunction,
    asymptotic_check,
    census,
    conformal_builder,
    conformal_coeff,
    conformal_coeffs,
    conformal_path,
    cos4_bump,
    homotopy_sweep,
    lifetime_block,
    lifetime_builder,
    lifetime_index0,
    lifetime_path,
    poly_bump,
)
from chiral_index.modes import LEFT, RIGHT
from chiral_index.pinum import PiRational
from chiral_index.spectral import adjoint


def block_entries(k, T):
    B = lifetime_block(k, T)
    L = next(m for m in B.domain if m.chirality == LEFT)
    R = next(m for m in B.domain if m.chirality == RIGHT)
    return B, B[(R, L)], B[(L, R)], B[(L, L)], B[(R, R)]


def test_zero_momentum_block():
    _, rl, lr, ll, rr = block_entries(0, "pi")
    assert rl == pytest.approx(0.5) and lr == pytest.approx(0.5)
    assert ll == 0 and rr == 0


def test_block_vanishes_when_phase_is_full_turn():
    _, rl, lr, _, _ = block_entries(1, "pi")
    assert rl == 0 and lr == 0


def test_block_at_quarter_turn():
    _, rl, lr, _, _ = block_entries(1, "pi/2")
    assert rl == pytest.approx(1j / (2 * math.pi), abs=1e-15)
    assert lr == pytest.approx(-1j / (2 * math.pi), abs=1e-15)


@pytest.mark.parametrize("T", ["pi", "pi/3", 1, 0.7, "2*pi/5"])
def test_blocks_are_self_adjoint(T):
    for k in range(-6, 7):
        B = lifetime_block(k, T)
        assert adjoint(B).max_abs_diff(B) == 0


def test_irrational_lifetime_has_index_zero():
    rep = lifetime_index0(1, 50)
    assert rep.finite and rep.index == 0 and rep.zero_blocks == 0
    k = np.arange(1, 51)
    assert np.min(np.abs(np.exp(2j * k) - 1)) > 1e-3


def test_lifetime_pi_census():
    rep = lifetime_index0("pi", 50)
    assert not rep.finite
    assert census(rep) == {"K1": 50, "K2": 100}


def test_lifetime_half_pi_census_grows():
    rep = lifetime_index0("pi/2", 50)
    assert not rep.finite
    assert census(rep) == {"K1": 24, "K2": 50}


@pytest.mark.parametrize("T", [1, 0.7, "pi", "pi/2", "pi/3", "2*pi/3", "3*pi/4"])
def test_census_is_periodic(T):
    shifted = PiRational.parse(T) + PiRational(0, 2)
    for K in (4, 10, 20):
        a = lifetime_index0(T, K)
        b = lifetime_index0(shifted, K)
        assert a.zero_blocks == b.zero_blocks


def test_conformal_coeff_flat_full_period():
    f = SampledFunction.from_callable(lambda t: np.ones_like(t), math.pi)
    assert abs(conformal_coeff(f, 1)) < 1e-12


def test_conformal_coeff_mean_of_cos4():
    f = SampledFunction.from_callable(cos4_bump(math.pi), math.pi)
    assert conformal_coeff(f, 0) == pytest.approx(3 / 16, abs=1e-9)


def test_conformal_coeff_k40_near_leading_term():
    f = SampledFunction.from_callable(cos4_bump(math.pi), math.pi, ASYMPTOTIC_SAMPLES)
    lead = 1 / (160 * math.pi)
    assert abs(abs(conformal_coeff(f, 40)) - lead) <= 0.25 * lead


def test_coarse_grid_rejected():
    f = SampledFunction.from_callable(cos4_bump(math.pi), math.pi, M=1000)
    with pytest.raises(ValueError, match="coarse"):
        conformal_coeffs(f, [1])


@pytest.fixture(scope="module")
def cos4_fine():
    return SampledFunction.from_callable(cos4_bump(math.pi), math.pi, ASYMPTOTIC_SAMPLES)


def test_asymptotics_bounded_for_exactly_one_sign(cos4_fine):
    rep = asymptotic_check(cos4_fine, 128)
    assert sum(rep.bounded.values()) == 1
    assert rep.bounded_sign == -1
    # residual at k = 64 is the next-order constant 1/(16 pi) over k
    assert rep.residuals[-1][0] == pytest.approx(1 / (16 * math.pi * 64), rel=0.05)


def test_asymptotic_residual_scales_linearly(cos4_fine):
    a = asymptotic_check(cos4_fine, 128)
    b = asymptotic_check(cos4_fine.scaled(2.0), 128)
    assert b.max_residual(-1) == pytest.approx(2 * a.max_residual(-1), rel=1e-9)
    assert b.bounded_sign == a.bounded_sign


def test_vanishing_start_value_drops_leading_term():
    T = math.pi
    f = SampledFunction.from_callable(lambda t: t * (1 - t / T) ** 3, T, ASYMPTOTIC_SAMPLES)
    ks = [16, 32, 64, 128]
    c = conformal_coeffs(f, ks)
    # f'(0) = 1 gives |c_k| ~ 1 / (8 pi k^2)
    for k, ck in zip(ks, c):
        assert abs(k * k * ck) * 8 * math.pi == pytest.approx(1.0, rel=1e-2)


def test_constant_paths_are_constant():
    f = SampledFunction.from_callable(cos4_bump(math.pi), math.pi)
    sweep = homotopy_sweep(conformal_path(f, f, 5), conformal_builder, 16)
    assert sweep.verdict == "constant" and sweep.indices == [0] * 5
    assert max(sweep.operator_diffs) == 0
    sweep = homotopy_sweep(lifetime_path(1, 1, 5), lifetime_builder, 20)
    assert sweep.verdict == "constant"


def test_conformal_sweep_is_constant_and_lipschitz():
    f0 = SampledFunction.from_callable(cos4_bump(math.pi), math.pi)
    f1 = SampledFunction.from_callable(poly_bump(math.pi), math.pi)
    path = conformal_path(f0, f1, 9)
    sweep = homotopy_sweep(path, conformal_builder, 32)
    assert sweep.verdict == "constant"
    assert sweep.indices == [0] * 9
    assert all(r.finite for r in sweep.reports)
    for diffs in (sweep.operator_diffs, sweep.sobolev_diffs):
        C = diffs[0]
        assert C > 0
        assert all(d <= C * (1 + 1e-6) for d in diffs[1:])


def test_lifetime_sweep_becomes_undefined_at_the_end():
    sweep = homotopy_sweep(lifetime_path(1, "pi", 9), lifetime_builder, 50)
    assert sweep.verdict == "undefined at step 8"
    assert sweep.verdict_step == 8
    assert all(r.finite for r in sweep.reports[:8])


def test_sweep_needs_three_steps():
    with pytest.raises(ValueError):
        homotopy_sweep(lifetime_path(1, 2, 2), lifetime_builder, 10)


def test_path_parameters_are_exact():
    path = HomotopyPath(5, lambda s: s)
    assert path.parameters == [Fraction(i, 4) for i in range(5)]
    assert lifetime_path(1, "pi", 3).family(Fraction(1)) == PiRational.parse("pi")


@pytest.mark.parametrize(
    "text,value",
    [("pi", math.pi), ("-pi/2", -math.pi / 2), ("2*pi/3", 2 * math.pi / 3), ("pi*3/4", 0.75 * math.pi),
     ("2pi", 2 * math.pi), ("3/2", 1.5), ("π", math.pi), (1, 1.0), (0.25, 0.25)],
)
def test_pi_rational_parsing(text, value):
    assert float(PiRational.parse(text)) == pytest.approx(value, rel=1e-15)


@pytest.mark.parametrize("bad", ["abc", "pi pi", True, float("inf"), None])
def test_pi_rational_rejects(bad):
    with pytest.raises(ValueError):
        PiRational.parse(bad)


def test_exact_phases():
    T = PiRational.parse("pi/2")
    assert [T.exp_i(k) for k in range(4)] == [1, 1j, -1, -1j]


@settings(max_examples=50, deadline=None)
@given(st.fractions(max_denominator=50).filter(lambda q: q != 0))
def test_pi_multiples_round_trip(q):
    x = PiRational(0, q)
    assert PiRational.parse(str(x)) == x
