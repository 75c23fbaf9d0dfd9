import math
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import assume, given, strategies as st

from crossres.perturb import (
    CollisionModel,
    CrPrefactors,
    PoleError,
    ac_stark,
    cr_prefactors,
    estimate_couplings,
    fit_collision_model,
    two_photon_rates,
    xy_indirect,
    zz_from_bracket,
)

REL = 1e-12
DUAL_ROUTE_REL = 1e-9

nonzero_sign = st.sampled_from((-1.0, 1.0))


def test_indirect_xy_frozen_value():
    # symmetric 25 MHz couplings, detunings -250 and -350 MHz
    j = xy_indirect(25.0, 25.0, -250.0, -350.0)
    assert j == pytest.approx(-2.142857142857143, rel=REL)
    assert xy_indirect(0.0, 25.0, -250.0, -350.0) == 0.0


def test_bracket_frozen_values():
    zz = zz_from_bracket(1.7, 100.0, -330.0, -330.0)
    assert zz == pytest.approx(38.57229524772497, rel=REL)
    zz_with_bus = zz_from_bracket(1.7, 100.0, -330.0, -330.0, delta_sum=-600.0)
    assert zz_with_bus == pytest.approx(28.938961914391637, rel=REL)


def test_estimate_direct_coupling_only():
    est = estimate_couplings(0.0, 0.0, 1.7, None, None, 100.0, -330.0, -330.0)
    assert est.j_xy == 1.7
    assert est.j_indirect == 0.0
    assert est.zz_parts[2] == 0.0
    assert est.zz_total == pytest.approx(38.57229524772497, rel=REL)


def test_estimate_mediated_requires_detunings():
    with pytest.raises(ValueError):
        estimate_couplings(25.0, 25.0, 0.0, None, -350.0, 100.0, -330.0, -330.0)


def test_estimate_coupling_quadratic_growth():
    # pure direct coupling: zz scales as the square of j
    lo = estimate_couplings(0.0, 0.0, 1.7, None, None, 100.0, -330.0, -330.0)
    hi = estimate_couplings(0.0, 0.0, 3.1, None, None, 100.0, -330.0, -330.0)
    assert hi.zz_total / lo.zz_total == pytest.approx((3.1 / 1.7) ** 2, rel=REL)


@given(
    g_r1=st.floats(5.0, 120.0),
    g_r2=st.floats(5.0, 120.0),
    mag_1=st.floats(120.0, 2000.0),
    mag_2=st.floats(120.0, 2000.0),
    sign_1=nonzero_sign,
    sign_2=nonzero_sign,
    delta=st.floats(30.0, 500.0),
    sign_d=nonzero_sign,
    alpha_1=st.floats(-500.0, -150.0),
    alpha_2=st.floats(-500.0, -150.0),
)
def test_channel_sum_matches_bracket_route(
    g_r1, g_r2, mag_1, mag_2, sign_1, sign_2, delta, sign_d, alpha_1, alpha_2
):
    delta_1 = sign_1 * mag_1
    delta_2 = sign_2 * mag_2
    d = sign_d * delta
    assume(abs(delta_1 + delta_2) > 1.0)
    assume(abs(d + alpha_1) > 1.0)
    assume(abs(d - alpha_2) > 1.0)
    est = estimate_couplings(g_r1, g_r2, 0.0, delta_1, delta_2, d, alpha_1, alpha_2)
    bracket = zz_from_bracket(est.j_xy, d, alpha_1, alpha_2, delta_sum=delta_1 + delta_2)
    assert est.zz_total == pytest.approx(bracket, rel=DUAL_ROUTE_REL, abs=1e-12)


def test_pole_guard_names_denominator():
    with pytest.raises(PoleError) as err:
        cr_prefactors(1.7, 0.0005, -330.0, 50.0)
    assert err.value.denominator == "delta"
    with pytest.raises(PoleError) as err:
        estimate_couplings(0.0, 0.0, 1.7, None, None, 330.0, -330.0, -330.0)
    assert err.value.denominator == "delta + alpha_1"
    with pytest.raises(PoleError):
        xy_indirect(25.0, 25.0, 0.0, -350.0)


def test_cr_prefactors_frozen_values():
    pre = cr_prefactors(1.7, 100.0, -330.0, 50.0)
    assert isinstance(pre, CrPrefactors)
    assert pre.mu_ix == pytest.approx(0.007391304347826087, rel=REL)
    assert pre.mu_zx == pytest.approx(0.024391304347826086, rel=REL)
    assert pre.v_zx == pytest.approx(0.6097826086956522, rel=REL)


def test_cr_prefactors_strong_anharmonicity_limit():
    pre = cr_prefactors(1.7, 100.0, -1e9, 50.0)
    assert pre.mu_zx == pytest.approx(1.7 / 100.0, rel=1e-6)
    assert abs(pre.mu_ix) < 1e-8


@given(
    j=st.floats(0.5, 5.0),
    delta=st.floats(30.0, 300.0),
    sign_d=nonzero_sign,
    alpha=st.floats(-500.0, -310.0),
)
def test_conditional_component_dominates_in_straddling_regime(j, delta, sign_d, alpha):
    d = sign_d * delta
    assume(abs(alpha + d) > 1.0)
    pre = cr_prefactors(j, d, alpha, 50.0)
    # |mu_zx / mu_ix| = |alpha / delta| > 1 whenever |alpha| > |delta|
    assert abs(pre.mu_zx) > abs(pre.mu_ix)
    assert abs(pre.mu_zx / pre.mu_ix) == pytest.approx(abs(alpha / d), rel=1e-9)


def test_ac_stark_frozen_value_and_zero_drive():
    assert ac_stark(15.0, -50.0, -330.0) == pytest.approx(-1.9539473684210527, rel=REL)
    assert ac_stark(0.0, -50.0, -330.0) == 0.0


@given(
    omega=st.floats(1.0, 80.0),
    delta=st.floats(20.0, 400.0),
    sign_d=nonzero_sign,
    alpha=st.floats(-500.0, -150.0),
)
def test_ac_stark_sign_rule(omega, delta, sign_d, alpha):
    d = sign_d * delta
    assume(abs(d + alpha) > 1.0)
    shift = ac_stark(omega, d, alpha)
    assert math.copysign(1.0, shift) == math.copysign(1.0, alpha * d * (d + alpha))


def test_two_photon_frozen_values():
    v1, v2 = two_photon_rates(25.0, 50.0, -250.0, -330.0)
    assert v1 == pytest.approx(1.1379310344827587, rel=REL)
    assert v2 == pytest.approx(-0.060980579841256516, rel=REL)
    assert two_photon_rates(25.0, 0.0, -250.0, -330.0) == (0.0, 0.0)


def test_two_photon_quadratic_in_drive():
    g, d, a = 25.0, -250.0, -330.0
    v1_lo, v2_lo = two_photon_rates(g, 10.0, d, a)
    v1_hi, v2_hi = two_photon_rates(g, 30.0, d, a)
    assert v1_hi / v1_lo == pytest.approx(9.0, rel=REL)
    assert v2_hi / v2_lo == pytest.approx(9.0, rel=REL)


def test_collision_model_gap_identities():
    model = CollisionModel(
        delta0=30.0, stark_coefficient=-0.012, coupling_kind="static", coupling_value=0.055
    )
    omega_star = model.crossing_amplitude()
    assert omega_star == pytest.approx(math.sqrt(30.0 / 0.012), rel=REL)
    assert model.detuning_at(omega_star) == pytest.approx(0.0, abs=1e-12)
    # on resonance the gap equals the coupling
    assert model.gap_at(omega_star) == pytest.approx(0.055, rel=1e-9)
    assert model.gap_at(0.0) == pytest.approx(math.hypot(30.0, 0.055), rel=REL)

    linear = CollisionModel(
        delta0=30.0, stark_coefficient=-0.012, coupling_kind="linear", coupling_value=0.002
    )
    assert linear.coupling_at(10.0) == pytest.approx(0.02, rel=REL)
    none_crossing = CollisionModel(
        delta0=30.0, stark_coefficient=0.012, coupling_kind="static", coupling_value=0.055
    )
    assert none_crossing.crossing_amplitude() is None
    with pytest.raises(ValueError):
        CollisionModel(30.0, -0.012, "cubic", 0.055)


def _fake_scan(model: CollisionModel, amplitudes: np.ndarray) -> SimpleNamespace:
    gaps = np.array([model.gap_at(o) for o in amplitudes])
    crossing = SimpleNamespace(
        levels=("u", "v"),
        amplitude=float(amplitudes[np.argmin(gaps)]),
        gap=float(gaps.min()),
    )
    return SimpleNamespace(
        amplitudes=amplitudes,
        anticrossings=(crossing,),
        gap_series=lambda pair: gaps,
    )


@pytest.mark.parametrize(
    "kind,value",
    [("static", 0.055), ("linear", 0.0011), ("quadratic", 2.2e-5)],
)
def test_fit_collision_model_recovers_parameters_with_known_kind(kind, value):
    truth = CollisionModel(
        delta0=30.0, stark_coefficient=-0.012, coupling_kind=kind, coupling_value=value
    )
    amplitudes = np.linspace(0.0, 80.0, 161)
    scan = _fake_scan(truth, amplitudes)
    fitted = fit_collision_model(scan, ("u", "v"), kind=kind)
    assert fitted.coupling_kind == kind
    assert fitted.delta0 == pytest.approx(30.0, rel=1e-6)
    assert fitted.stark_coefficient == pytest.approx(-0.012, rel=1e-6)
    assert fitted.coupling_value == pytest.approx(value, rel=1e-4)


@pytest.mark.parametrize("kind,value", [("static", 0.055), ("linear", 0.0011)])
def test_fit_collision_model_auto_is_predictive(kind, value):
    # the squared gap is the same quartic for every coupling kind, so auto
    # selection must reproduce the data even when it cannot identify the kind
    truth = CollisionModel(
        delta0=30.0, stark_coefficient=-0.012, coupling_kind=kind, coupling_value=value
    )
    amplitudes = np.linspace(0.0, 80.0, 161)
    scan = _fake_scan(truth, amplitudes)
    fitted = fit_collision_model(scan, ("u", "v"))
    for omega in np.linspace(0.0, 80.0, 37):
        assert fitted.gap_at(omega) == pytest.approx(truth.gap_at(omega), abs=1e-7)


def test_fit_collision_model_auto_ties_resolve_to_static():
    truth = CollisionModel(
        delta0=30.0, stark_coefficient=-0.012, coupling_kind="static", coupling_value=0.055
    )
    scan = _fake_scan(truth, np.linspace(0.0, 80.0, 161))
    assert fit_collision_model(scan, ("u", "v")).coupling_kind == "static"
    with pytest.raises(ValueError):
        fit_collision_model(scan, ("u", "v"), kind="cubic")


def test_fit_collision_model_requires_anticrossing():
    truth = CollisionModel(
        delta0=30.0, stark_coefficient=-0.012, coupling_kind="static", coupling_value=0.055
    )
    scan = _fake_scan(truth, np.linspace(0.0, 80.0, 161))
    with pytest.raises(ValueError):
        fit_collision_model(scan, ("u", "w"))
