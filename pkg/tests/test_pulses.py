"""Tests for pulse envelopes and time-dependent Hamiltonian assembly."""

import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from crossres.device import TransmonSpec, build_device, pair_preset
from crossres.operators import SpaceMap, angular_from_MHz, hermiticity_defect
from crossres.pulses import (
    DriveSpec,
    PulseEnvelope,
    drive_hamiltonian,
    envelope_at,
)


def test_envelope_validation():
    with pytest.raises(ValueError):
        PulseEnvelope(gate_ns=0.0, peak_MHz=10.0, ramp_ns=0.0)
    with pytest.raises(ValueError):
        PulseEnvelope(gate_ns=100.0, peak_MHz=10.0, ramp_ns=-1.0)
    with pytest.raises(ValueError):
        PulseEnvelope(gate_ns=30.0, peak_MHz=10.0, ramp_ns=20.0)
    with pytest.raises(ValueError):
        PulseEnvelope(gate_ns=100.0, peak_MHz=float("nan"), ramp_ns=20.0)


def test_envelope_shape():
    env = PulseEnvelope(gate_ns=100.0, peak_MHz=40.0, ramp_ns=20.0)
    assert env.value_at(0.0) == 0.0
    assert env.value_at(100.0) == 0.0
    assert env.value_at(-5.0) == 0.0
    assert env.value_at(105.0) == 0.0
    assert env.value_at(10.0) == pytest.approx(20.0)  # half height mid ramp
    assert env.value_at(50.0) == 40.0
    assert env.flat_interval() == (20.0, 80.0)
    # symmetric rise and fall
    for t in (3.0, 7.5, 12.0, 19.0):
        assert env.value_at(t) == pytest.approx(env.value_at(100.0 - t), abs=1e-12)


def test_envelope_rectangle():
    env = PulseEnvelope(gate_ns=50.0, peak_MHz=25.0, ramp_ns=0.0)
    assert env.value_at(0.0) == 25.0
    assert env.value_at(49.999) == 25.0
    assert env.area_MHz_ns() == pytest.approx(25.0 * 50.0)


@given(
    gate=st.floats(min_value=40.0, max_value=400.0),
    peak=st.floats(min_value=-80.0, max_value=80.0),
    frac=st.floats(min_value=0.0, max_value=0.5),
)
def test_envelope_area_identity(gate, peak, frac):
    # raised-cosine ramps integrate to half a plateau each, so the closed
    # form peak * (gate - ramp) must match quadrature
    ramp = frac * gate
    env = PulseEnvelope(gate_ns=gate, peak_MHz=peak, ramp_ns=ramp)
    times = np.linspace(0.0, gate, 20001)
    numeric = np.trapezoid(envelope_at(env, times), times)
    assert numeric == pytest.approx(env.area_MHz_ns(), abs=2e-4 * max(1.0, abs(peak) * gate))


def test_envelope_continuity_at_ramp_joins():
    env = PulseEnvelope(gate_ns=100.0, peak_MHz=30.0, ramp_ns=20.0)
    h = 1e-6
    for edge in (20.0, 80.0):
        left = env.value_at(edge - h)
        right = env.value_at(edge + h)
        assert left == pytest.approx(right, abs=1e-9)
        # C1 join: slope vanishes where ramp meets plateau
        slope = (env.value_at(edge + h) - env.value_at(edge - h)) / (2 * h)
        assert abs(slope) < 1e-4


def test_drive_spec_always_on():
    env = PulseEnvelope(gate_ns=10.0, peak_MHz=15.0, ramp_ns=2.0)
    pulsed = DriveSpec("Q1", 5.0, env)
    constant = DriveSpec("Q1", 5.0, env, always_on=True)
    assert pulsed.amplitude_at(50.0) == 0.0
    assert pulsed.amplitude_at(1.0) < 15.0
    assert constant.amplitude_at(50.0) == 15.0
    assert constant.amplitude_at(-3.0) == 15.0
    with pytest.raises(ValueError):
        DriveSpec("Q1", -5.0, env)


def _cap_pair():
    return pair_preset("capacitor", scale_with_frequency=False)


def test_assembly_validation():
    dev = _cap_pair()
    env = PulseEnvelope(gate_ns=100.0, peak_MHz=30.0, ramp_ns=20.0)
    with pytest.raises(ValueError):
        drive_hamiltonian(dev, [], frame="drive_rot")
    with pytest.raises(ValueError):
        drive_hamiltonian(dev, [DriveSpec("Q1", 5.05, env)], frame="lab")
    with pytest.raises(ValueError):
        drive_hamiltonian(
            dev,
            [DriveSpec("Q1", 5.05, env), DriveSpec("Q1", 5.06, env)],
            frame="lab_rwa",
        )
    with pytest.raises(KeyError):
        drive_hamiltonian(dev, [DriveSpec("Q9", 5.05, env)])
    # common carrier is mandatory in the single rotating frame
    with pytest.raises(ValueError):
        drive_hamiltonian(
            dev,
            [DriveSpec("Q1", 5.05, env), DriveSpec("Q2", 5.06, env)],
            frame="drive_rot",
        )


def test_drive_rot_static_during_plateau():
    dev = _cap_pair()
    env = PulseEnvelope(gate_ns=100.0, peak_MHz=30.0, ramp_ns=20.0)
    ham = drive_hamiltonian(dev, [DriveSpec("Q1", 5.05, env)], frame="drive_rot")
    assert ham.frame == "drive_rot"
    assert ham.reference_GHz == 5.05
    assert ham.is_static_on(20.0, 80.0)
    assert not ham.is_static_on(0.0, 20.0)
    h_mid = ham.value_at(50.0)
    assert hermiticity_defect(h_mid) < 1e-12
    # plateau drive element: <0_Q1 | H | 1_Q1> = amp/2 in angular units
    space = ham.space
    i0 = space.index_of((0, 0))
    i1 = space.index_of((1, 0))
    assert h_mid[i0, i1] == pytest.approx(0.5 * angular_from_MHz(30.0), rel=1e-12)


def test_lab_rwa_detuned_tone_is_hermitian_pair():
    dev = build_device(
        modes=(TransmonSpec("Q1", 5.15), TransmonSpec("Q2", 5.05)),
    )
    env = PulseEnvelope(gate_ns=100.0, peak_MHz=20.0, ramp_ns=0.0)
    ham = drive_hamiltonian(
        dev,
        [DriveSpec("Q1", 5.15, env), DriveSpec("Q2", 5.10, env)],
        frame="lab_rwa",
    )
    assert ham.reference_GHz == 5.15
    # resonant tone contributes one term, detuned tone a conjugate pair
    assert len(ham.terms) == 3
    for t in (0.0, 13.7, 61.2):
        assert hermiticity_defect(ham.value_at(t)) < 1e-12
    assert not ham.is_static_on(10.0, 90.0)


def test_lab_full_cosine_carrier():
    dev = _cap_pair()
    env = PulseEnvelope(gate_ns=10.0, peak_MHz=30.0, ramp_ns=0.0)
    ham = drive_hamiltonian(dev, [DriveSpec("Q1", 5.05, env)], frame="lab_full")
    assert ham.reference_GHz == 0.0
    period_ns = 1.0 / 5.05  # one carrier cycle
    h_a = ham.value_at(1.0).toarray()
    h_b = ham.value_at(1.0 + period_ns).toarray()
    assert np.max(np.abs(h_a - h_b)) < 1e-6
    # carrier zero crossing kills the drive term entirely
    h_node = ham.value_at(0.25 * period_ns)
    assert np.max(np.abs((h_node - ham.static).toarray())) < 1e-6


def test_space_reuse():
    dev = _cap_pair()
    space = SpaceMap.from_device(dev)
    env = PulseEnvelope(gate_ns=10.0, peak_MHz=5.0, ramp_ns=0.0)
    ham = drive_hamiltonian(dev, [DriveSpec("Q1", 5.05, env)], space=space)
    assert ham.space is space
