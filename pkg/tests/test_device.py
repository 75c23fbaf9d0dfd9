import math

import pytest

from crossres.device import (
    COUPLING_REFERENCE_GHZ,
    CouplingSpec,
    Device,
    ResonatorSpec,
    TransmonSpec,
    build_device,
    next_nearest_qubit_pairs,
    pair_preset,
    unit_gate_directions,
    unit_preset,
    unit_simultaneous_pairs,
    unit_spectator_controls,
)

REL = 1e-12


def make_pair_device():
    return build_device(
        modes=(
            TransmonSpec("Q1", 5.15),
            ResonatorSpec("R", 5.40),
            TransmonSpec("Q2", 5.05),
        ),
        couplings=(
            CouplingSpec(("Q1", "R"), 25.0),
            CouplingSpec(("R", "Q2"), 25.0),
        ),
    )


def test_mode_lookup_and_ordering():
    dev = make_pair_device()
    assert dev.labels == ("Q1", "R", "Q2")
    assert dev.dims == (4, 4, 4)
    assert dev.mode_index("R") == 1
    assert dev.mode("Q2").frequency == 5.05
    assert tuple(q.label for q in dev.transmons) == ("Q1", "Q2")
    assert tuple(r.label for r in dev.resonators) == ("R",)
    with pytest.raises(KeyError):
        dev.mode_index("Q9")


def test_validation_rejects_bad_specs():
    with pytest.raises(ValueError):
        TransmonSpec("Q1", 5.0, anharmonicity=0.1)
    with pytest.raises(ValueError):
        TransmonSpec("Q1", -5.0)
    with pytest.raises(ValueError):
        TransmonSpec("Q1", 5.0, levels=2)
    with pytest.raises(ValueError):
        ResonatorSpec("R", 5.4, levels=1)
    with pytest.raises(ValueError):
        CouplingSpec(("Q1", "Q1"), 2.0)
    with pytest.raises(ValueError):
        CouplingSpec(("Q1", "Q2"), float("nan"))
    with pytest.raises(ValueError):
        build_device(
            modes=(TransmonSpec("Q1", 5.0), TransmonSpec("Q1", 5.1)),
        )
    with pytest.raises(ValueError):
        build_device(
            modes=(TransmonSpec("Q1", 5.0),),
            couplings=(CouplingSpec(("Q1", "Q9"), 2.0),),
        )
    with pytest.raises(ValueError):
        build_device(modes=(TransmonSpec("Q1", 5.0),), excitation_cutoff=0)


def test_effective_cutoff_rules():
    dev = make_pair_device()
    assert dev.effective_cutoff() is None
    assert dev.with_excitation_cutoff(3).effective_cutoff() == 3
    unit = unit_preset("line")
    assert unit.effective_cutoff() == 5
    assert unit.with_excitation_cutoff(6).effective_cutoff() == 6


def test_neighbors_and_pair_enumeration():
    dev = make_pair_device()
    assert dev.neighbors("R") == ("Q1", "Q2")
    assert dev.coupling_between("Q2", "R").strength == 25.0
    assert dev.coupling_between("Q1", "Q2") is None
    assert dev.qubit_pairs() == (("Q1", "Q2"),)

    unit = unit_preset("line")
    assert unit.qubit_pairs() == (("Q0", "Q1"), ("Q1", "Q2"), ("Q2", "Q3"))
    assert next_nearest_qubit_pairs(unit) == (("Q0", "Q1", "Q2"), ("Q1", "Q2", "Q3"))


def test_functional_updates_leave_original_untouched():
    dev = make_pair_device()
    moved = dev.with_frequencies({"Q2": 5.25, "R": 5.45})
    assert moved.mode("Q2").frequency == 5.25
    assert moved.mode("R").frequency == 5.45
    assert dev.mode("Q2").frequency == 5.05
    restrung = dev.with_coupling("Q1", "R", 30.0)
    assert restrung.coupling_between("Q1", "R").strength == 30.0
    assert dev.coupling_between("Q1", "R").strength == 25.0
    with pytest.raises(KeyError):
        dev.with_coupling("Q1", "Q2", 1.0)
    with pytest.raises(KeyError):
        dev.with_frequencies({"Q9": 5.0})


def test_json_round_trip():
    for dev in (make_pair_device(), unit_preset("tee", excitation_cutoff=5)):
        assert Device.from_json(dev.to_json()) == dev


def test_from_dict_rejects_unknown_kind():
    with pytest.raises(ValueError):
        Device.from_dict({"modes": [{"kind": "squid", "label": "S", "frequency_GHz": 5.0}]})


def test_pair_presets_unscaled_values():
    cap = pair_preset("capacitor", scale_with_frequency=False)
    assert cap.labels == ("Q1", "Q2")
    assert cap.coupling_between("Q1", "Q2").strength == 2.0

    res = pair_preset("resonator", scale_with_frequency=False)
    assert res.labels == ("Q1", "R", "Q2")
    assert res.mode("R").frequency == pytest.approx(6.15, rel=REL)
    assert res.coupling_between("Q1", "R").strength == 78.0
    stray = res.coupling_between("Q1", "Q2").strength
    assert stray == pytest.approx(2.0 * 78.0 * 78.0 / 6150.0, rel=REL)

    multi = pair_preset("multipath", scale_with_frequency=False)
    assert multi.coupling_between("Q1", "Q2").strength == 6.0
    assert multi.coupling_between("R", "Q2").strength == 78.0

    light = pair_preset("lightweight", scale_with_frequency=False)
    assert light.mode("R").frequency == pytest.approx(5.40, rel=REL)
    assert light.coupling_between("Q1", "R").strength == 25.0
    assert light.coupling_between("Q1", "Q2") is None

    for dev in (cap, res, multi, light):
        assert dev.mode("Q1").frequency == 5.15
        assert dev.mode("Q2").frequency == 5.05
        for q in dev.transmons:
            assert q.anharmonicity == -0.33


def test_pair_preset_frequency_scaling():
    light = pair_preset("lightweight")
    expected = 25.0 * math.sqrt(5.15 * 5.40) / COUPLING_REFERENCE_GHZ
    assert light.coupling_between("Q1", "R").strength == pytest.approx(expected, rel=REL)
    with pytest.raises(ValueError):
        pair_preset("inductive")


def test_unit_preset_layout():
    line = unit_preset("line", scale_with_frequency=False)
    assert line.labels == ("Q0", "R0", "Q1", "R1", "Q2", "R2", "Q3")
    freqs = tuple(m.frequency for m in line.modes)
    assert freqs == (5.15, 5.40, 5.05, 5.41, 5.14, 5.47, 5.25)
    assert all(c.strength == 25.0 for c in line.couplings)

    tee = unit_preset("tee", scale_with_frequency=False)
    assert tee.mode("R2").frequency == 5.39
    assert tee.mode("Q3").frequency == 5.16

    perp = unit_preset("perp", scale_with_frequency=False)
    assert tuple(m.frequency for m in perp.modes) == (5.14, 5.47, 5.25, 5.48, 5.15, 5.49, 5.16)

    with pytest.raises(ValueError):
        unit_preset("ring")


def test_unit_gate_maps():
    assert unit_gate_directions("line") == (("Q0", "Q1"), ("Q2", "Q1"), ("Q2", "Q3"))
    assert unit_gate_directions("tee") == (("Q0", "Q1"), ("Q2", "Q1"))
    assert unit_gate_directions("perp") == (("Q2", "Q1"),)
    assert unit_spectator_controls("line") == ()
    assert unit_spectator_controls("tee") == ("Q3",)
    assert unit_spectator_controls("perp") == ("Q0", "Q3")
    assert unit_simultaneous_pairs("line") == (("Q0", "Q1"), ("Q2", "Q3"))
    assert unit_simultaneous_pairs("tee") == ()
    with pytest.raises(ValueError):
        unit_gate_directions("star")
