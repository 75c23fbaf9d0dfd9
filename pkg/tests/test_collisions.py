"""Collision audit tests: enumeration oracle, bounds, and Stark reachability."""

import json
import math

import pytest
from hypothesis import given, strategies as st

from crossres.collisions import (
    BoundsConfig,
    CollisionCondition,
    StarkReachability,
    audit,
    stark_reachability,
)
from crossres.device import (
    CouplingSpec,
    ResonatorSpec,
    TransmonSpec,
    build_device,
    unit_gate_directions,
    unit_preset,
    unit_spectator_controls,
)
from crossres.perturb import PoleError, ac_stark

ALPHA = -0.33


def _chain(freqs, couple=2.0):
    """Directly coupled qubit chain Q0-Q1-... at the given frequencies."""
    modes = [TransmonSpec(f"Q{i}", f, ALPHA) for i, f in enumerate(freqs)]
    couplings = [
        CouplingSpec((f"Q{i}", f"Q{i+1}"), couple) for i in range(len(freqs) - 1)
    ]
    return build_device(modes, couplings)


class TestCollisionCondition:
    def test_margin_and_violation(self):
        clear = CollisionCondition("S1", ("Q0", "Q1"), 5.25, 5.15, 10.0)
        assert clear.margin_MHz == pytest.approx(100.0)
        assert not clear.violated
        hit = CollisionCondition("S1", ("Q0", "Q1"), 5.152, 5.150, 10.0)
        assert hit.margin_MHz == pytest.approx(2.0)
        assert hit.violated

    @given(
        lhs=st.floats(4.0, 6.0),
        rhs=st.floats(4.0, 6.0),
        bound=st.floats(0.1, 50.0),
    )
    def test_invariants(self, lhs, rhs, bound):
        c = CollisionCondition("D2", ("A", "B", "C"), lhs, rhs, bound)
        assert c.margin_MHz == (lhs - rhs) * 1e3
        assert c.violated == (abs(c.margin_MHz) < bound)

    def test_validation(self):
        with pytest.raises(ValueError, match="kind"):
            CollisionCondition("S9", ("A", "B"), 5.0, 5.1, 10.0)
        with pytest.raises(ValueError, match="participants"):
            CollisionCondition("S1", ("A",), 5.0, 5.1, 10.0)
        with pytest.raises(ValueError, match="bound"):
            CollisionCondition("S1", ("A", "B"), 5.0, 5.1, 0.0)
        with pytest.raises(ValueError, match="drive"):
            CollisionCondition("S1", ("A", "B"), 5.0, 5.1, 10.0, drive_MHz=-1.0)
        with pytest.raises(ValueError, match="finite"):
            CollisionCondition("S1", ("A", "B"), float("nan"), 5.1, 10.0)

    def test_to_dict_round_trip(self):
        c = CollisionCondition("DR", ("Q2", "R1", "Q3"), 10.56, 10.50, 10.0)
        d = c.to_dict()
        assert d["kind"] == "DR"
        assert d["participants"] == ["Q2", "R1", "Q3"]
        assert d["margin_MHz"] == pytest.approx(60.0)
        assert d["violated"] is False


class TestBoundsConfig:
    def test_defaults(self):
        b = BoundsConfig()
        assert b.near_MHz == 10.0
        assert b.next_nearest_MHz == 0.5
        assert b.bound_for("D4") == 10.0
        assert b.bound_for("S1", next_nearest=True) == 0.5

    def test_for_target_error(self):
        assert BoundsConfig.for_target_error(0.01) == BoundsConfig(10.0, 0.5)
        assert BoundsConfig.for_target_error(1e-3) == BoundsConfig(30.0, 2.0)
        with pytest.raises(ValueError, match="target error"):
            BoundsConfig.for_target_error(0.02)

    def test_overrides(self):
        b = BoundsConfig(overrides_MHz={"DR": 5.0})
        assert b.bound_for("DR") == 5.0
        assert b.bound_for("S1") == 10.0
        assert b.bound_for("DR", next_nearest=True) == 0.5
        with pytest.raises(ValueError, match="unknown collision kind"):
            BoundsConfig(overrides_MHz={"XX": 5.0})
        with pytest.raises(ValueError, match="positive"):
            BoundsConfig(near_MHz=0.0)


def _expected_line_rows():
    """Independent enumeration of the line-unit audit, as (kind, parts, margin)."""
    f = {"Q0": 5.15, "Q1": 5.05, "Q2": 5.14, "Q3": 5.25}
    r = {"R0": 5.40, "R1": 5.41, "R2": 5.47}
    gates = [("Q0", "Q1"), ("Q2", "Q1"), ("Q2", "Q3")]
    nbrs = {"Q0": ["Q1"], "Q1": ["Q0", "Q2"], "Q2": ["Q1", "Q3"], "Q3": ["Q2"]}
    res = {"Q0": ["R0"], "Q1": ["R0", "R1"], "Q2": ["R1", "R2"], "Q3": ["R2"]}
    rows = set()

    def add(kind, parts, lhs, rhs):
        rows.add((kind, parts, round((lhs - rhs) * 1e3, 6)))

    done_pairs = set()
    for j, i in gates:
        add("S1", (j, i), f[j], f[i])
        add("S2", (j, i), f[j], f[i] + ALPHA)
        add("D1", (j, i), f[i], f[j] + ALPHA / 2)
        for k in nbrs[j]:
            if k == i:
                continue
            add("D3", (j, i, k), f[i], f[k] + ALPHA)
            if (j, frozenset((i, k))) in done_pairs:
                continue
            done_pairs.add((j, frozenset((i, k))))
            add("D2", (j, i, k), f[i], f[k])
            add("D4", (j, i, k), 2 * f[j] + ALPHA, f[i] + f[k])
        for rr in res[j]:
            add("DR", (j, rr, i), r[rr] + f[j], 2 * f[i])
    add("S1", ("Q0", "Q2", "Q1"), f["Q0"], f["Q2"])
    add("S1", ("Q1", "Q3", "Q2"), f["Q1"], f["Q3"])
    return rows


class TestAuditEnumeration:
    def test_line_unit_matches_brute_force(self):
        report = audit(unit_preset("line"), unit_gate_directions("line"))
        got = {
            (c.kind, c.participants, round(c.margin_MHz, 6)) for c in report.conditions
        }
        assert got == _expected_line_rows()
        assert len(report) == len(report.conditions) == 20
        assert report.violations() == ()

    def test_line_unit_bounds_and_flags(self):
        report = audit(unit_preset("line"), unit_gate_directions("line"))
        by_parts = {(c.kind, c.participants): c for c in report.conditions}
        nn = by_parts[("S1", ("Q0", "Q2", "Q1"))]
        assert nn.margin_MHz == pytest.approx(10.0)
        assert nn.bound_MHz == 0.5
        assert not nn.violated
        # Q2's drive toward Q1 pulls it by ~19 MHz at the 50 MHz probe,
        # larger than the 10 MHz margin to Q0.
        assert nn.stark_reachable
        far = by_parts[("S1", ("Q1", "Q3", "Q2"))]
        assert far.margin_MHz == pytest.approx(-200.0)
        assert not far.stark_reachable
        for c in report.conditions:
            if len(c.participants) == 3 and c.kind == "S1":
                continue
            assert c.bound_MHz == 10.0

    def test_d2_d4_once_per_spectator_pair(self):
        report = audit(unit_preset("line"), unit_gate_directions("line"))
        assert len(report.of_kind("D2")) == 1
        assert len(report.of_kind("D4")) == 1
        assert report.of_kind("D2")[0].participants == ("Q2", "Q1", "Q3")
        # D3 is orientation specific, so both gate contexts appear.
        assert len(report.of_kind("D3")) == 2

    def test_d1_three_frequency_margin(self):
        dev = _chain([5.25, 5.15, 5.05])
        report = audit(dev, [("Q1", "Q0"), ("Q1", "Q2")])
        d1 = {c.participants: c for c in report.of_kind("D1")}
        assert d1[("Q1", "Q0")].margin_MHz == pytest.approx(265.0)
        assert d1[("Q1", "Q2")].margin_MHz == pytest.approx(65.0)

    def test_dr_colliding_target_frequency(self):
        modes = (
            TransmonSpec("Qj", 5.15, ALPHA),
            ResonatorSpec("R", 5.41),
            TransmonSpec("Qi", 5.28, ALPHA),
        )
        couplings = (CouplingSpec(("Qj", "R"), 25.0), CouplingSpec(("R", "Qi"), 25.0))
        dev = build_device(modes, couplings)
        report = audit(dev, [("Qj", "Qi")])
        (dr,) = report.of_kind("DR")
        assert dr.participants == ("Qj", "R", "Qi")
        assert dr.lhs_GHz / 2 == pytest.approx(5.28)
        assert dr.margin_MHz == pytest.approx(0.0, abs=1e-9)
        assert dr.violated
        clear = audit(dev.with_frequencies({"Qi": 5.05}), [("Qj", "Qi")])
        (dr2,) = clear.of_kind("DR")
        assert dr2.margin_MHz == pytest.approx(460.0)
        assert not dr2.violated

    def test_undirected_control_band_pair(self):
        report = audit(
            unit_preset("tee"),
            unit_gate_directions("tee"),
            spectator_controls=unit_spectator_controls("tee"),
        )
        s1 = {c.participants: c for c in report.of_kind("S1")}
        assert s1[("Q2", "Q3")].margin_MHz == pytest.approx(-20.0)
        s2 = {c.participants: c for c in report.of_kind("S2")}
        assert s2[("Q2", "Q3")].margin_MHz == pytest.approx(310.0)
        assert s2[("Q3", "Q2")].margin_MHz == pytest.approx(350.0)


class TestAuditValidation:
    def test_missing_direction(self):
        with pytest.raises(ValueError, match="no gate direction"):
            audit(unit_preset("tee"), unit_gate_directions("tee"))

    def test_gate_on_uncoupled_pair(self):
        with pytest.raises(ValueError, match="not a coupled qubit pair"):
            audit(unit_preset("line"), [("Q0", "Q3")])

    def test_duplicate_direction(self):
        gates = [("Q0", "Q1"), ("Q1", "Q0"), ("Q2", "Q1"), ("Q2", "Q3")]
        with pytest.raises(ValueError, match="duplicate gate direction"):
            audit(unit_preset("line"), gates)

    def test_unknown_and_resonator_endpoints(self):
        with pytest.raises(ValueError, match="not a transmon"):
            audit(unit_preset("line"), [("Q0", "Q9")])
        with pytest.raises(ValueError, match="not a transmon"):
            audit(unit_preset("line"), [("Q0", "R0")])
        with pytest.raises(ValueError, match="spectator control"):
            audit(
                unit_preset("line"),
                unit_gate_directions("line"),
                spectator_controls=("R1",),
            )

    def test_negative_amplitudes(self):
        dev = unit_preset("line")
        gates = unit_gate_directions("line")
        with pytest.raises(ValueError, match="stark_probe"):
            audit(dev, gates, stark_probe_MHz=-1.0)
        with pytest.raises(ValueError, match="stark_drive"):
            audit(dev, gates, stark_drive_MHz=-1.0)

    def test_pole_in_shifted_pass(self):
        dev = _chain([5.15, 4.82])  # detuning exactly at -alpha
        # The probe screen skips the pole silently.
        audit(dev, [("Q0", "Q1")])
        with pytest.raises(PoleError):
            audit(dev, [("Q0", "Q1")], stark_drive_MHz=50.0)


class TestGlobalShiftInvariance:
    @given(shift=st.floats(-0.05, 0.05))
    def test_difference_kinds_invariant(self, shift):
        dev = unit_preset("line")
        gates = unit_gate_directions("line")
        moved = dev.with_frequencies(
            {t.label: t.frequency + shift for t in dev.transmons}
        )
        base = {
            (c.kind, c.participants): c.margin_MHz
            for c in audit(dev, gates).conditions
        }
        for c in audit(moved, gates).conditions:
            key = (c.kind, c.participants)
            if c.kind in ("S1", "S2", "D1", "D2", "D3", "D4"):
                assert c.margin_MHz == pytest.approx(base[key], abs=1e-6)
            else:
                j, r, i = c.participants
                f = {t.label: t.frequency for t in moved.transmons}
                w_r = next(m.frequency for m in moved.resonators if m.label == r)
                assert c.margin_MHz == pytest.approx(
                    (w_r + f[j] - 2 * f[i]) * 1e3, abs=1e-6
                )


class TestStarkShiftedPass:
    def test_shifted_margins(self):
        report = audit(
            unit_preset("tee"),
            unit_gate_directions("tee"),
            spectator_controls=unit_spectator_controls("tee"),
            stark_drive_MHz=50.0,
        )
        bare = {
            (c.kind, c.participants): c
            for c in report.conditions
            if c.drive_MHz == 0.0
        }
        shifted = {
            (c.kind, c.participants): c
            for c in report.conditions
            if c.drive_MHz == 50.0
        }
        pull_q2 = ac_stark(50.0, (5.14 - 5.05) * 1e3, ALPHA * 1e3)
        assert pull_q2 == pytest.approx(19.0972, abs=1e-3)

        key = ("S1", ("Q2", "Q1"))
        assert shifted[key].margin_MHz == pytest.approx(
            bare[key].margin_MHz + pull_q2, abs=1e-9
        )
        key = ("D1", ("Q2", "Q1"))
        assert shifted[key].margin_MHz == pytest.approx(
            bare[key].margin_MHz - pull_q2, abs=1e-9
        )
        key = ("D4", ("Q2", "Q1", "Q3"))
        assert shifted[key].margin_MHz == pytest.approx(
            bare[key].margin_MHz + 2 * pull_q2, abs=1e-9
        )
        for kind in ("D2", "D3"):
            key = (kind, ("Q2", "Q1", "Q3"))
            assert shifted[key].margin_MHz == pytest.approx(
                bare[key].margin_MHz, abs=1e-12
            )
        key = ("DR", ("Q2", "R1", "Q1"))
        assert shifted[key].margin_MHz == pytest.approx(
            bare[key].margin_MHz + pull_q2, abs=1e-9
        )
        # The drive pulls Q2 up through Q3, inside the 10 MHz bound at 50 MHz.
        assert shifted[("S1", ("Q2", "Q3"))].violated
        assert not bare[("S1", ("Q2", "Q3"))].violated

    def test_shifted_rows_only_when_requested(self):
        dev = unit_preset("line")
        gates = unit_gate_directions("line")
        assert all(c.drive_MHz == 0.0 for c in audit(dev, gates).conditions)
        with_drive = audit(dev, gates, stark_drive_MHz=30.0)
        drives = {c.drive_MHz for c in with_drive.conditions}
        assert drives == {0.0, 30.0}
        n_bare = sum(c.drive_MHz == 0.0 for c in with_drive.conditions)
        assert n_bare == len(audit(dev, gates))

    def test_shifted_d4_kept_per_gate(self):
        report = audit(unit_preset("line"), unit_gate_directions("line"), stark_drive_MHz=50.0)
        shifted_d4 = [c for c in report.of_kind("D4") if c.drive_MHz > 0]
        assert {c.participants for c in shifted_d4} == {
            ("Q2", "Q1", "Q3"),
            ("Q2", "Q3", "Q1"),
        }
        margins = {c.participants: c.margin_MHz for c in shifted_d4}
        assert margins[("Q2", "Q1", "Q3")] != pytest.approx(
            margins[("Q2", "Q3", "Q1")], abs=1.0
        )


class TestStarkReachability:
    def test_crossing_matches_inverse_formula(self):
        cond = CollisionCondition("S1", ("A", "B"), 5.16, 5.15, 0.5)
        result = stark_reachability(cond, 70.0, -100.0, -330.0)
        assert result == StarkReachability(True, pytest.approx(51.0496, abs=1e-3))
        assert ac_stark(result.crossing_MHz, -100.0, -330.0) == pytest.approx(
            -cond.margin_MHz, abs=1e-9
        )

    def test_out_of_range_margin(self):
        cond = CollisionCondition("S1", ("A", "B"), 5.25, 5.15, 0.5)
        assert stark_reachability(cond, 70.0, -100.0, -330.0) == StarkReachability(
            False, None
        )

    def test_zero_margin(self):
        cond = CollisionCondition("S1", ("A", "B"), 5.15, 5.15, 0.5)
        assert stark_reachability(cond, 70.0, -100.0, -330.0) == StarkReachability(
            True, 0.0
        )

    def test_wrong_sign_never_crosses(self):
        cond = CollisionCondition("S1", ("A", "B"), 5.14, 5.15, 0.5)
        assert stark_reachability(cond, 500.0, -100.0, -330.0) == StarkReachability(
            False, None
        )

    def test_positive_detuning_crossing(self):
        # Control 10 MHz below its next-nearest partner, driven from below.
        cond = CollisionCondition("S1", ("A", "B"), 5.14, 5.15, 0.5)
        result = stark_reachability(cond, 70.0, 90.0, -330.0)
        assert result.reachable
        assert result.crossing_MHz == pytest.approx(36.181, abs=1e-2)

    def test_pole_raises(self):
        cond = CollisionCondition("S1", ("A", "B"), 5.16, 5.15, 0.5)
        with pytest.raises(PoleError):
            stark_reachability(cond, 70.0, 0.0, -330.0)
        with pytest.raises(PoleError):
            stark_reachability(cond, 70.0, 330.0, -330.0)
        with pytest.raises(ValueError, match="omega_max"):
            stark_reachability(cond, -1.0, -100.0, -330.0)


class TestReportInterfaces:
    def test_rows_schema(self):
        report = audit(unit_preset("line"), unit_gate_directions("line"))
        rows = report.rows()
        assert len(rows) == len(report)
        for row in rows:
            assert list(row) == [
                "kind",
                "participants",
                "margin_MHz",
                "bound_MHz",
                "violated",
            ]
            assert isinstance(row["violated"], bool)
        parts = {row["participants"] for row in rows}
        assert "Q2;R1;Q1" in parts

    def test_json_round_trip(self):
        report = audit(unit_preset("line"), unit_gate_directions("line"))
        data = json.loads(report.to_json())
        assert len(data) == len(report)
        assert data[0]["kind"] == "S1"
        margins = {
            (d["kind"], tuple(d["participants"])): d["margin_MHz"] for d in data
        }
        assert margins[("S1", ("Q0", "Q2", "Q1"))] == pytest.approx(10.0)

    def test_of_kind_validates(self):
        report = audit(unit_preset("line"), unit_gate_directions("line"))
        with pytest.raises(ValueError, match="unknown collision kind"):
            report.of_kind("ZZ")
