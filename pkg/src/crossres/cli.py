"""Declarative scenario runner and command-line interface.

A scenario is a TOML file describing one parameter sweep: a ``kind``
selecting the computation, an ``output`` CSV path, an optional ``seed``,
an optional ``device`` (inline table or path to a device JSON), and a
``[params]`` table whose keys depend on the kind. Swept parameters are
written either as explicit arrays or as inclusive ranges
``{ start = a, stop = b, count = n }``.

Every run writes the output CSV plus a ``<output>.manifest.json``
recording a hash of the configuration, the effective seed, package
versions, cell counts, and wall time. The CSV's first line is a comment
``# manifest <hash>`` tying the data to its manifest; floats are written
with 12 significant digits so reruns of the same scenario are
byte-identical. Relative paths inside a scenario resolve against the
scenario file's directory.

A sweep is split into independent cells evaluated in a thread pool
(``--jobs``); cell order, and therefore output bytes, do not depend on
the worker count. Exit codes: 0 on success, 2 for configuration errors,
3 when every cell failed numerically, 4 when only some did (the CSV then
holds the completed rows and the manifest lists the failures).
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import json
import platform
import sys
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass
from itertools import combinations
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy

try:
    import tomllib
except ModuleNotFoundError:
    import tomli as tomllib

from . import __version__
from .collisions import BoundsConfig, CollisionReport, audit
from .device import (
    PAIR_COUPLERS,
    UNIT_SHAPES,
    Device,
    pair_preset,
    unit_gate_directions,
    unit_preset,
    unit_simultaneous_pairs,
    unit_spectator_controls,
)
from .gates import (
    TuneUpConfig,
    characterize_isolated,
    characterize_simultaneous,
    dressed_frequency_GHz,
)
from .lattice import (
    DisorderSpec,
    StarkMitigation,
    _validate_mitigation_device,
    heavy_hex,
    lattice_gate_directions,
    lattice_spectator_controls,
    run_disorder_ensemble,
    run_stark_mitigation,
)
from .operators import SpaceMap
from .perturb import PoleError, estimate_couplings
from .statics import (
    dressed_scan,
    eigensolve_labeled,
    static_hamiltonian,
    xy_numeric,
    zz_numeric,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_PARTIAL = 4

SCENARIO_KINDS = (
    "coupling_landscape",
    "coupling_cut",
    "gate_vs_length",
    "dressed_scan",
    "unit_isolated",
    "unit_simultaneous",
    "disorder_ensemble",
    "stark_mitigation",
    "collision_audit",
    "perturbation_table",
)

# rwa convention under which each coupler's design numbers are quoted
TABLE_RWA = {
    "capacitor": True,
    "resonator": False,
    "multipath": False,
    "lightweight": True,
}

_TOP_LEVEL_KEYS = {"kind", "output", "seed", "jobs", "device", "params"}
_PAIR_KNOBS = ("resonator_GHz", "direct_MHz", "g_rq_MHz")


class ScenarioError(Exception):
    """Configuration problem in a scenario file or CLI arguments."""


@dataclass(frozen=True)
class Scenario:
    """Parsed scenario: what to compute, where to write it, how."""

    kind: str
    source: Path
    output: Path
    seed: Optional[int]
    jobs: int
    params: Dict[str, object]
    device: Optional[Device]
    doc: Dict[str, object]

    @property
    def base_dir(self) -> Path:
        return self.source.parent


@dataclass(frozen=True)
class RunPlan:
    """Fieldnames plus independent cells, each returning its rows."""

    fieldnames: Tuple[str, ...]
    cells: Tuple[Callable[[], List[Dict[str, object]]], ...]


def _format_value(value: object) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        v = float(value)
        if v == 0.0:
            v = 0.0
        return f"{v:.12g}"
    return str(value)


def _config_hash(doc: Dict[str, object], seed: Optional[int]) -> str:
    # jobs only changes wall time, never the data, so it must not move the hash
    stripped = {k: v for k, v in doc.items() if k != "jobs"}
    payload = {"scenario": stripped, "seed": seed}
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":"), default=str)
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def _as_number(node: object, name: str) -> float:
    if isinstance(node, bool) or not isinstance(node, (int, float)):
        raise ScenarioError(f"{name}: expected a number, got {type(node).__name__}")
    value = float(node)
    if not np.isfinite(value):
        raise ScenarioError(f"{name}: must be finite")
    return value


def _as_int(node: object, name: str) -> int:
    if isinstance(node, bool) or not isinstance(node, int):
        raise ScenarioError(f"{name}: expected an integer, got {type(node).__name__}")
    return node


def _as_bool(node: object, name: str) -> bool:
    if not isinstance(node, bool):
        raise ScenarioError(f"{name}: expected a boolean, got {type(node).__name__}")
    return node


def _as_str(node: object, name: str) -> str:
    if not isinstance(node, str):
        raise ScenarioError(f"{name}: expected a string, got {type(node).__name__}")
    return node


def _is_axis(node: object) -> bool:
    return isinstance(node, (list, dict))


def _axis_values(node: object, name: str) -> List[float]:
    """Materialize a swept parameter: explicit array or inclusive range."""
    if isinstance(node, list):
        if not node:
            raise ScenarioError(f"{name}: swept list must not be empty")
        return [_as_number(v, f"{name}[{i}]") for i, v in enumerate(node)]
    if isinstance(node, dict):
        extra = set(node) - {"start", "stop", "count"}
        if extra:
            raise ScenarioError(f"{name}: unknown range keys {sorted(extra)}")
        missing = {"start", "stop", "count"} - set(node)
        if missing:
            raise ScenarioError(f"{name}: range needs start, stop, count (missing {sorted(missing)})")
        start = _as_number(node["start"], f"{name}.start")
        stop = _as_number(node["stop"], f"{name}.stop")
        count = _as_int(node["count"], f"{name}.count")
        if count < 2:
            raise ScenarioError(f"{name}.count: must be >= 2, got {count}")
        return np.linspace(start, stop, count).tolist()
    raise ScenarioError(f"{name}: expected an array or a {{start, stop, count}} table")


def _check_params(params: Dict[str, object], allowed: Sequence[str], kind: str) -> None:
    unknown = set(params) - set(allowed)
    if unknown:
        raise ScenarioError(
            f"{kind}: unknown params {sorted(unknown)}; allowed: {sorted(allowed)}"
        )


def _parse_gate(text: object, name: str) -> Tuple[str, str]:
    gate = _as_str(text, name)
    parts = [p.strip() for p in gate.split(">")]
    if len(parts) != 2 or not parts[0] or not parts[1]:
        raise ScenarioError(f"{name}: expected 'CONTROL>TARGET', got {gate!r}")
    return parts[0], parts[1]


def _parse_gates(node: object, name: str) -> Tuple[Tuple[str, str], ...]:
    if not isinstance(node, list) or not node:
        raise ScenarioError(f"{name}: expected a non-empty array of 'CONTROL>TARGET' strings")
    return tuple(_parse_gate(g, f"{name}[{i}]") for i, g in enumerate(node))


def load_scenario(
    path: Path,
    jobs: Optional[int] = None,
    seed: Optional[int] = None,
) -> Scenario:
    """Parse and validate a scenario file; CLI overrides win over the file."""
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read scenario {path}: {exc}") from exc
    try:
        doc = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ScenarioError(f"{path}: {exc}") from exc

    unknown = set(doc) - _TOP_LEVEL_KEYS
    if unknown:
        raise ScenarioError(f"{path}: unknown top-level keys {sorted(unknown)}")
    if "kind" not in doc:
        raise ScenarioError(f"{path}: missing required key 'kind'")
    kind = _as_str(doc["kind"], "kind")
    if kind not in SCENARIO_KINDS:
        raise ScenarioError(f"unknown kind {kind!r}; expected one of {SCENARIO_KINDS}")
    if "output" not in doc:
        raise ScenarioError(f"{path}: missing required key 'output'")
    output = Path(_as_str(doc["output"], "output"))
    if not output.is_absolute():
        output = path.parent / output

    effective_seed = seed
    if effective_seed is None and "seed" in doc:
        effective_seed = _as_int(doc["seed"], "seed")
    effective_jobs = jobs if jobs is not None else (
        _as_int(doc["jobs"], "jobs") if "jobs" in doc else 1
    )
    if effective_jobs < 1:
        raise ScenarioError(f"jobs: must be >= 1, got {effective_jobs}")

    params = doc.get("params", {})
    if not isinstance(params, dict):
        raise ScenarioError("params: expected a table")

    device: Optional[Device] = None
    if "device" in doc:
        device = _load_device(doc["device"], path.parent)

    return Scenario(
        kind=kind,
        source=path,
        output=output,
        seed=effective_seed,
        jobs=effective_jobs,
        params=params,
        device=device,
        doc=doc,
    )


def _load_device(node: object, base_dir: Path) -> Device:
    if isinstance(node, str):
        device_path = Path(node)
        if not device_path.is_absolute():
            device_path = base_dir / device_path
        try:
            text = device_path.read_text()
        except OSError as exc:
            raise ScenarioError(f"cannot read device {device_path}: {exc}") from exc
        try:
            return Device.from_json(text)
        except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
            raise ScenarioError(f"invalid device JSON {device_path}: {exc}") from exc
    if isinstance(node, dict):
        try:
            return Device.from_dict(node)
        except (ValueError, KeyError, TypeError) as exc:
            raise ScenarioError(f"invalid inline device: {exc}") from exc
    raise ScenarioError("device: expected a JSON path or an inline table")


def _resolve_device(scenario: Scenario) -> Device:
    """Device from the scenario: explicit, unit preset, or lattice. Exactly one."""
    params = scenario.params
    sources = [
        s for s, present in (
            ("device", scenario.device is not None),
            ("unit", "unit" in params),
            ("lattice", "lattice" in params),
        ) if present
    ]
    if len(sources) != 1:
        raise ScenarioError(
            f"{scenario.kind}: specify exactly one device source "
            f"(top-level device, params.unit, or params.lattice); got {sources or 'none'}"
        )
    if scenario.device is not None:
        device = scenario.device
    elif "unit" in params:
        shape = _as_str(params["unit"], "unit")
        if shape not in UNIT_SHAPES:
            raise ScenarioError(f"unit: unknown shape {shape!r}; expected one of {UNIT_SHAPES}")
        device = unit_preset(shape)
    else:
        lat = params["lattice"]
        if not isinstance(lat, dict):
            raise ScenarioError("lattice: expected a table with rows and cols")
        extra = set(lat) - {"rows", "cols"}
        if extra:
            raise ScenarioError(f"lattice: unknown keys {sorted(extra)}")
        if "rows" not in lat or "cols" not in lat:
            raise ScenarioError("lattice: needs rows and cols")
        try:
            device = heavy_hex(_as_int(lat["rows"], "lattice.rows"), _as_int(lat["cols"], "lattice.cols"))
        except ValueError as exc:
            raise ScenarioError(f"lattice: {exc}") from exc
    if "cutoff" in params:
        cutoff = _as_int(params["cutoff"], "cutoff")
        try:
            device = device.with_excitation_cutoff(cutoff)
        except ValueError as exc:
            raise ScenarioError(f"cutoff: {exc}") from exc
    return device


def _unit_shape(scenario: Scenario) -> Optional[str]:
    if "unit" in scenario.params:
        return _as_str(scenario.params["unit"], "unit")
    return None


def _tuneup_config(params: Dict[str, object]) -> Optional[TuneUpConfig]:
    if "ramp_ns" not in params:
        return None
    return TuneUpConfig(ramp_ns=_as_number(params["ramp_ns"], "ramp_ns"))


def _pair_preset_kwargs(params: Dict[str, object], skip: Sequence[str] = ()) -> Dict[str, object]:
    """Scalar pass-through knobs shared by the pair-preset kinds."""
    kwargs: Dict[str, object] = {}
    if "control_GHz" in params:
        kwargs["control_GHz"] = _as_number(params["control_GHz"], "control_GHz")
    for knob in _PAIR_KNOBS + ("target_GHz",):
        if knob in params and knob not in skip and not _is_axis(params[knob]):
            kwargs[knob] = _as_number(params[knob], knob)
    if "scale_with_frequency" in params:
        kwargs["scale_with_frequency"] = _as_bool(
            params["scale_with_frequency"], "scale_with_frequency"
        )
    return kwargs


def _pair_perturbative(device: Device) -> Tuple[float, float]:
    """(zz_kHz, jxy_MHz) from the second-order estimate of a preset pair."""
    modes = {m.label: m for m in device.modes}
    if "Q1" not in modes or "Q2" not in modes:
        raise ScenarioError("perturbative columns need the preset labels Q1, Q2")
    strengths = {frozenset(c.endpoints): c.strength for c in device.couplings}
    g_12 = strengths.get(frozenset(("Q1", "Q2")), 0.0)
    g_r1 = strengths.get(frozenset(("Q1", "R")), 0.0)
    g_r2 = strengths.get(frozenset(("Q2", "R")), 0.0)
    q1, q2 = modes["Q1"], modes["Q2"]
    delta = (q1.frequency - q2.frequency) * 1e3
    if "R" in modes and g_r1 != 0.0 and g_r2 != 0.0:
        delta_1 = (q1.frequency - modes["R"].frequency) * 1e3
        delta_2 = (q2.frequency - modes["R"].frequency) * 1e3
    else:
        delta_1 = delta_2 = None
        g_r1 = g_r2 = 0.0
    estimate = estimate_couplings(
        g_r1, g_r2, g_12, delta_1, delta_2, delta,
        q1.anharmonicity * 1e3, q2.anharmonicity * 1e3,
    )
    return estimate.zz_total, estimate.j_xy


def _landscape_axes(params: Dict[str, object], kind: str) -> Tuple[str, List[float]]:
    swept = [k for k in _PAIR_KNOBS if k in params and _is_axis(params[k])]
    if len(swept) != 1:
        raise ScenarioError(
            f"{kind}: sweep exactly one of {_PAIR_KNOBS} (as an array or range); got {swept or 'none'}"
        )
    name = swept[0]
    return name, _axis_values(params[name], name)


def _prepare_coupling_landscape(scenario: Scenario) -> RunPlan:
    params = scenario.params
    _check_params(
        params,
        ("coupler", "control_GHz", "target_GHz", "rwa", "scale_with_frequency") + _PAIR_KNOBS,
        scenario.kind,
    )
    if "coupler" not in params:
        raise ScenarioError("coupling_landscape: missing params.coupler")
    coupler = _as_str(params["coupler"], "coupler")
    if "target_GHz" not in params or not _is_axis(params["target_GHz"]):
        raise ScenarioError("coupling_landscape: target_GHz must be swept (array or range)")
    targets = _axis_values(params["target_GHz"], "target_GHz")
    knob, knob_values = _landscape_axes(params, scenario.kind)
    rwa = _as_bool(params.get("rwa", True), "rwa")
    kwargs = _pair_preset_kwargs(params, skip=("target_GHz", knob))

    def make_cell(t: float, v: float) -> Callable[[], List[Dict[str, object]]]:
        def cell() -> List[Dict[str, object]]:
            device = pair_preset(coupler, target_GHz=t, **{knob: v}, **kwargs)
            zz = zz_numeric(device, ("Q1", "Q2"), rwa=rwa)
            try:
                jxy = xy_numeric(device, ("Q1", "Q2"), rwa=rwa)
            except ValueError:
                jxy = float("nan")
            return [{"target_GHz": t, knob: v, "zz_kHz": zz, "jxy_MHz": jxy}]
        return cell

    cells = tuple(make_cell(t, v) for t in targets for v in knob_values)
    return RunPlan(("target_GHz", knob, "zz_kHz", "jxy_MHz"), cells)


def _prepare_coupling_cut(scenario: Scenario) -> RunPlan:
    params = scenario.params
    _check_params(
        params,
        ("coupler", "control_GHz", "target_GHz", "rwa", "scale_with_frequency") + _PAIR_KNOBS,
        scenario.kind,
    )
    if "coupler" not in params:
        raise ScenarioError("coupling_cut: missing params.coupler")
    coupler = _as_str(params["coupler"], "coupler")
    candidates = _PAIR_KNOBS + ("target_GHz",)
    swept = [k for k in candidates if k in params and _is_axis(params[k])]
    if len(swept) != 1:
        raise ScenarioError(
            f"coupling_cut: sweep exactly one of {candidates}; got {swept or 'none'}"
        )
    axis = swept[0]
    values = _axis_values(params[axis], axis)
    rwa = _as_bool(params.get("rwa", True), "rwa")
    kwargs = _pair_preset_kwargs(params, skip=(axis,))

    def make_cell(v: float) -> Callable[[], List[Dict[str, object]]]:
        def cell() -> List[Dict[str, object]]:
            device = pair_preset(coupler, **{axis: v}, **kwargs)
            zz = zz_numeric(device, ("Q1", "Q2"), rwa=rwa)
            try:
                jxy = xy_numeric(device, ("Q1", "Q2"), rwa=rwa)
            except ValueError:
                jxy = float("nan")
            try:
                zz_est, jxy_est = _pair_perturbative(device)
            except PoleError:
                zz_est, jxy_est = float("nan"), float("nan")
            return [{
                axis: v,
                "zz_kHz": zz,
                "jxy_MHz": jxy,
                "zz_perturbative_kHz": zz_est,
                "jxy_perturbative_MHz": jxy_est,
            }]
        return cell

    cells = tuple(make_cell(v) for v in values)
    return RunPlan(
        (axis, "zz_kHz", "jxy_MHz", "zz_perturbative_kHz", "jxy_perturbative_MHz"), cells
    )


_GATE_FIELDS = ("t_g_ns", "error", "leakage", "omega1_MHz", "omega2_MHz", "converged")


def _gate_row(report) -> Dict[str, object]:
    return {
        "t_g_ns": report.t_g_ns,
        "error": report.error,
        "leakage": report.leakage,
        "omega1_MHz": report.omega1_MHz,
        "omega2_MHz": report.omega2_MHz,
        "converged": report.converged,
    }


def _prepare_gate_vs_length(scenario: Scenario) -> RunPlan:
    params = scenario.params
    _check_params(
        params,
        ("coupler", "couplers", "lengths_ns", "control_GHz", "target_GHz", "ramp_ns",
         "scale_with_frequency") + _PAIR_KNOBS,
        scenario.kind,
    )
    if ("coupler" in params) == ("couplers" in params):
        raise ScenarioError("gate_vs_length: give exactly one of coupler or couplers")
    if "coupler" in params:
        couplers = [_as_str(params["coupler"], "coupler")]
    else:
        node = params["couplers"]
        if not isinstance(node, list) or not node:
            raise ScenarioError("couplers: expected a non-empty array of coupler names")
        couplers = [_as_str(c, f"couplers[{i}]") for i, c in enumerate(node)]
    for c in couplers:
        if c not in PAIR_COUPLERS:
            raise ScenarioError(f"unknown coupler {c!r}; expected one of {PAIR_COUPLERS}")
    if "lengths_ns" not in params:
        raise ScenarioError("gate_vs_length: missing params.lengths_ns")
    lengths = _axis_values(params["lengths_ns"], "lengths_ns")
    config = _tuneup_config(params)
    kwargs = _pair_preset_kwargs(params)

    def make_cell(coupler: str, t_g: float) -> Callable[[], List[Dict[str, object]]]:
        def cell() -> List[Dict[str, object]]:
            device = pair_preset(coupler, **kwargs)
            report = characterize_isolated(device, ("Q1", "Q2"), t_g, config=config)
            row: Dict[str, object] = {"coupler": coupler}
            row.update(_gate_row(report))
            return [row]
        return cell

    cells = tuple(make_cell(c, t_g) for c in couplers for t_g in lengths)
    return RunPlan(("coupler",) + _GATE_FIELDS, cells)


def _prepare_dressed_scan(scenario: Scenario) -> RunPlan:
    params = scenario.params
    _check_params(
        params,
        ("unit", "lattice", "cutoff", "control", "amplitudes_MHz", "frequency_GHz",
         "carrier_target", "targets", "rwa"),
        scenario.kind,
    )
    device = _resolve_device(scenario)
    if "control" not in params:
        raise ScenarioError("dressed_scan: missing params.control")
    control = _as_str(params["control"], "control")
    if control not in {m.label for m in device.modes}:
        raise ScenarioError(f"control: no mode named {control!r}")
    if "amplitudes_MHz" not in params:
        raise ScenarioError("dressed_scan: missing params.amplitudes_MHz")
    amplitudes = _axis_values(params["amplitudes_MHz"], "amplitudes_MHz")
    rwa = _as_bool(params.get("rwa", True), "rwa")
    if ("frequency_GHz" in params) == ("carrier_target" in params):
        raise ScenarioError("dressed_scan: give exactly one of frequency_GHz or carrier_target")
    frequency = (
        _as_number(params["frequency_GHz"], "frequency_GHz")
        if "frequency_GHz" in params else None
    )
    carrier_target = (
        _as_str(params["carrier_target"], "carrier_target")
        if "carrier_target" in params else None
    )
    if carrier_target is not None and carrier_target not in {m.label for m in device.modes}:
        raise ScenarioError(f"carrier_target: no mode named {carrier_target!r}")
    targets: Optional[Tuple[Tuple[int, ...], ...]] = None
    if "targets" in params:
        node = params["targets"]
        if not isinstance(node, list) or not node:
            raise ScenarioError("targets: expected a non-empty array of occupation strings")
        parsed = []
        for i, item in enumerate(node):
            text = _as_str(item, f"targets[{i}]")
            if not text.isdigit() or len(text) != len(device.modes):
                raise ScenarioError(
                    f"targets[{i}]: expected {len(device.modes)} digits, got {text!r}"
                )
            parsed.append(tuple(int(ch) for ch in text))
        targets = tuple(parsed)

    def cell() -> List[Dict[str, object]]:
        carrier = frequency
        if carrier is None:
            space = SpaceMap.from_device(device)
            spectrum = eigensolve_labeled(static_hamiltonian(device, space, rwa=rwa), space)
            carrier = dressed_frequency_GHz(spectrum, space, carrier_target)
        scan = dressed_scan(device, control, amplitudes, carrier, rwa=rwa, targets=targets)
        rows: List[Dict[str, object]] = []
        for k, amp in enumerate(scan.amplitudes):
            for i, occ in enumerate(scan.labels):
                rows.append({
                    "amplitude_MHz": float(amp),
                    "level_index": i,
                    "label": "".join(str(n) for n in occ),
                    "energy_MHz": float(scan.energies[k, i]),
                    "carrier_GHz": carrier,
                })
        return rows

    return RunPlan(
        ("amplitude_MHz", "level_index", "label", "energy_MHz", "carrier_GHz"), (cell,)
    )


def _prepare_unit_isolated(scenario: Scenario) -> RunPlan:
    params = scenario.params
    _check_params(
        params, ("unit", "lattice", "cutoff", "gates", "lengths_ns", "ramp_ns"), scenario.kind
    )
    device = _resolve_device(scenario)
    if "gates" in params:
        gates = _parse_gates(params["gates"], "gates")
    else:
        shape = _unit_shape(scenario)
        if shape is None:
            raise ScenarioError("unit_isolated: params.gates is required without a unit preset")
        gates = unit_gate_directions(shape)
    if "lengths_ns" not in params:
        raise ScenarioError("unit_isolated: missing params.lengths_ns")
    lengths = _axis_values(params["lengths_ns"], "lengths_ns")
    config = _tuneup_config(params)

    def make_cell(gate: Tuple[str, str], t_g: float) -> Callable[[], List[Dict[str, object]]]:
        def cell() -> List[Dict[str, object]]:
            report = characterize_isolated(device, gate, t_g, config=config)
            row: Dict[str, object] = {"control": gate[0], "target": gate[1]}
            row.update(_gate_row(report))
            return [row]
        return cell

    cells = tuple(make_cell(g, t_g) for g in gates for t_g in lengths)
    return RunPlan(("control", "target") + _GATE_FIELDS, cells)


def _prepare_unit_simultaneous(scenario: Scenario) -> RunPlan:
    params = scenario.params
    _check_params(
        params, ("unit", "lattice", "cutoff", "gates", "lengths_ns", "ramp_ns"), scenario.kind
    )
    device = _resolve_device(scenario)
    if "gates" in params:
        pairs = _parse_gates(params["gates"], "gates")
    else:
        shape = _unit_shape(scenario)
        if shape is None:
            raise ScenarioError(
                "unit_simultaneous: params.gates is required without a unit preset"
            )
        pairs = unit_simultaneous_pairs(shape)
        if not pairs:
            raise ScenarioError(f"unit {shape!r} has no disjoint simultaneous gate pair")
    if len(pairs) != 2:
        raise ScenarioError(f"unit_simultaneous: expected exactly 2 gates, got {len(pairs)}")
    if "lengths_ns" not in params:
        raise ScenarioError("unit_simultaneous: missing params.lengths_ns")
    lengths = _axis_values(params["lengths_ns"], "lengths_ns")
    config = _tuneup_config(params)

    def make_cell(t_g: float) -> Callable[[], List[Dict[str, object]]]:
        def cell() -> List[Dict[str, object]]:
            report = characterize_simultaneous(device, pairs, t_g, config=config)
            return [{
                "control_1": pairs[0][0],
                "target_1": pairs[0][1],
                "control_2": pairs[1][0],
                "target_2": pairs[1][1],
                "t_g_ns": report.t_g_ns,
                "error_1": report.isolated[0].error,
                "error_2": report.isolated[1].error,
                "joint_error": report.joint_error,
                "added_error": report.added_error,
            }]
        return cell

    cells = tuple(make_cell(t_g) for t_g in lengths)
    return RunPlan(
        ("control_1", "target_1", "control_2", "target_2", "t_g_ns",
         "error_1", "error_2", "joint_error", "added_error"),
        cells,
    )


def _prepare_disorder_ensemble(scenario: Scenario) -> RunPlan:
    params = scenario.params
    _check_params(
        params,
        ("unit", "lattice", "cutoff", "sigma_MHz", "repetitions", "resonator_sigma_MHz",
         "pairs", "gate", "t_g_ns", "rwa"),
        scenario.kind,
    )
    device = _resolve_device(scenario)
    if scenario.seed is None:
        raise ScenarioError("disorder_ensemble: a seed is required (file key or --seed)")
    spec = DisorderSpec(
        seed=scenario.seed,
        sigma_MHz=_as_number(params.get("sigma_MHz", 15.0), "sigma_MHz"),
        repetitions=_as_int(params.get("repetitions", 100), "repetitions"),
        resonator_sigma_MHz=_as_number(
            params.get("resonator_sigma_MHz", 0.0), "resonator_sigma_MHz"
        ),
    )
    pairs_node = params.get("pairs", "all")
    transmons = tuple(t.label for t in device.transmons)
    if pairs_node == "all":
        pairs: Optional[Tuple[Tuple[str, str], ...]] = None
        pair_list = tuple(combinations(transmons, 2))
    elif pairs_node == "coupled":
        pair_list = device.qubit_pairs()
        pairs = pair_list
    elif isinstance(pairs_node, list):
        parsed_pairs: List[Tuple[str, str]] = []
        for i, p in enumerate(pairs_node):
            if not isinstance(p, list) or len(p) != 2:
                raise ScenarioError(f"pairs[{i}]: expected a [a, b] pair of labels")
            parsed_pairs.append((_as_str(p[0], f"pairs[{i}][0]"), _as_str(p[1], f"pairs[{i}][1]")))
        pairs = tuple(parsed_pairs)
        pair_list = pairs
    else:
        raise ScenarioError("pairs: expected 'all', 'coupled', or an array of [a, b] pairs")
    gate: Optional[Tuple[str, str]] = None
    t_g: Optional[float] = None
    if "gate" in params or "t_g_ns" in params:
        if "gate" not in params or "t_g_ns" not in params:
            raise ScenarioError("disorder_ensemble: gate and t_g_ns must be given together")
        gate = _parse_gate(params["gate"], "gate")
        t_g = _as_number(params["t_g_ns"], "t_g_ns")
    rwa = _as_bool(params.get("rwa", True), "rwa")
    jobs = scenario.jobs

    fieldnames = (
        ("draw_index",)
        + tuple(f"{q}_GHz" for q in transmons)
        + tuple(f"zz_{a}_{b}_kHz" for a, b in pair_list)
        + ("gate", "t_g_ns", "error", "leakage")
    )

    def cell() -> List[Dict[str, object]]:
        result = run_disorder_ensemble(
            device, spec, pairs=pairs, gate=gate, t_g_ns=t_g, rwa=rwa, jobs=jobs
        )
        return result.rows()

    return RunPlan(fieldnames, (cell,))


def _prepare_stark_mitigation(scenario: Scenario) -> RunPlan:
    params = scenario.params
    _check_params(
        params,
        ("unit", "lattice", "cutoff", "target", "frequency_GHz", "amplitudes_MHz",
         "always_on", "gate", "t_g_ns", "rwa", "ramp_ns"),
        scenario.kind,
    )
    device = _resolve_device(scenario)
    for key in ("target", "frequency_GHz", "amplitudes_MHz", "gate", "t_g_ns"):
        if key not in params:
            raise ScenarioError(f"stark_mitigation: missing params.{key}")
    try:
        mitigation = StarkMitigation(
            target=_as_str(params["target"], "target"),
            frequency_GHz=_as_number(params["frequency_GHz"], "frequency_GHz"),
            amplitudes_MHz=tuple(_axis_values(params["amplitudes_MHz"], "amplitudes_MHz")),
            always_on=_as_bool(params.get("always_on", True), "always_on"),
        )
    except ValueError as exc:
        raise ScenarioError(f"stark_mitigation: {exc}") from exc
    gate = _parse_gate(params["gate"], "gate")
    t_g = _as_number(params["t_g_ns"], "t_g_ns")
    if t_g <= 0:
        raise ScenarioError(f"t_g_ns: must be positive, got {t_g}")
    rwa = _as_bool(params.get("rwa", True), "rwa")
    config = _tuneup_config(params)
    try:
        _validate_mitigation_device(device, mitigation)
        if mitigation.target in gate:
            raise ValueError(
                "Stark tone must target a spectator qubit; the gate qubits "
                "already carry the CR tones"
            )
    except (ValueError, KeyError) as exc:
        raise ScenarioError(f"stark_mitigation: {exc}") from exc

    def cell() -> List[Dict[str, object]]:
        sweep = run_stark_mitigation(device, mitigation, gate, t_g, config=config, rwa=rwa)
        return sweep.rows()

    return RunPlan(
        ("amplitude_MHz", "shift_MHz", "error", "leakage", "omega1_MHz", "omega2_MHz",
         "converged"),
        (cell,),
    )


def _audit_inputs(
    scenario: Scenario, device: Device
) -> Tuple[Tuple[Tuple[str, str], ...], Tuple[str, ...]]:
    params = scenario.params
    if "gates" in params:
        gates = _parse_gates(params["gates"], "gates")
        spectators: Tuple[str, ...] = ()
        if "spectator_controls" in params:
            node = params["spectator_controls"]
            if not isinstance(node, list):
                raise ScenarioError("spectator_controls: expected an array of labels")
            spectators = tuple(
                _as_str(s, f"spectator_controls[{i}]") for i, s in enumerate(node)
            )
        return gates, spectators
    shape = _unit_shape(scenario)
    if shape is not None:
        gates = unit_gate_directions(shape)
        spectators = unit_spectator_controls(shape)
        return _augment_spectator_gates(device, gates, spectators), spectators
    if "lattice" in params:
        return lattice_gate_directions(device), lattice_spectator_controls(device)
    raise ScenarioError("collision_audit: params.gates is required for an explicit device")


def _augment_spectator_gates(
    device: Device,
    gates: Tuple[Tuple[str, str], ...],
    spectators: Tuple[str, ...],
) -> Tuple[Tuple[str, str], ...]:
    """Direct spectator-control couplings onto target-band neighbors.

    A unit is a fragment of the full lattice, where every control gates
    each coupled target-band neighbor. A spectator control therefore
    drives its in-unit target even though that gate is not part of the
    unit's own gate set, and the audit needs the direction to cover the
    pair.
    """
    control_band = {c for c, _ in gates} | set(spectators)
    directed = {frozenset(g) for g in gates}
    extra: List[Tuple[str, str]] = []
    for a, b in device.qubit_pairs():
        if frozenset((a, b)) in directed:
            continue
        if a in spectators and b not in control_band:
            extra.append((a, b))
        elif b in spectators and a not in control_band:
            extra.append((b, a))
    return gates + tuple(extra)


def _audit_bounds(params: Dict[str, object]) -> Optional[BoundsConfig]:
    if "target_error" in params and "bounds" in params:
        raise ScenarioError("collision_audit: give target_error or bounds, not both")
    try:
        if "target_error" in params:
            return BoundsConfig.for_target_error(_as_number(params["target_error"], "target_error"))
        if "bounds" in params:
            node = params["bounds"]
            if not isinstance(node, dict):
                raise ScenarioError("bounds: expected a table")
            extra = set(node) - {"near_MHz", "next_nearest_MHz"}
            if extra:
                raise ScenarioError(f"bounds: unknown keys {sorted(extra)}")
            return BoundsConfig(
                near_MHz=_as_number(node.get("near_MHz", 10.0), "bounds.near_MHz"),
                next_nearest_MHz=_as_number(
                    node.get("next_nearest_MHz", 0.5), "bounds.next_nearest_MHz"
                ),
            )
    except ValueError as exc:
        raise ScenarioError(f"collision_audit: {exc}") from exc
    return None


_AUDIT_FIELDS = (
    "kind", "participants", "lhs_GHz", "rhs_GHz", "margin_MHz", "bound_MHz",
    "violated", "drive_MHz", "stark_reachable",
)


def _audit_rows(report: CollisionReport) -> List[Dict[str, object]]:
    return [
        {
            "kind": c.kind,
            "participants": ";".join(c.participants),
            "lhs_GHz": c.lhs_GHz,
            "rhs_GHz": c.rhs_GHz,
            "margin_MHz": c.margin_MHz,
            "bound_MHz": c.bound_MHz,
            "violated": c.violated,
            "drive_MHz": c.drive_MHz,
            "stark_reachable": c.stark_reachable,
        }
        for c in report.conditions
    ]


def _prepare_collision_audit(scenario: Scenario) -> RunPlan:
    params = scenario.params
    _check_params(
        params,
        ("unit", "lattice", "cutoff", "gates", "spectator_controls", "target_error",
         "bounds", "stark_probe_MHz", "stark_drive_MHz"),
        scenario.kind,
    )
    device = _resolve_device(scenario)
    gates, spectators = _audit_inputs(scenario, device)
    bounds = _audit_bounds(params)
    probe = _as_number(params.get("stark_probe_MHz", 50.0), "stark_probe_MHz")
    drive = _as_number(params.get("stark_drive_MHz", 0.0), "stark_drive_MHz")

    def cell() -> List[Dict[str, object]]:
        try:
            report = audit(
                device, gates, bounds=bounds, spectator_controls=spectators,
                stark_probe_MHz=probe, stark_drive_MHz=drive,
            )
        except ValueError as exc:
            # coverage problems are configuration mistakes, not numerics
            raise ScenarioError(f"collision_audit: {exc}") from exc
        return _audit_rows(report)

    return RunPlan(_AUDIT_FIELDS, (cell,))


def _prepare_perturbation_table(scenario: Scenario) -> RunPlan:
    params = scenario.params
    _check_params(
        params,
        ("couplers", "control_GHz", "target_GHz", "rwa", "scale_with_frequency"),
        scenario.kind,
    )
    node = params.get("couplers", list(PAIR_COUPLERS))
    if not isinstance(node, list) or not node:
        raise ScenarioError("couplers: expected a non-empty array of coupler names")
    couplers = [_as_str(c, f"couplers[{i}]") for i, c in enumerate(node)]
    for c in couplers:
        if c not in PAIR_COUPLERS:
            raise ScenarioError(f"unknown coupler {c!r}; expected one of {PAIR_COUPLERS}")
    control = _as_number(params.get("control_GHz", 5.15), "control_GHz")
    target = _as_number(params.get("target_GHz", 5.05), "target_GHz")
    # design-point numbers are quoted at the bare couplings, so scaling is off by default
    scale = _as_bool(params.get("scale_with_frequency", False), "scale_with_frequency")
    rwa_override = (
        _as_bool(params["rwa"], "rwa") if "rwa" in params else None
    )

    def make_cell(coupler: str) -> Callable[[], List[Dict[str, object]]]:
        def cell() -> List[Dict[str, object]]:
            rwa = TABLE_RWA[coupler] if rwa_override is None else rwa_override
            device = pair_preset(
                coupler, control_GHz=control, target_GHz=target, scale_with_frequency=scale
            )
            zz = zz_numeric(device, ("Q1", "Q2"), rwa=rwa)
            try:
                jxy = xy_numeric(device, ("Q1", "Q2"), rwa=rwa)
            except ValueError:
                jxy = float("nan")
            try:
                zz_est, jxy_est = _pair_perturbative(device)
            except PoleError:
                zz_est, jxy_est = float("nan"), float("nan")
            return [{
                "coupler": coupler,
                "rwa": rwa,
                "jxy_numeric_MHz": jxy,
                "jxy_perturbative_MHz": jxy_est,
                "zz_numeric_kHz": zz,
                "zz_perturbative_kHz": zz_est,
            }]
        return cell

    cells = tuple(make_cell(c) for c in couplers)
    return RunPlan(
        ("coupler", "rwa", "jxy_numeric_MHz", "jxy_perturbative_MHz",
         "zz_numeric_kHz", "zz_perturbative_kHz"),
        cells,
    )


_PREPARERS: Dict[str, Callable[[Scenario], RunPlan]] = {
    "coupling_landscape": _prepare_coupling_landscape,
    "coupling_cut": _prepare_coupling_cut,
    "gate_vs_length": _prepare_gate_vs_length,
    "dressed_scan": _prepare_dressed_scan,
    "unit_isolated": _prepare_unit_isolated,
    "unit_simultaneous": _prepare_unit_simultaneous,
    "disorder_ensemble": _prepare_disorder_ensemble,
    "stark_mitigation": _prepare_stark_mitigation,
    "collision_audit": _prepare_collision_audit,
    "perturbation_table": _prepare_perturbation_table,
}


def _execute_cells(
    cells: Sequence[Callable[[], List[Dict[str, object]]]], jobs: int
) -> Tuple[List[Dict[str, object]], List[Dict[str, object]]]:
    """Run cells, possibly in threads; rows keep cell order regardless of jobs."""
    results: List[Optional[List[Dict[str, object]]]] = [None] * len(cells)
    failures: List[Dict[str, object]] = []

    def record_failure(index: int, exc: Exception) -> None:
        failures.append({"cell": index, "error": f"{type(exc).__name__}: {exc}"})

    workers = min(jobs, len(cells))
    if workers <= 1:
        for i, cell in enumerate(cells):
            try:
                results[i] = cell()
            except ScenarioError:
                raise
            except Exception as exc:
                record_failure(i, exc)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            futures = {pool.submit(cells[i]): i for i in range(len(cells))}
            scenario_error: Optional[ScenarioError] = None
            for future in as_completed(futures):
                i = futures[future]
                try:
                    results[i] = future.result()
                except ScenarioError as exc:
                    scenario_error = exc
                except Exception as exc:
                    record_failure(i, exc)
            if scenario_error is not None:
                raise scenario_error
    failures.sort(key=lambda f: f["cell"])
    rows = [row for cell_rows in results if cell_rows is not None for row in cell_rows]
    return rows, failures


def _write_csv(
    path: Path, fieldnames: Sequence[str], rows: Sequence[Dict[str, object]], hash_tag: str
) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as handle:
        handle.write(f"# manifest {hash_tag}\n")
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(fieldnames)
        for row in rows:
            writer.writerow([_format_value(row.get(name)) for name in fieldnames])


def _manifest_path(output: Path) -> Path:
    return output.with_name(output.name + ".manifest.json")


def _write_manifest(
    scenario: Scenario,
    hash_tag: str,
    cells_total: int,
    failures: Sequence[Dict[str, object]],
    wall_time_s: float,
) -> None:
    manifest = {
        "config_hash": hash_tag,
        "kind": scenario.kind,
        "seed": scenario.seed,
        "versions": {
            "crossres": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "cells_total": cells_total,
        "cells_completed": cells_total - len(failures),
        "failures": list(failures),
        "output": scenario.output.name,
        "wall_time_s": round(wall_time_s, 3),
    }
    path = _manifest_path(scenario.output)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n")


def run_scenario(
    path: Path,
    jobs: Optional[int] = None,
    seed: Optional[int] = None,
    dry_run: bool = False,
) -> int:
    """Execute one scenario file; returns the process exit code.

    Raises ScenarioError for configuration problems (exit 2 at the CLI).
    ``dry_run`` validates the file and prints the plan without computing
    or writing anything.
    """
    scenario = load_scenario(Path(path), jobs=jobs, seed=seed)
    plan = _PREPARERS[scenario.kind](scenario)
    hash_tag = _config_hash(scenario.doc, scenario.seed)

    if dry_run:
        print(f"{scenario.kind}: {len(plan.cells)} cells -> {scenario.output}")
        print(f"columns: {', '.join(plan.fieldnames)}")
        print(f"config hash: {hash_tag}")
        return EXIT_OK

    start = time.perf_counter()
    rows, failures = _execute_cells(plan.cells, scenario.jobs)
    elapsed = time.perf_counter() - start
    _write_manifest(scenario, hash_tag, len(plan.cells), failures, elapsed)

    if failures and not rows:
        print(
            f"error: all {len(plan.cells)} cells failed; first: {failures[0]['error']}",
            file=sys.stderr,
        )
        return EXIT_NUMERIC
    _write_csv(scenario.output, plan.fieldnames, rows, hash_tag)
    if failures:
        print(
            f"warning: {len(failures)} of {len(plan.cells)} cells failed; "
            f"first: {failures[0]['error']}",
            file=sys.stderr,
        )
        return EXIT_PARTIAL
    print(f"wrote {scenario.output} ({len(rows)} rows, {len(plan.cells)} cells)")
    return EXIT_OK


def _cmd_run(args: argparse.Namespace) -> int:
    return run_scenario(
        Path(args.scenario), jobs=args.jobs, seed=args.seed, dry_run=args.dry_run
    )


def _cmd_audit(args: argparse.Namespace) -> int:
    device_path = Path(args.device)
    try:
        text = device_path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read device {device_path}: {exc}") from exc
    try:
        device = Device.from_json(text)
    except (ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        raise ScenarioError(f"invalid device JSON {device_path}: {exc}") from exc

    if args.gates:
        gates = tuple(
            _parse_gate(g.strip(), "--gates") for g in args.gates.split(",") if g.strip()
        )
        spectators: Tuple[str, ...] = tuple(
            s.strip() for s in (args.spectators or "").split(",") if s.strip()
        )
    else:
        try:
            gates = lattice_gate_directions(device)
            spectators = lattice_spectator_controls(device)
        except ValueError:
            raise ScenarioError(
                "device has no lattice role labels; pass --gates 'CONTROL>TARGET,...'"
            ) from None

    bounds = None
    if args.target_error is not None:
        try:
            bounds = BoundsConfig.for_target_error(args.target_error)
        except ValueError as exc:
            raise ScenarioError(str(exc)) from exc
    try:
        report = audit(
            device, gates, bounds=bounds, spectator_controls=spectators,
            stark_probe_MHz=args.stark_probe, stark_drive_MHz=args.stark_drive,
        )
    except ValueError as exc:
        raise ScenarioError(str(exc)) from exc

    rows = _audit_rows(report)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        with open(out, "w", newline="") as handle:
            writer = csv.writer(handle, lineterminator="\n")
            writer.writerow(_AUDIT_FIELDS)
            for row in rows:
                writer.writerow([_format_value(row[name]) for name in _AUDIT_FIELDS])
    else:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(_AUDIT_FIELDS)
        for row in rows:
            writer.writerow([_format_value(row[name]) for name in _AUDIT_FIELDS])
    print(
        f"{len(report)} conditions, {len(report.violations())} violated",
        file=sys.stderr,
    )
    return EXIT_OK


def _cmd_presets(args: argparse.Namespace) -> int:
    print("pair couplers (modes Q1, R, Q2 or Q1, Q2):")
    for name in PAIR_COUPLERS:
        device = pair_preset(name, scale_with_frequency=False)
        strengths = {frozenset(c.endpoints): c.strength for c in device.couplings}
        parts = []
        g12 = strengths.get(frozenset(("Q1", "Q2")))
        if g12 is not None:
            parts.append(f"direct {g12:g} MHz")
        if any("R" in fs for fs in strengths):
            resonator = next(m for m in device.modes if m.label == "R")
            g_rq = strengths[frozenset(("Q1", "R"))]
            parts.append(f"resonator at {resonator.frequency:g} GHz, g_rq {g_rq:g} MHz")
        print(f"  {name:<12} {'; '.join(parts)}")
    print("unit shapes (chain Q0-R0-Q1-R1-Q2-R2-Q3):")
    for shape in UNIT_SHAPES:
        gates = ", ".join(f"{c}>{t}" for c, t in unit_gate_directions(shape))
        extras = []
        simultaneous = unit_simultaneous_pairs(shape)
        if simultaneous:
            extras.append(
                "simultaneous " + " + ".join(f"{c}>{t}" for c, t in simultaneous)
            )
        spectators = unit_spectator_controls(shape)
        if spectators:
            extras.append("spectator controls " + ", ".join(spectators))
        tail = f" ({'; '.join(extras)})" if extras else ""
        print(f"  {shape:<6} gates {gates}{tail}")
    print("lattices:")
    print("  heavy_hex(rows, cols)  brick-wall lattice of the three-band allocation")
    return EXIT_OK


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="crossres",
        description="Simulate and audit fixed-frequency transmon CR architectures.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="execute a TOML scenario file")
    run_p.add_argument("scenario", help="path to the scenario TOML")
    run_p.add_argument("--jobs", type=int, default=None, help="worker threads (default 1)")
    run_p.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run_p.add_argument(
        "--dry-run", action="store_true", help="validate and print the plan, write nothing"
    )

    audit_p = sub.add_parser("audit", help="frequency-collision audit of a device JSON")
    audit_p.add_argument("device", help="path to a device JSON file")
    audit_p.add_argument(
        "--gates", default=None,
        help="comma-separated CONTROL>TARGET list (default: derive from lattice labels)",
    )
    audit_p.add_argument(
        "--spectators", default=None,
        help="comma-separated control-band qubits whose targets lie outside the device",
    )
    audit_p.add_argument(
        "--target-error", type=float, default=None, dest="target_error",
        help="gate-error target selecting the default bounds (0.01 or 0.001)",
    )
    audit_p.add_argument(
        "--stark-probe", type=float, default=50.0, dest="stark_probe",
        help="drive amplitude of the reachability screen in MHz (0 disables)",
    )
    audit_p.add_argument(
        "--stark-drive", type=float, default=0.0, dest="stark_drive",
        help="re-evaluate gate conditions at this drive amplitude in MHz",
    )
    audit_p.add_argument("--out", default=None, help="write CSV here instead of stdout")

    presets_p = sub.add_parser("presets", help="inspect built-in devices")
    presets_p.add_argument("action", choices=("list",))
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "audit":
            return _cmd_audit(args)
        return _cmd_presets(args)
    except ScenarioError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
