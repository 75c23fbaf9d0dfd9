"""Heavy-hexagon lattices, disorder ensembles, and Stark-shift mitigation.

The lattice builder lays out a brick-wall honeycomb whose vertices and edge
midpoints all carry transmons, with one lightweight resonator coupler per
graph edge. Labels encode the frequency-pattern role: ``C{r}x{x}`` for the
vertex controls on horizontal line ``r``, ``T{r}x{x}`` for the targets
between columns ``x`` and ``x+1`` of line ``r``, and ``B{r}x{x}`` for the
bridge qubits on the vertical rungs between lines ``r`` and ``r+1``.
Bridges share the control band, so bridge edges carry no gate and are
audited as spectator-control pairs.

Disorder ensembles draw Gaussian qubit-frequency perturbations from
per-draw substreams of a master seed, so ensembles are bit-identical
across runs and draws are safe to compute in parallel. Stark-mitigation
sweeps tune and score a CX in the presence of an always-on off-resonant
tone and report the induced frequency shift measured from the statically
driven spectrum, not from the second-order estimate.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .device import (
    DEFAULT_ANHARMONICITY_GHZ,
    DEFAULT_LEVELS,
    CouplingSpec,
    Device,
    ModeSpec,
    ResonatorSpec,
    TransmonSpec,
    _scaled_coupling,
)
from .gates import GateReport, TuneUpConfig, characterize_isolated
from .operators import SpaceMap
from .pulses import DriveSpec, PulseEnvelope
from .statics import dressed_scan, eigensolve_labeled, static_hamiltonian, zz_numeric

LATTICE_COUPLING_MHZ = 25.0
LATTICE_RESONATOR_OFFSET_GHZ = 0.25
DEFAULT_PATTERN_GHZ = (5.25, 5.15, 5.05)
STARK_MIN_DETUNING_MHZ = 10.0
SHIFT_SCAN_STEP_MHZ = 2.0


def heavy_hex(
    rows: int,
    cols: int,
    pattern: Tuple[float, float, float] = DEFAULT_PATTERN_GHZ,
    anharmonicity_GHz: float = DEFAULT_ANHARMONICITY_GHZ,
    levels: int = DEFAULT_LEVELS,
    excitation_cutoff: Optional[int] = None,
    coupling_MHz: float = LATTICE_COUPLING_MHZ,
    resonator_offset_GHz: float = LATTICE_RESONATOR_OFFSET_GHZ,
    scale_with_frequency: bool = True,
) -> Device:
    """Heavy-hexagon device with the three-frequency pattern applied.

    The brick-wall frame has ``rows + 1`` horizontal lines of ``2*cols + 1``
    vertices each, with vertical rungs between lines ``r`` and ``r + 1`` at
    every second column starting from ``r % 2``. Vertices and rungs carry
    control-band qubits at ``pattern[1]``; the qubits on horizontal edges
    alternate between ``pattern[0]`` and ``pattern[2]`` so each control sees
    at most one target of each frequency. Every edge of the resulting graph
    is mediated by one lightweight resonator at ``max(endpoints) +
    resonator_offset_GHz``.

    Parameters
    ----------
    rows, cols : int
        Cell counts of the brick-wall frame; both at least 1 and not both 1
        (a single hexagon has no degree-3 vertex, so no mode is a control).
    pattern : (float, float, float)
        Strictly decreasing frequencies (w_i, w_j, w_k) in GHz: high target,
        control, low target.

    Returns
    -------
    Device
        Modes ordered line by line (controls and targets interleaved, then
        that line's bridges), resonators appended in edge order.
    """
    if rows < 1 or cols < 1:
        raise ValueError("rows and cols must be at least 1")
    if rows == 1 and cols == 1:
        raise ValueError(
            "a 1x1 lattice is a single hexagon with no degree-3 vertex, "
            "so the pattern assigns no controls; use at least two cells"
        )
    if len(pattern) != 3:
        raise ValueError("pattern needs exactly three frequencies (w_i, w_j, w_k)")
    w_i, w_j, w_k = (float(f) for f in pattern)
    if not all(math.isfinite(f) and f > 0 for f in (w_i, w_j, w_k)):
        raise ValueError("pattern frequencies must be positive and finite")
    if not w_i > w_j > w_k:
        raise ValueError("pattern must be strictly decreasing: w_i > w_j > w_k")
    if coupling_MHz <= 0:
        raise ValueError("coupling_MHz must be positive")
    if resonator_offset_GHz <= 0:
        raise ValueError("resonator_offset_GHz must be positive")

    lines = rows + 1
    width = 2 * cols + 1

    qubits: List[TransmonSpec] = []
    edges: List[Tuple[str, str]] = []
    for r in range(lines):
        for x in range(width):
            qubits.append(TransmonSpec(f"C{r}x{x}", w_j, anharmonicity_GHz, levels))
            if x < width - 1:
                w_t = w_i if x % 2 == 0 else w_k
                qubits.append(TransmonSpec(f"T{r}x{x}", w_t, anharmonicity_GHz, levels))
                edges.append((f"C{r}x{x}", f"T{r}x{x}"))
                edges.append((f"T{r}x{x}", f"C{r}x{x + 1}"))
    for r in range(rows):
        for x in range(r % 2, width, 2):
            qubits.append(TransmonSpec(f"B{r}x{x}", w_j, anharmonicity_GHz, levels))
            edges.append((f"C{r}x{x}", f"B{r}x{x}"))
            edges.append((f"B{r}x{x}", f"C{r + 1}x{x}"))

    freq = {q.label: q.frequency for q in qubits}
    modes: List[ModeSpec] = list(qubits)
    couplings: List[CouplingSpec] = []
    for k, (a, b) in enumerate(edges):
        w_r = max(freq[a], freq[b]) + resonator_offset_GHz
        label = f"R{k}"
        modes.append(ResonatorSpec(label, w_r, levels))
        couplings.append(
            CouplingSpec((a, label), _scaled_coupling(coupling_MHz, freq[a], w_r, scale_with_frequency))
        )
        couplings.append(
            CouplingSpec((label, b), _scaled_coupling(coupling_MHz, freq[b], w_r, scale_with_frequency))
        )
    return Device(tuple(modes), tuple(couplings), excitation_cutoff)


def lattice_gate_directions(device: Device) -> Tuple[Tuple[str, str], ...]:
    """CR gate directions of a heavy_hex device, one per control-target edge.

    Every vertex control drives each of its horizontal targets, so interior
    targets are gated from both sides, exactly as in the four-qubit unit
    presets. Bridge edges carry no gate. Pairs are returned in the device's
    qubit-pair order, oriented control first.
    """
    directions: List[Tuple[str, str]] = []
    for a, b in device.qubit_pairs():
        if a.startswith("C") and b.startswith("T"):
            directions.append((a, b))
        elif a.startswith("T") and b.startswith("C"):
            directions.append((b, a))
    if not directions:
        raise ValueError("device has no C*/T* role labels; expected a heavy_hex device")
    return tuple(directions)


def lattice_spectator_controls(device: Device) -> Tuple[str, ...]:
    """Bridge qubits of a heavy_hex device, in mode order.

    Bridges sit in the control band but gate nothing inside the lattice, so
    collision audits need them declared as spectator controls.
    """
    bridges = tuple(t.label for t in device.transmons if t.label.startswith("B"))
    if not any(t.label.startswith("C") for t in device.transmons):
        raise ValueError("device has no C* role labels; expected a heavy_hex device")
    return bridges


@dataclass(frozen=True)
class DisorderSpec:
    """Gaussian frequency-disorder ensemble settings.

    ``sigma_MHz`` perturbs qubit frequencies only; resonators follow the
    design values unless ``resonator_sigma_MHz`` is set, reflecting the much
    tighter fabrication spread of resonators. ``seed`` fixes the ensemble
    bit-exactly.
    """

    seed: int
    sigma_MHz: float = 15.0
    repetitions: int = 100
    resonator_sigma_MHz: float = 0.0

    def __post_init__(self) -> None:
        if not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ValueError("seed must be an integer in [0, 2**64)")
        if not math.isfinite(self.sigma_MHz) or self.sigma_MHz < 0:
            raise ValueError("sigma_MHz must be non-negative and finite")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if not math.isfinite(self.resonator_sigma_MHz) or self.resonator_sigma_MHz < 0:
            raise ValueError("resonator_sigma_MHz must be non-negative and finite")


def sample_disorder(device: Device, spec: DisorderSpec) -> List[Device]:
    """Ensemble of devices with Gaussian-perturbed qubit frequencies.

    Each draw gets its own RNG stream spawned from the master seed, so the
    ensemble is reproducible bit-exactly and draws may be evaluated in
    parallel without shared state. Qubit perturbations are drawn before
    resonator ones, so enabling the resonator knob leaves the qubit draws
    unchanged.
    """
    children = np.random.SeedSequence(spec.seed).spawn(spec.repetitions)
    draws: List[Device] = []
    for child in children:
        rng = np.random.default_rng(child)
        updates: Dict[str, float] = {}
        for t in device.transmons:
            updates[t.label] = t.frequency + rng.normal(0.0, spec.sigma_MHz) * 1e-3
        if spec.resonator_sigma_MHz > 0:
            for r in device.resonators:
                updates[r.label] = r.frequency + rng.normal(0.0, spec.resonator_sigma_MHz) * 1e-3
        draws.append(device.with_frequencies(updates))
    return draws


@dataclass(frozen=True)
class EnsembleDraw:
    """Per-draw record: qubit frequencies, pairwise ZZ, optional gate score."""

    draw_index: int
    frequencies_GHz: Tuple[float, ...]
    zz_kHz: Tuple[float, ...]
    error: Optional[float] = None
    leakage: Optional[float] = None


@dataclass(frozen=True)
class EnsembleResult:
    """Disorder-ensemble summary aligned with the CSV schema.

    ``qubits`` orders ``frequencies_GHz`` and ``pairs`` orders ``zz_kHz``
    in every draw.
    """

    qubits: Tuple[str, ...]
    pairs: Tuple[Tuple[str, str], ...]
    gate: Optional[Tuple[str, str]]
    t_g_ns: Optional[float]
    draws: Tuple[EnsembleDraw, ...]

    def zz_table_kHz(self) -> np.ndarray:
        """ZZ strengths as a (draws, pairs) array in kHz."""
        return np.array([d.zz_kHz for d in self.draws], dtype=float)

    def max_abs_zz_kHz(self) -> float:
        return float(np.max(np.abs(self.zz_table_kHz())))

    def median_abs_zz_kHz(self) -> float:
        return float(np.median(np.abs(self.zz_table_kHz())))

    def rows(self) -> List[Dict[str, object]]:
        """CSV-ready records: draw index, frequencies, ZZ, gate score."""
        out: List[Dict[str, object]] = []
        gate = f"{self.gate[0]}>{self.gate[1]}" if self.gate is not None else ""
        for d in self.draws:
            row: Dict[str, object] = {"draw_index": d.draw_index}
            for label, f in zip(self.qubits, d.frequencies_GHz):
                row[f"{label}_GHz"] = f
            for (a, b), zz in zip(self.pairs, d.zz_kHz):
                row[f"zz_{a}_{b}_kHz"] = zz
            row["gate"] = gate
            row["t_g_ns"] = self.t_g_ns
            row["error"] = d.error
            row["leakage"] = d.leakage
            out.append(row)
        return out


def _all_transmon_pairs(device: Device) -> Tuple[Tuple[str, str], ...]:
    return tuple(combinations((t.label for t in device.transmons), 2))


def run_disorder_ensemble(
    device: Device,
    spec: DisorderSpec,
    pairs: Optional[Sequence[Tuple[str, str]]] = None,
    gate: Optional[Tuple[str, str]] = None,
    t_g_ns: Optional[float] = None,
    rwa: bool = True,
    config: Optional[TuneUpConfig] = None,
    jobs: int = 1,
) -> EnsembleResult:
    """Pairwise ZZ (and optionally a tuned CX score) over a disorder ensemble.

    Each draw is diagonalized once and every requested pair's ZZ is read
    from that spectrum. ``pairs`` defaults to all transmon pairs, coupled or
    not, so next-nearest near-resonances show up. When ``gate`` and
    ``t_g_ns`` are given the CX is tuned up freshly on every draw and its
    error and leakage are recorded. ``jobs`` spreads draws over threads;
    results are identical for any value because the draws are sampled up
    front and evaluated independently.
    """
    if (gate is None) != (t_g_ns is None):
        raise ValueError("gate and t_g_ns must be given together")
    if jobs < 1:
        raise ValueError(f"jobs must be >= 1, got {jobs}")
    pair_list = _all_transmon_pairs(device) if pairs is None else tuple(
        (str(a), str(b)) for a, b in pairs
    )
    transmon_labels = {t.label for t in device.transmons}
    for a, b in pair_list:
        if a not in transmon_labels or b not in transmon_labels:
            raise ValueError(f"pair ({a}, {b}) is not a transmon pair")
    qubits = tuple(t.label for t in device.transmons)

    draws = sample_disorder(device, spec)

    def evaluate(index: int) -> EnsembleDraw:
        draw = draws[index]
        space = SpaceMap.from_device(draw)
        spectrum = eigensolve_labeled(static_hamiltonian(draw, space, rwa=rwa), space)
        zz = tuple(zz_numeric(draw, p, rwa=rwa, spectrum=spectrum) for p in pair_list)
        error: Optional[float] = None
        leakage: Optional[float] = None
        if gate is not None:
            report = characterize_isolated(draw, gate, float(t_g_ns), config=config)
            error = report.error
            leakage = report.leakage
        return EnsembleDraw(
            draw_index=index,
            frequencies_GHz=tuple(t.frequency for t in draw.transmons),
            zz_kHz=zz,
            error=error,
            leakage=leakage,
        )

    if jobs == 1:
        records = [evaluate(i) for i in range(len(draws))]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(evaluate, range(len(draws))))
    return EnsembleResult(
        qubits=qubits,
        pairs=pair_list,
        gate=tuple(gate) if gate is not None else None,
        t_g_ns=float(t_g_ns) if t_g_ns is not None else None,
        draws=tuple(records),
    )


def cutoff_convergence_kHz(
    device: Device,
    pairs: Optional[Sequence[Tuple[str, str]]] = None,
    cutoffs: Tuple[int, int] = (5, 6),
    rwa: bool = True,
) -> float:
    """Largest pairwise ZZ change between two excitation cutoffs, in kHz.

    Used to validate an ensemble's cutoff once per device shape before
    committing to the cheaper truncation.
    """
    lo, hi = cutoffs
    pair_list = _all_transmon_pairs(device) if pairs is None else tuple(pairs)
    tables: List[np.ndarray] = []
    for cutoff in (lo, hi):
        trimmed = device.with_excitation_cutoff(cutoff)
        space = SpaceMap.from_device(trimmed)
        spectrum = eigensolve_labeled(static_hamiltonian(trimmed, space, rwa=rwa), space)
        tables.append(
            np.array([zz_numeric(trimmed, p, rwa=rwa, spectrum=spectrum) for p in pair_list])
        )
    return float(np.max(np.abs(tables[1] - tables[0])))


@dataclass(frozen=True)
class StarkMitigation:
    """Always-on off-resonant tone used to push a qubit off a collision.

    The drive must stay more than ``STARK_MIN_DETUNING_MHZ`` away from
    every mode frequency of the device it is applied to; that is checked
    against the device in run_stark_mitigation.
    """

    target: str
    frequency_GHz: float
    amplitudes_MHz: Tuple[float, ...]
    always_on: bool = True

    def __post_init__(self) -> None:
        if not self.target:
            raise ValueError("target mode label must be non-empty")
        if not math.isfinite(self.frequency_GHz) or self.frequency_GHz <= 0:
            raise ValueError("drive frequency must be positive and finite")
        if len(self.amplitudes_MHz) == 0:
            raise ValueError("amplitude sweep must be non-empty")
        for a in self.amplitudes_MHz:
            if not math.isfinite(a) or a < 0:
                raise ValueError("amplitudes must be non-negative and finite")


@dataclass(frozen=True)
class MitigationPoint:
    """One sweep point: tone amplitude, induced shift, scored gate."""

    amplitude_MHz: float
    shift_MHz: float
    report: GateReport


@dataclass(frozen=True)
class MitigationSweep:
    """Stark-mitigation sweep: gate scores versus tone amplitude."""

    mitigation: StarkMitigation
    gate: Tuple[str, str]
    t_g_ns: float
    points: Tuple[MitigationPoint, ...]

    def point_at(self, amplitude_MHz: float) -> MitigationPoint:
        for p in self.points:
            if p.amplitude_MHz == amplitude_MHz:
                return p
        raise KeyError(f"no sweep point at {amplitude_MHz} MHz")

    def best(self) -> MitigationPoint:
        return min(self.points, key=lambda p: p.report.error)

    def rows(self) -> List[Dict[str, object]]:
        return [
            {
                "amplitude_MHz": p.amplitude_MHz,
                "shift_MHz": p.shift_MHz,
                "error": p.report.error,
                "leakage": p.report.leakage,
                "omega1_MHz": p.report.omega1_MHz,
                "omega2_MHz": p.report.omega2_MHz,
                "converged": p.report.converged,
            }
            for p in self.points
        ]


def _validate_mitigation_device(device: Device, mitigation: StarkMitigation) -> None:
    target_mode = device.mode(mitigation.target)
    if not isinstance(target_mode, TransmonSpec):
        raise ValueError(f"Stark target {mitigation.target!r} is not a transmon")
    for m in device.modes:
        detuning_MHz = abs(mitigation.frequency_GHz - m.frequency) * 1e3
        if detuning_MHz <= STARK_MIN_DETUNING_MHZ:
            raise ValueError(
                f"Stark drive at {mitigation.frequency_GHz} GHz is within "
                f"{STARK_MIN_DETUNING_MHZ} MHz of mode {m.label} "
                f"({m.frequency} GHz)"
            )


def stark_shifts(
    device: Device,
    mitigation: StarkMitigation,
    rwa: bool = True,
) -> Dict[float, float]:
    """Tone-induced shift of the starked qubit's 01 frequency, per amplitude.

    Measured from the statically driven spectrum: the scan starts at zero
    amplitude (bare labeling) and tracks the vacuum and the single-excitation
    level of the target, so the shift is the dressed 01 frequency relative to
    its undriven value, in MHz. Keys are the sweep amplitudes.
    """
    _validate_mitigation_device(device, mitigation)
    amplitudes = sorted(set(float(a) for a in mitigation.amplitudes_MHz))
    peak = max(amplitudes)
    if peak == 0.0:
        return {a: 0.0 for a in amplitudes}
    count = max(9, int(math.ceil(peak / SHIFT_SCAN_STEP_MHZ)) + 1)
    grid = np.unique(
        np.concatenate([np.linspace(0.0, peak, count), np.asarray(amplitudes, dtype=float)])
    )
    index = device.mode_index(mitigation.target)
    occ0 = tuple(0 for _ in device.modes)
    occ1 = tuple(1 if i == index else 0 for i in range(len(device.modes)))
    scan = dressed_scan(
        device,
        mitigation.target,
        grid,
        mitigation.frequency_GHz,
        rwa=rwa,
        targets=(occ0, occ1),
    )
    series = scan.energy_series(occ1) - scan.energy_series(occ0)
    shifts = series - series[0]
    by_amplitude = {float(a): float(s) for a, s in zip(grid, shifts)}
    return {a: by_amplitude[a] for a in amplitudes}


def run_stark_mitigation(
    device: Device,
    mitigation: StarkMitigation,
    gate: Tuple[str, str],
    t_g_ns: float,
    config: Optional[TuneUpConfig] = None,
    rwa: bool = True,
) -> MitigationSweep:
    """Tune and score a CX at each Stark-tone amplitude in the sweep.

    The CX is re-tuned at every amplitude with the tone present, so the
    sweep reports what the mitigated device would actually run. A zero
    amplitude reproduces the unmitigated gate exactly. The induced shift
    comes from the statically driven spectrum, which stays truthful where
    the second-order estimate degrades.
    """
    if config is None:
        config = TuneUpConfig()
    _validate_mitigation_device(device, mitigation)
    if mitigation.target in (gate[0], gate[1]):
        raise ValueError(
            "Stark tone must target a spectator qubit; the gate qubits "
            "already carry the CR tones"
        )
    if t_g_ns <= 0:
        raise ValueError("t_g_ns must be positive")

    shifts = stark_shifts(device, mitigation, rwa=rwa)
    points: List[MitigationPoint] = []
    for amplitude in sorted(shifts):
        if amplitude == 0.0:
            extra: Tuple[DriveSpec, ...] = ()
        else:
            ramp = 0.0 if mitigation.always_on else config.ramp_ns
            tone = DriveSpec(
                mitigation.target,
                mitigation.frequency_GHz,
                PulseEnvelope(t_g_ns, amplitude, ramp),
                always_on=mitigation.always_on,
            )
            extra = (tone,)
        report = characterize_isolated(
            device, gate, t_g_ns, config=config, extra_drives=extra
        )
        points.append(MitigationPoint(amplitude, shifts[amplitude], report))
    return MitigationSweep(
        mitigation=mitigation,
        gate=(str(gate[0]), str(gate[1])),
        t_g_ns=float(t_g_ns),
        points=tuple(points),
    )
