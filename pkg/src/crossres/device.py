"""Declarative device model: modes, couplings, and truncation settings.

A device is a frozen graph of transmon and resonator modes plus exchange
couplings. All frequencies are stored as linear frequencies in the units
quoted on hardware datasheets (GHz for mode frequencies and anharmonicities,
MHz for coupling strengths). Angular conversion happens only when operators
are assembled, never here.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

DEFAULT_LEVELS = 4
DEFAULT_ANHARMONICITY_GHZ = -0.33

# Coupling strengths are quoted at this mode frequency; when a preset places a
# mode elsewhere the coupling is rescaled by sqrt(w_a * w_b) / reference.
COUPLING_REFERENCE_GHZ = 5.0

# Global excitation truncation default: exact space for few-mode devices,
# total-excitation cutoff for chain devices where 4^7 dims would be wasteful.
CUTOFF_MODE_THRESHOLD = 5
DEFAULT_EXCITATION_CUTOFF = 5

PAIR_COUPLERS = ("capacitor", "resonator", "multipath", "lightweight")
UNIT_SHAPES = ("line", "tee", "perp")

_UNIT_FREQUENCIES_GHZ: Dict[str, Tuple[float, ...]] = {
    # mode order Q0, R0, Q1, R1, Q2, R2, Q3
    "line": (5.15, 5.40, 5.05, 5.41, 5.14, 5.47, 5.25),
    "tee": (5.15, 5.40, 5.05, 5.41, 5.14, 5.39, 5.16),
    "perp": (5.14, 5.47, 5.25, 5.48, 5.15, 5.49, 5.16),
}

# CR gate directions (control, target) run inside each four-qubit unit.
_UNIT_GATES: Dict[str, Tuple[Tuple[str, str], ...]] = {
    "line": (("Q0", "Q1"), ("Q2", "Q1"), ("Q2", "Q3")),
    "tee": (("Q0", "Q1"), ("Q2", "Q1")),
    "perp": (("Q2", "Q1"),),
}

# Qubits that sit in the control frequency band but whose own gate targets
# lie outside the unit; they matter for control-control collision audits.
_UNIT_SPECTATOR_CONTROLS: Dict[str, Tuple[str, ...]] = {
    "line": (),
    "tee": ("Q3",),
    "perp": ("Q0", "Q3"),
}

# Disjoint gate pairs usable for simultaneous operation.
_UNIT_SIMULTANEOUS: Dict[str, Tuple[Tuple[str, str], ...]] = {
    "line": (("Q0", "Q1"), ("Q2", "Q3")),
    "tee": (),
    "perp": (),
}


@dataclass(frozen=True)
class TransmonSpec:
    """Fixed-frequency transmon, modeled as a Duffing oscillator.

    Parameters
    ----------
    label :
        Unique mode name, e.g. ``"Q0"``.
    frequency :
        Qubit transition frequency in GHz (linear frequency).
    anharmonicity :
        Anharmonicity in GHz; negative for transmons.
    levels :
        Number of retained oscillator levels.
    """

    label: str
    frequency: float
    anharmonicity: float = DEFAULT_ANHARMONICITY_GHZ
    levels: int = DEFAULT_LEVELS

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("transmon label must be a non-empty string")
        if self.frequency <= 0:
            raise ValueError(f"transmon {self.label}: frequency must be positive")
        if self.anharmonicity >= 0:
            raise ValueError(f"transmon {self.label}: anharmonicity must be negative")
        if self.levels < 3:
            raise ValueError(f"transmon {self.label}: need at least 3 levels")


@dataclass(frozen=True)
class ResonatorSpec:
    """Harmonic coupler mode.

    Parameters
    ----------
    label :
        Unique mode name, e.g. ``"R0"``.
    frequency :
        Resonator frequency in GHz (linear frequency).
    levels :
        Number of retained Fock levels.
    """

    label: str
    frequency: float
    levels: int = DEFAULT_LEVELS

    def __post_init__(self) -> None:
        if not self.label:
            raise ValueError("resonator label must be a non-empty string")
        if self.frequency <= 0:
            raise ValueError(f"resonator {self.label}: frequency must be positive")
        if self.levels < 2:
            raise ValueError(f"resonator {self.label}: need at least 2 levels")


ModeSpec = Union[TransmonSpec, ResonatorSpec]


@dataclass(frozen=True)
class CouplingSpec:
    """Exchange coupling between two modes, strength in MHz.

    The strength is the bare coupling g between the two modes; it may be
    zero or negative. Endpoints are normalized to declaration order of the
    labels as given.
    """

    endpoints: Tuple[str, str]
    strength: float

    def __post_init__(self) -> None:
        a, b = self.endpoints
        if a == b:
            raise ValueError(f"coupling endpoints must be distinct, got ({a}, {b})")
        if not math.isfinite(self.strength):
            raise ValueError(f"coupling ({a}, {b}): strength must be finite")


@dataclass(frozen=True)
class Device:
    """Validated, immutable device graph.

    Mode ordering is declaration order and fixes the tensor-product layout
    used by every operator in the package. Instances are safe to share
    across parallel workers.
    """

    modes: Tuple[ModeSpec, ...]
    couplings: Tuple[CouplingSpec, ...] = ()
    excitation_cutoff: Optional[int] = None
    _index: Dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        labels = [m.label for m in self.modes]
        if len(set(labels)) != len(labels):
            dupes = sorted({x for x in labels if labels.count(x) > 1})
            raise ValueError(f"duplicate mode labels: {dupes}")
        if not self.modes:
            raise ValueError("device needs at least one mode")
        index = {m.label: i for i, m in enumerate(self.modes)}
        for c in self.couplings:
            for end in c.endpoints:
                if end not in index:
                    raise ValueError(f"coupling endpoint {end!r} is not a device mode")
        if self.excitation_cutoff is not None and self.excitation_cutoff < 1:
            raise ValueError("excitation_cutoff must be a positive integer")
        object.__setattr__(self, "_index", index)

    # -- lookups ---------------------------------------------------------

    def mode_index(self, label: str) -> int:
        try:
            return self._index[label]
        except KeyError:
            raise KeyError(f"unknown mode {label!r}") from None

    def mode(self, label: str) -> ModeSpec:
        return self.modes[self.mode_index(label)]

    @property
    def labels(self) -> Tuple[str, ...]:
        return tuple(m.label for m in self.modes)

    @property
    def dims(self) -> Tuple[int, ...]:
        return tuple(m.levels for m in self.modes)

    @property
    def transmons(self) -> Tuple[TransmonSpec, ...]:
        return tuple(m for m in self.modes if isinstance(m, TransmonSpec))

    @property
    def resonators(self) -> Tuple[ResonatorSpec, ...]:
        return tuple(m for m in self.modes if isinstance(m, ResonatorSpec))

    def effective_cutoff(self) -> Optional[int]:
        """Total-excitation cutoff in effect for operator assembly.

        Explicit settings win. Otherwise devices with fewer than
        ``CUTOFF_MODE_THRESHOLD`` modes use the full product space and larger
        chains default to ``DEFAULT_EXCITATION_CUTOFF``; the default must be
        validated by a convergence check for any new device family.
        """
        if self.excitation_cutoff is not None:
            return self.excitation_cutoff
        if len(self.modes) >= CUTOFF_MODE_THRESHOLD:
            return DEFAULT_EXCITATION_CUTOFF
        return None

    def neighbors(self, label: str) -> Tuple[str, ...]:
        self.mode_index(label)
        out: List[str] = []
        for c in self.couplings:
            a, b = c.endpoints
            if a == label:
                out.append(b)
            elif b == label:
                out.append(a)
        return tuple(out)

    def coupling_between(self, a: str, b: str) -> Optional[CouplingSpec]:
        for c in self.couplings:
            if set(c.endpoints) == {a, b}:
                return c
        return None

    def qubit_pairs(self) -> Tuple[Tuple[str, str], ...]:
        """Transmon pairs coupled directly or through a single resonator."""
        qubits = {m.label for m in self.transmons}
        pairs = set()
        for c in self.couplings:
            a, b = c.endpoints
            if a in qubits and b in qubits:
                pairs.add(tuple(sorted((a, b))))
        for r in self.resonators:
            attached = sorted(q for q in self.neighbors(r.label) if q in qubits)
            for i in range(len(attached)):
                for j in range(i + 1, len(attached)):
                    pairs.add((attached[i], attached[j]))
        order = {m.label: i for i, m in enumerate(self.modes)}
        return tuple(sorted(pairs, key=lambda p: (order[p[0]], order[p[1]])))

    # -- functional updates ----------------------------------------------

    def with_frequencies(self, updates: Dict[str, float]) -> "Device":
        """New device with mode frequencies replaced per ``updates`` (GHz)."""
        for label in updates:
            self.mode_index(label)
        new_modes: List[ModeSpec] = []
        for m in self.modes:
            if m.label not in updates:
                new_modes.append(m)
            elif isinstance(m, TransmonSpec):
                new_modes.append(
                    TransmonSpec(m.label, updates[m.label], m.anharmonicity, m.levels)
                )
            else:
                new_modes.append(ResonatorSpec(m.label, updates[m.label], m.levels))
        return Device(tuple(new_modes), self.couplings, self.excitation_cutoff)

    def with_coupling(self, a: str, b: str, strength: float) -> "Device":
        """New device with the (a, b) coupling strength replaced (MHz)."""
        found = False
        new_couplings: List[CouplingSpec] = []
        for c in self.couplings:
            if set(c.endpoints) == {a, b}:
                new_couplings.append(CouplingSpec(c.endpoints, strength))
                found = True
            else:
                new_couplings.append(c)
        if not found:
            raise KeyError(f"no coupling between {a!r} and {b!r}")
        return Device(self.modes, tuple(new_couplings), self.excitation_cutoff)

    def with_excitation_cutoff(self, cutoff: Optional[int]) -> "Device":
        return Device(self.modes, self.couplings, cutoff)

    # -- serialization ----------------------------------------------------

    def to_dict(self) -> dict:
        modes = []
        for m in self.modes:
            if isinstance(m, TransmonSpec):
                modes.append(
                    {
                        "kind": "transmon",
                        "label": m.label,
                        "frequency_GHz": m.frequency,
                        "anharmonicity_GHz": m.anharmonicity,
                        "levels": m.levels,
                    }
                )
            else:
                modes.append(
                    {
                        "kind": "resonator",
                        "label": m.label,
                        "frequency_GHz": m.frequency,
                        "levels": m.levels,
                    }
                )
        out = {
            "modes": modes,
            "couplings": [
                {"a": c.endpoints[0], "b": c.endpoints[1], "strength_MHz": c.strength}
                for c in self.couplings
            ],
        }
        if self.excitation_cutoff is not None:
            out["excitation_cutoff"] = self.excitation_cutoff
        return out

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    @staticmethod
    def from_dict(data: dict) -> "Device":
        modes: List[ModeSpec] = []
        for m in data["modes"]:
            kind = m.get("kind")
            if kind == "transmon":
                modes.append(
                    TransmonSpec(
                        m["label"],
                        m["frequency_GHz"],
                        m.get("anharmonicity_GHz", DEFAULT_ANHARMONICITY_GHZ),
                        m.get("levels", DEFAULT_LEVELS),
                    )
                )
            elif kind == "resonator":
                modes.append(
                    ResonatorSpec(m["label"], m["frequency_GHz"], m.get("levels", DEFAULT_LEVELS))
                )
            else:
                raise ValueError(f"unknown mode kind {kind!r}")
        couplings = tuple(
            CouplingSpec((c["a"], c["b"]), c["strength_MHz"])
            for c in data.get("couplings", [])
        )
        return Device(tuple(modes), couplings, data.get("excitation_cutoff"))

    @staticmethod
    def from_json(text: str) -> "Device":
        return Device.from_dict(json.loads(text))


def next_nearest_qubit_pairs(device: Device) -> Tuple[Tuple[str, str, str], ...]:
    """Qubit pairs two hops apart on the qubit adjacency graph.

    Returns (a, mediator, b) triples where a and b are each coupled to the
    mediating qubit (through resonators or directly) but not to each other.
    """
    adj: Dict[str, set] = {q.label: set() for q in device.transmons}
    for a, b in device.qubit_pairs():
        adj[a].add(b)
        adj[b].add(a)
    triples = []
    seen = set()
    for mid, nbrs in adj.items():
        nbrs_sorted = sorted(nbrs)
        for i in range(len(nbrs_sorted)):
            for j in range(i + 1, len(nbrs_sorted)):
                a, b = nbrs_sorted[i], nbrs_sorted[j]
                if b in adj[a]:
                    continue
                key = (a, b)
                if key in seen:
                    continue
                seen.add(key)
                triples.append((a, mid, b))
    return tuple(sorted(triples))


def build_device(
    modes: Sequence[ModeSpec],
    couplings: Sequence[CouplingSpec] = (),
    excitation_cutoff: Optional[int] = None,
) -> Device:
    """Validate and freeze a device from mode and coupling declarations."""
    return Device(tuple(modes), tuple(couplings), excitation_cutoff)


def _scaled_coupling(strength_MHz: float, freq_a_GHz: float, freq_b_GHz: float, scale: bool) -> float:
    if not scale:
        return strength_MHz
    return strength_MHz * math.sqrt(freq_a_GHz * freq_b_GHz) / COUPLING_REFERENCE_GHZ


def pair_preset(
    coupler: str,
    control_GHz: float = 5.15,
    target_GHz: float = 5.05,
    resonator_GHz: Optional[float] = None,
    direct_MHz: Optional[float] = None,
    g_rq_MHz: Optional[float] = None,
    anharmonicity_GHz: float = DEFAULT_ANHARMONICITY_GHZ,
    levels: int = DEFAULT_LEVELS,
    scale_with_frequency: bool = True,
) -> Device:
    """Two-qubit device for one of the four standard coupler layouts.

    Coupler layouts and their defaults (couplings quoted at the 5 GHz
    reference frequency and rescaled by sqrt(w_a w_b)/5 unless disabled):

    - ``capacitor``: direct coupling only, g12 = 2 MHz.
    - ``resonator``: bus at control + 1.0 GHz, g_rq = 78 MHz, plus the
      effective stray coupling g12 = 2 g_r1 g_r2 / w_r.
    - ``multipath``: bus at control + 1.0 GHz, g_rq = 78 MHz, g12 = 6 MHz.
    - ``lightweight``: coupler at control + 0.25 GHz, g_rq = 25 MHz, g12 = 0.

    Mode order is (Q1, R, Q2) with Q1 the control and Q2 the target, or
    (Q1, Q2) for the capacitor layout.
    """
    if coupler not in PAIR_COUPLERS:
        raise ValueError(f"unknown coupler {coupler!r}, expected one of {PAIR_COUPLERS}")
    q1 = TransmonSpec("Q1", control_GHz, anharmonicity_GHz, levels)
    q2 = TransmonSpec("Q2", target_GHz, anharmonicity_GHz, levels)

    if coupler == "capacitor":
        g12 = 2.0 if direct_MHz is None else direct_MHz
        g12 = _scaled_coupling(g12, control_GHz, target_GHz, scale_with_frequency)
        return Device((q1, q2), (CouplingSpec(("Q1", "Q2"), g12),))

    if coupler == "lightweight":
        w_r = control_GHz + 0.25 if resonator_GHz is None else resonator_GHz
        g = 25.0 if g_rq_MHz is None else g_rq_MHz
        g12 = 0.0 if direct_MHz is None else direct_MHz
    else:
        w_r = control_GHz + 1.0 if resonator_GHz is None else resonator_GHz
        g = 78.0 if g_rq_MHz is None else g_rq_MHz
        if coupler == "multipath":
            g12 = 6.0 if direct_MHz is None else direct_MHz
        else:
            g12 = direct_MHz  # resonator layout: stray coupling derived below

    g_r1 = _scaled_coupling(g, control_GHz, w_r, scale_with_frequency)
    g_r2 = _scaled_coupling(g, target_GHz, w_r, scale_with_frequency)
    if coupler == "resonator" and g12 is None:
        # effective capacitance mediated by the bus: 2 g_r1 g_r2 / w_r
        g12 = 2.0 * g_r1 * g_r2 / (w_r * 1e3)
    elif coupler != "resonator":
        g12 = _scaled_coupling(g12, control_GHz, target_GHz, scale_with_frequency)

    r = ResonatorSpec("R", w_r, levels)
    couplings = [
        CouplingSpec(("Q1", "R"), g_r1),
        CouplingSpec(("R", "Q2"), g_r2),
    ]
    if g12 != 0.0:
        couplings.append(CouplingSpec(("Q1", "Q2"), g12))
    return Device((q1, r, q2), tuple(couplings))


def unit_preset(
    shape: str,
    levels: int = DEFAULT_LEVELS,
    excitation_cutoff: Optional[int] = None,
    scale_with_frequency: bool = True,
) -> Device:
    """Four-qubit chain unit Q0-R0-Q1-R1-Q2-R2-Q3 with lightweight couplers.

    ``shape`` selects the frequency allocation: ``line``, ``tee``, or
    ``perp``. Every qubit-resonator coupling uses the lightweight value
    (25 MHz at the 5 GHz reference).
    """
    if shape not in UNIT_SHAPES:
        raise ValueError(f"unknown unit shape {shape!r}, expected one of {UNIT_SHAPES}")
    freqs = _UNIT_FREQUENCIES_GHZ[shape]
    names = ("Q0", "R0", "Q1", "R1", "Q2", "R2", "Q3")
    modes: List[ModeSpec] = []
    for name, f in zip(names, freqs):
        if name.startswith("Q"):
            modes.append(TransmonSpec(name, f, DEFAULT_ANHARMONICITY_GHZ, levels))
        else:
            modes.append(ResonatorSpec(name, f, levels))
    couplings = []
    for i in range(len(names) - 1):
        a, b = names[i], names[i + 1]
        g = _scaled_coupling(25.0, freqs[i], freqs[i + 1], scale_with_frequency)
        couplings.append(CouplingSpec((a, b), g))
    return Device(tuple(modes), tuple(couplings), excitation_cutoff)


def unit_gate_directions(shape: str) -> Tuple[Tuple[str, str], ...]:
    """(control, target) pairs of the CR gates run inside a unit."""
    if shape not in UNIT_SHAPES:
        raise ValueError(f"unknown unit shape {shape!r}")
    return _UNIT_GATES[shape]


def unit_spectator_controls(shape: str) -> Tuple[str, ...]:
    """Qubits in the control band whose gate targets lie outside the unit."""
    if shape not in UNIT_SHAPES:
        raise ValueError(f"unknown unit shape {shape!r}")
    return _UNIT_SPECTATOR_CONTROLS[shape]


def unit_simultaneous_pairs(shape: str) -> Tuple[Tuple[str, str], ...]:
    """Disjoint gate set for simultaneous operation, empty if none."""
    if shape not in UNIT_SHAPES:
        raise ValueError(f"unknown unit shape {shape!r}")
    return _UNIT_SIMULTANEOUS[shape]
