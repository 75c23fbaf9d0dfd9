"""Frequency-collision audit over a device graph.

Enumerates the standard collision conditions for fixed-coupling CR layouts:
on-resonance neighbors (S1), neighbor resonant with a 1-2 transition (S2),
drive-induced two-photon and spectator transitions (D1-D4), and the
resonator two-photon condition (DR). Each instantiated condition carries a
signed margin in MHz and a per-kind bound; static conditions are also
screened for reachability by drive-induced ac-Stark shifts.

All audit arithmetic is closed-form in the mode frequencies, so a report
over a lattice costs microseconds per edge. Stark-shift reachability here
uses the lowest-order shift formula; measured anticrossings from a dressed
scan supersede it when both are available.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from .device import Device, TransmonSpec, next_nearest_qubit_pairs
from .perturb import PoleError, ac_stark

COLLISION_KINDS = ("S1", "S2", "D1", "D2", "D3", "D4", "DR")

# (near-neighbor bound, next-nearest bound) in MHz keyed by gate-error target.
_BOUNDS_BY_TARGET_ERROR: Dict[float, Tuple[float, float]] = {
    0.01: (10.0, 0.5),
    0.001: (30.0, 2.0),
}

DEFAULT_STARK_PROBE_MHZ = 50.0


@dataclass(frozen=True)
class CollisionCondition:
    """One evaluated collision condition.

    Parameters
    ----------
    kind :
        One of ``COLLISION_KINDS``.
    participants :
        Mode labels entering the condition. Two labels for pairwise static
        conditions, three for spectator-mediated ones; next-nearest S1 rows
        list the mediating qubit last.
    lhs_GHz, rhs_GHz :
        The two sides of the resonance condition, in GHz.
    bound_MHz :
        Avoidance bound around exact resonance.
    drive_MHz :
        Drive amplitude at which the condition was evaluated; 0 means bare
        frequencies.
    stark_reachable :
        Whether a typical CR drive can Stark-shift a participant across the
        margin (magnitude screen, set only on bare static rows).

    ``margin_MHz`` and ``violated`` are derived: margin = lhs - rhs and a
    condition is violated exactly when |margin| < bound.
    """

    kind: str
    participants: Tuple[str, ...]
    lhs_GHz: float
    rhs_GHz: float
    bound_MHz: float
    drive_MHz: float = 0.0
    stark_reachable: bool = False
    margin_MHz: float = field(init=False)
    violated: bool = field(init=False)

    def __post_init__(self) -> None:
        if self.kind not in COLLISION_KINDS:
            raise ValueError(f"unknown collision kind {self.kind!r}")
        if len(self.participants) < 2:
            raise ValueError("a collision condition needs at least two participants")
        if not (math.isfinite(self.lhs_GHz) and math.isfinite(self.rhs_GHz)):
            raise ValueError("condition sides must be finite")
        if not (self.bound_MHz > 0 and math.isfinite(self.bound_MHz)):
            raise ValueError("bound_MHz must be positive and finite")
        if self.drive_MHz < 0:
            raise ValueError("drive_MHz must be non-negative")
        margin = (self.lhs_GHz - self.rhs_GHz) * 1e3
        object.__setattr__(self, "margin_MHz", margin)
        object.__setattr__(self, "violated", abs(margin) < self.bound_MHz)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "participants": list(self.participants),
            "lhs_GHz": self.lhs_GHz,
            "rhs_GHz": self.rhs_GHz,
            "margin_MHz": self.margin_MHz,
            "bound_MHz": self.bound_MHz,
            "violated": self.violated,
            "drive_MHz": self.drive_MHz,
            "stark_reachable": self.stark_reachable,
        }


@dataclass(frozen=True)
class BoundsConfig:
    """Per-kind collision bounds in MHz.

    ``near_MHz`` applies to conditions carried by MHz-scale couplings or
    drive-induced transitions (everything except next-nearest static rows);
    ``next_nearest_MHz`` applies to the sub-MHz mediated control-control
    resonances. ``overrides_MHz`` replaces the near bound for specific kinds.
    """

    near_MHz: float = 10.0
    next_nearest_MHz: float = 0.5
    overrides_MHz: Optional[Dict[str, float]] = None

    def __post_init__(self) -> None:
        if self.near_MHz <= 0 or self.next_nearest_MHz <= 0:
            raise ValueError("collision bounds must be positive")
        for kind, value in (self.overrides_MHz or {}).items():
            if kind not in COLLISION_KINDS:
                raise ValueError(f"override for unknown collision kind {kind!r}")
            if value <= 0:
                raise ValueError(f"override bound for {kind} must be positive")

    @classmethod
    def for_target_error(cls, error: float) -> "BoundsConfig":
        """Default bounds for a gate-error target of 0.01 or 0.001."""
        try:
            near, nn = _BOUNDS_BY_TARGET_ERROR[error]
        except KeyError:
            known = sorted(_BOUNDS_BY_TARGET_ERROR, reverse=True)
            raise ValueError(
                f"no default bounds for target error {error!r}; known targets: {known}"
            ) from None
        return cls(near_MHz=near, next_nearest_MHz=nn)

    def bound_for(self, kind: str, next_nearest: bool = False) -> float:
        if kind not in COLLISION_KINDS:
            raise ValueError(f"unknown collision kind {kind!r}")
        if next_nearest:
            return self.next_nearest_MHz
        if self.overrides_MHz and kind in self.overrides_MHz:
            return self.overrides_MHz[kind]
        return self.near_MHz


@dataclass(frozen=True)
class CollisionReport:
    """Ordered collection of evaluated collision conditions."""

    conditions: Tuple[CollisionCondition, ...]

    def __len__(self) -> int:
        return len(self.conditions)

    def violations(self) -> Tuple[CollisionCondition, ...]:
        return tuple(c for c in self.conditions if c.violated)

    def of_kind(self, kind: str) -> Tuple[CollisionCondition, ...]:
        if kind not in COLLISION_KINDS:
            raise ValueError(f"unknown collision kind {kind!r}")
        return tuple(c for c in self.conditions if c.kind == kind)

    def rows(self) -> List[Dict[str, object]]:
        """Flat summary rows: kind, participants, margin_MHz, bound_MHz, violated."""
        return [
            {
                "kind": c.kind,
                "participants": ";".join(c.participants),
                "margin_MHz": c.margin_MHz,
                "bound_MHz": c.bound_MHz,
                "violated": c.violated,
            }
            for c in self.conditions
        ]

    def to_json(self, indent: int = 2) -> str:
        return json.dumps([c.to_dict() for c in self.conditions], indent=indent)


@dataclass(frozen=True)
class StarkReachability:
    """Signed crossing solve for one static condition.

    ``crossing_MHz`` is the drive amplitude at which the shifted margin
    crosses zero, or None when no crossing exists within the searched range.
    """

    reachable: bool
    crossing_MHz: Optional[float]


def stark_reachability(
    condition: CollisionCondition,
    omega_max_MHz: float,
    delta_drive_MHz: float,
    alpha_MHz: float,
) -> StarkReachability:
    """Solve margin + delta_s(omega) = 0 for the drive amplitude.

    The lowest-order shift delta_s = alpha omega^2 / (2 delta (delta+alpha))
    is applied to the condition's lhs mode; delta_drive_MHz = w_mode - w_drive
    for the drive acting on that mode. Returns the crossing amplitude when it
    lies in [0, omega_max_MHz]. The quadratic model is an estimate; measured
    anticrossing positions from a dressed scan take precedence over it.

    Raises PoleError when the shift formula sits on a pole (drive resonant
    with the mode's 0-1 or 1-2 transition).
    """
    if omega_max_MHz < 0:
        raise ValueError("omega_max_MHz must be non-negative")
    margin = condition.margin_MHz
    if margin == 0.0:
        return StarkReachability(True, 0.0)
    # Per-MHz^2 shift coefficient; ac_stark validates the denominators.
    slope = ac_stark(1.0, delta_drive_MHz, alpha_MHz)
    if slope == 0.0 or (margin > 0) == (slope > 0):
        return StarkReachability(False, None)
    crossing = math.sqrt(-margin / slope)
    if crossing <= omega_max_MHz:
        return StarkReachability(True, crossing)
    return StarkReachability(False, None)


def _validated_gates(
    device: Device,
    gate_directions: Sequence[Tuple[str, str]],
    spectator_controls: Sequence[str],
) -> Tuple[List[Tuple[str, str]], Set[Tuple[str, str]]]:
    qubits = {t.label for t in device.transmons}
    edges = set(device.qubit_pairs())
    gates: List[Tuple[str, str]] = []
    directed: Set[Tuple[str, str]] = set()
    for control, target in gate_directions:
        for end in (control, target):
            if end not in qubits:
                raise ValueError(f"gate endpoint {end!r} is not a transmon of the device")
        key = tuple(sorted((control, target)))
        if key not in edges:
            raise ValueError(f"gate {control}->{target} is not a coupled qubit pair")
        if key in directed:
            raise ValueError(f"duplicate gate direction for pair {key}")
        directed.add(key)
        gates.append((control, target))
    for label in spectator_controls:
        if label not in qubits:
            raise ValueError(f"spectator control {label!r} is not a transmon of the device")
    control_band = {c for c, _ in gates} | set(spectator_controls)
    for a, b in edges:
        if (a, b) not in directed and not (a in control_band and b in control_band):
            raise ValueError(
                f"coupled pair ({a}, {b}) has no gate direction; assign one or "
                "list both ends in spectator_controls"
            )
    return gates, directed


def audit(
    device: Device,
    gate_directions: Sequence[Tuple[str, str]],
    bounds: Optional[BoundsConfig] = None,
    spectator_controls: Sequence[str] = (),
    stark_probe_MHz: float = DEFAULT_STARK_PROBE_MHZ,
    stark_drive_MHz: float = 0.0,
) -> CollisionReport:
    """Evaluate every applicable collision condition on the device.

    Parameters
    ----------
    device :
        Device graph; qubit adjacency is taken from direct couplings and
        shared resonators, and DR triples from qubit-resonator attachments.
    gate_directions :
        (control, target) per CR gate. Every coupled qubit pair needs a
        direction unless both ends sit in the control band (gate controls or
        ``spectator_controls``); such undirected pairs are audited statically
        in both orientations.
    bounds :
        Per-kind bounds; defaults to the error-0.01 values.
    spectator_controls :
        Control-band qubits whose own gate targets lie outside the device.
    stark_probe_MHz :
        Amplitude of the magnitude screen that flags bare static rows as
        ``stark_reachable`` when any participant's drive shift exceeds the
        margin. Zero disables the flag.
    stark_drive_MHz :
        When positive, every gate's condition set is re-evaluated with the
        control frequency shifted by its drive's ac-Stark pull at this
        amplitude; those rows carry ``drive_MHz`` set to it. Spectator and
        drive frequencies do not shift in this model, so D2/D3 margins
        repeat their bare values.

    Enumeration per gate (control j at frequency w_j, target i): S1 checks
    w_j = w_i, S2 checks w_j = w_i + alpha_i, D1 the control two-photon
    w_i = w_j + alpha_j / 2; each spectator k coupled to j adds D2
    (w_i = w_k), D3 (w_i = w_k + alpha_k) and D4 (2 w_j + alpha_j =
    w_i + w_k), with D2 and D4 instantiated once per unordered spectator
    pair of the same control; each resonator attached to j adds DR
    (w_r + w_j = 2 w_i). Next-nearest qubit pairs are audited as S1 rows
    with the sub-MHz bound and the mediator listed last.
    """
    bounds = BoundsConfig() if bounds is None else bounds
    if stark_probe_MHz < 0:
        raise ValueError("stark_probe_MHz must be non-negative")
    if stark_drive_MHz < 0:
        raise ValueError("stark_drive_MHz must be non-negative")

    gates, directed = _validated_gates(device, gate_directions, spectator_controls)
    freq = {t.label: t.frequency for t in device.transmons}
    alpha = {t.label: t.anharmonicity for t in device.transmons}
    order = {label: i for i, label in enumerate(device.labels)}

    adjacency: Dict[str, List[str]] = {q: [] for q in freq}
    for a, b in device.qubit_pairs():
        adjacency[a].append(b)
        adjacency[b].append(a)
    for nbrs in adjacency.values():
        nbrs.sort(key=order.__getitem__)

    attached: Dict[str, List[str]] = {q: [] for q in freq}
    for r in device.resonators:
        for q in device.neighbors(r.label):
            if q in attached:
                attached[q].append(r.label)
    resonator_freq = {r.label: r.frequency for r in device.resonators}

    # Screen shifts: per control, the ac-Stark pull of each of its gate
    # drives at the probe amplitude (delta = w_control - w_target).
    probe_shifts: Dict[str, List[float]] = {}
    if stark_probe_MHz > 0:
        for control, target in gates:
            delta = (freq[control] - freq[target]) * 1e3
            try:
                shift = ac_stark(stark_probe_MHz, delta, alpha[control] * 1e3)
            except PoleError:
                continue
            probe_shifts.setdefault(control, []).append(shift)

    def screened(margin_MHz: float, labels: Sequence[str]) -> bool:
        for q in labels:
            for shift in probe_shifts.get(q, ()):
                if abs(shift) > abs(margin_MHz):
                    return True
        return False

    out: List[CollisionCondition] = []

    def emit(
        kind: str,
        participants: Tuple[str, ...],
        lhs: float,
        rhs: float,
        next_nearest: bool = False,
        drive: float = 0.0,
        screen: Sequence[str] = (),
    ) -> None:
        bound = bounds.bound_for(kind, next_nearest=next_nearest)
        flag = drive == 0.0 and screened((lhs - rhs) * 1e3, screen)
        out.append(
            CollisionCondition(kind, participants, lhs, rhs, bound, drive, flag)
        )

    def gate_conditions(control: str, target: str, w_control: float, drive: float) -> None:
        """S1/S2/D1/D2/D3/D4/DR set for one gate, control at w_control."""
        w_t = freq[target]
        emit("S1", (control, target), w_control, w_t, drive=drive, screen=(control, target))
        emit(
            "S2",
            (control, target),
            w_control,
            w_t + alpha[target],
            drive=drive,
            screen=(control, target),
        )
        emit("D1", (control, target), w_t, w_control + alpha[control] / 2.0, drive=drive)
        for k in adjacency[control]:
            if k == target:
                continue
            pair_key = (control, frozenset((target, k)))
            if pair_key not in seen_d2:
                seen_d2.add(pair_key)
                emit("D2", (control, target, k), w_t, freq[k], drive=drive)
            emit("D3", (control, target, k), w_t, freq[k] + alpha[k], drive=drive)
            # Bare D4 is symmetric under target/spectator exchange; under a
            # Stark-shifted control each gate drive pulls w_control its own
            # way, so shifted rows stay per gate.
            if drive == 0.0:
                if pair_key in seen_d4:
                    continue
                seen_d4.add(pair_key)
            emit(
                "D4",
                (control, target, k),
                2.0 * w_control + alpha[control],
                w_t + freq[k],
                drive=drive,
            )
        for r in attached[control]:
            emit("DR", (control, r, target), resonator_freq[r] + w_control, 2.0 * w_t, drive=drive)

    seen_d2: Set[Tuple[str, frozenset]] = set()
    seen_d4: Set[Tuple[str, frozenset]] = set()
    for control, target in gates:
        gate_conditions(control, target, freq[control], drive=0.0)

    undirected = [e for e in device.qubit_pairs() if e not in directed]
    for a, b in undirected:
        emit("S1", (a, b), freq[a], freq[b], screen=(a, b))
        emit("S2", (a, b), freq[a], freq[b] + alpha[b], screen=(a, b))
        emit("S2", (b, a), freq[b], freq[a] + alpha[a], screen=(a, b))

    nn_triples = next_nearest_qubit_pairs(device)
    for a, mid, b in nn_triples:
        emit("S1", (a, b, mid), freq[a], freq[b], next_nearest=True, screen=(a, b))

    if stark_drive_MHz > 0:
        seen_d2 = set()
        seen_d4 = set()
        for control, target in gates:
            delta = (freq[control] - freq[target]) * 1e3
            shift = ac_stark(stark_drive_MHz, delta, alpha[control] * 1e3)
            w_shifted = freq[control] + shift * 1e-3
            gate_conditions(control, target, w_shifted, drive=stark_drive_MHz)
            for a, b in undirected:
                if control not in (a, b):
                    continue
                w_a = w_shifted if a == control else freq[a]
                w_b = w_shifted if b == control else freq[b]
                emit("S1", (a, b), w_a, w_b, drive=stark_drive_MHz)
                emit("S2", (a, b), w_a, w_b + alpha[b], drive=stark_drive_MHz)
                emit("S2", (b, a), w_b, w_a + alpha[a], drive=stark_drive_MHz)
            for a, mid, b in nn_triples:
                if control not in (a, b):
                    continue
                w_a = w_shifted if a == control else freq[a]
                w_b = w_shifted if b == control else freq[b]
                emit(
                    "S1",
                    (a, b, mid),
                    w_a,
                    w_b,
                    next_nearest=True,
                    drive=stark_drive_MHz,
                )

    return CollisionReport(tuple(out))
