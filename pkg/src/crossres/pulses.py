"""Drive envelopes and time-dependent Hamiltonian assembly.

A drive is a flat-top pulse with raised-cosine ramps applied to one qubit's
quadrature at a fixed carrier frequency. Three frames are supported when
assembling the time-dependent Hamiltonian:

- ``drive_rot``: the frame co-rotating with a common drive frequency. All
  carriers must match; the Hamiltonian is time independent apart from the
  shared envelope, which makes flat-top segments diagonalizable in one shot.
- ``lab_rwa``: rotating-wave drives in the frame of the first drive's
  carrier. Tones detuned from the reference appear as slowly rotating
  complex envelopes; the physics is unitarily equivalent to ``drive_rot``
  for a single drive and supports distinct carriers.
- ``lab_full``: no rotating frame and no drive RWA; real cosine drives at
  the carrier frequencies. Time steps must resolve the carriers themselves.

Times are nanoseconds everywhere; amplitudes are linear MHz.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from .device import Device
from .operators import (
    SpaceMap,
    SparseOperator,
    angular_from_GHz,
    angular_from_MHz,
    ladder,
    total_number,
)
from .statics import static_hamiltonian

FRAMES = ("drive_rot", "lab_rwa", "lab_full")

DEFAULT_RAMP_NS = 20.0

# ns -> us; internal angular frequencies are rad/us
NS = 1e-3


@dataclass(frozen=True)
class PulseEnvelope:
    """Flat-top envelope with raised-cosine ramps.

    The envelope rises over ``ramp_ns`` as peak * (1 - cos(pi t / ramp)) / 2,
    holds at ``peak_MHz``, and descends symmetrically, so the pulse area is
    exactly peak * (gate_ns - ramp_ns). ``ramp_ns = 0`` gives a rectangle.
    """

    gate_ns: float
    peak_MHz: float
    ramp_ns: float = DEFAULT_RAMP_NS

    def __post_init__(self) -> None:
        if self.gate_ns <= 0:
            raise ValueError("gate_ns must be positive")
        if self.ramp_ns < 0:
            raise ValueError("ramp_ns must be non-negative")
        if 2.0 * self.ramp_ns > self.gate_ns:
            raise ValueError("ramps must fit inside the gate: 2*ramp_ns <= gate_ns")
        if not math.isfinite(self.peak_MHz):
            raise ValueError("peak_MHz must be finite")

    def value_at(self, t_ns: float) -> float:
        """Envelope amplitude in MHz at time ``t_ns``; zero outside the gate."""
        if t_ns < 0.0 or t_ns > self.gate_ns:
            return 0.0
        if self.ramp_ns == 0.0:
            return self.peak_MHz
        if t_ns < self.ramp_ns:
            return 0.5 * self.peak_MHz * (1.0 - math.cos(math.pi * t_ns / self.ramp_ns))
        if t_ns > self.gate_ns - self.ramp_ns:
            return 0.5 * self.peak_MHz * (
                1.0 - math.cos(math.pi * (self.gate_ns - t_ns) / self.ramp_ns)
            )
        return self.peak_MHz

    def area_MHz_ns(self) -> float:
        """Integral of the envelope over the gate, MHz * ns."""
        return self.peak_MHz * (self.gate_ns - self.ramp_ns)

    def flat_interval(self) -> Tuple[float, float]:
        return (self.ramp_ns, self.gate_ns - self.ramp_ns)


def envelope_at(envelope: PulseEnvelope, times_ns: Sequence[float]) -> np.ndarray:
    """Vectorized envelope evaluation."""
    return np.array([envelope.value_at(float(t)) for t in np.asarray(times_ns).ravel()])


@dataclass(frozen=True)
class DriveSpec:
    """One microwave tone: which qubit it drives, its carrier, its envelope.

    ``always_on=True`` replaces the envelope with a constant amplitude equal
    to ``envelope.peak_MHz`` for the duration of the simulation (used for
    spectator Stark tones).
    """

    qubit: str
    frequency_GHz: float
    envelope: PulseEnvelope
    always_on: bool = False

    def __post_init__(self) -> None:
        if self.frequency_GHz <= 0:
            raise ValueError("drive frequency must be positive")

    def amplitude_at(self, t_ns: float) -> float:
        if self.always_on:
            return self.envelope.peak_MHz
        return self.envelope.value_at(t_ns)


@dataclass(frozen=True)
class HamiltonianTerm:
    """One constant sparse operator with a scalar time-dependent coefficient."""

    operator: SparseOperator
    coefficient: Callable[[float], complex]


@dataclass(frozen=True)
class TimeDependentHamiltonian:
    """H(t) = static + sum_j c_j(t) P_j, all in angular units (rad/us).

    ``static`` includes any frame rotation term. ``reference_GHz`` records
    the rotation frequency of the frame (0 for the lab frame); state phases
    at time t relate to lab-frame phases through exp(-i w_ref N t).
    """

    space: SpaceMap
    static: SparseOperator
    terms: Tuple[HamiltonianTerm, ...]
    frame: str
    reference_GHz: float

    def value_at(self, t_ns: float) -> SparseOperator:
        h = self.static
        for term in self.terms:
            c = term.coefficient(t_ns)
            if c != 0.0:
                h = h + c * term.operator
        return h.tocsr()

    def is_static_on(self, lo_ns: float, hi_ns: float, probes: int = 7) -> bool:
        """True when every coefficient is constant across [lo, hi].

        Checked by probing; exact for the piecewise-analytic envelopes used
        here as long as segment boundaries are passed as interval edges.
        """
        if not self.terms:
            return True
        for term in self.terms:
            ref = term.coefficient(lo_ns)
            for t in np.linspace(lo_ns, hi_ns, probes):
                if abs(term.coefficient(float(t)) - ref) > 1e-12 * max(1.0, abs(ref)):
                    return False
        return True


def _quadratures(space: SpaceMap, qubit: str) -> Tuple[SparseOperator, SparseOperator]:
    a = ladder(space, qubit)
    return a.tocsr(), a.conj().T.tocsr()


def drive_hamiltonian(
    device: Device,
    drives: Sequence[DriveSpec],
    frame: str = "drive_rot",
    rwa: bool = True,
    space: Optional[SpaceMap] = None,
) -> TimeDependentHamiltonian:
    """Assemble H(t) for a set of drives in the requested frame.

    The drive operator convention is (amplitude/2)(a e^{+i d t} + h.c.) with
    d the carrier detuning from the frame reference, reducing to
    (amplitude/2)(a + a') for resonant tones in ``drive_rot``. In
    ``lab_full`` each tone is amplitude * cos(w t) (a + a') and ``rwa``
    applies only to the static couplings.
    """
    if frame not in FRAMES:
        raise ValueError(f"frame must be one of {FRAMES}")
    if not drives:
        raise ValueError("need at least one drive")
    labels = [d.qubit for d in drives]
    if len(set(labels)) != len(labels):
        raise ValueError("one drive per qubit; combine tones before assembly")
    if space is None:
        space = SpaceMap.from_device(device)
    for d in drives:
        space.mode_position(d.qubit)

    h0 = static_hamiltonian(device, space, rwa=rwa)
    terms: List[HamiltonianTerm] = []

    if frame == "lab_full":
        reference = 0.0
        static = h0
        for d in drives:
            a, adag = _quadratures(space, d.qubit)
            x = (a + adag).tocsr()
            w = angular_from_GHz(d.frequency_GHz)

            def coeff(t_ns: float, d=d, w=w) -> complex:
                return angular_from_MHz(d.amplitude_at(t_ns)) * math.cos(w * t_ns * NS)

            terms.append(HamiltonianTerm(operator=x, coefficient=coeff))
        return TimeDependentHamiltonian(
            space=space, static=static, terms=tuple(terms), frame=frame, reference_GHz=reference
        )

    reference = drives[0].frequency_GHz
    if frame == "drive_rot":
        for d in drives[1:]:
            if abs(d.frequency_GHz - reference) > 1e-12:
                raise ValueError(
                    "drive_rot requires a common carrier; use lab_rwa for detuned tones"
                )
    w_ref = angular_from_GHz(reference)
    static = (h0 - w_ref * total_number(space)).tocsr()
    for d in drives:
        a, adag = _quadratures(space, d.qubit)
        detuning = angular_from_GHz(d.frequency_GHz) - w_ref
        if abs(detuning) < 1e-12:
            x = (a + adag).tocsr()

            def coeff(t_ns: float, d=d) -> complex:
                return 0.5 * angular_from_MHz(d.amplitude_at(t_ns))

            terms.append(HamiltonianTerm(operator=x, coefficient=coeff))
        else:
            # residual rotation of a detuned tone: (amp/2)(a e^{+i d t} + h.c.)
            def coeff_a(t_ns: float, d=d, detuning=detuning) -> complex:
                return 0.5 * angular_from_MHz(d.amplitude_at(t_ns)) * np.exp(
                    1j * detuning * t_ns * NS
                )

            def coeff_adag(t_ns: float, d=d, detuning=detuning) -> complex:
                return 0.5 * angular_from_MHz(d.amplitude_at(t_ns)) * np.exp(
                    -1j * detuning * t_ns * NS
                )

            terms.append(HamiltonianTerm(operator=a, coefficient=coeff_a))
            terms.append(HamiltonianTerm(operator=adag, coefficient=coeff_adag))
    return TimeDependentHamiltonian(
        space=space, static=static, terms=tuple(terms), frame=frame, reference_GHz=reference
    )
