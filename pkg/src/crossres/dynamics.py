"""Time-domain propagation and reduction to computational gates.

States are propagated column-wise with classic fixed-step RK4 applied in the
interaction picture of the static diagonal: with D the diagonal of the
frame's static Hamiltonian and psi = exp(-i D tau) phi, the integrated
kernel exp(+i D tau) (H(t) - D) exp(-i D tau) keeps only the coupling and
drive scales, so step sizes are set by detunings rather than by absolute
mode energies. The transformation is exact; accuracy control is by step
doubling: a segment is integrated at dt and at dt/2 and the halved step is
accepted once the results agree elementwise within tolerance, halving
further as needed down to a floor.

Intervals on which every drive coefficient is constant (flat pulse tops,
always-on tones in their own rotating frame, or no drive at all) are
propagated exactly through one eigendecomposition instead.

Times are ns, energies angular (rad/us).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh

from .operators import SpaceMap, angular_from_GHz, angular_from_MHz, hermitize
from .pulses import NS, TimeDependentHamiltonian
from .statics import LabeledSpectrum

# Step-doubling acceptance: max elementwise state difference between the dt
# and dt/2 integrations of a segment.
ACCEPT_TOL = 1e-8

# Halving floor; reaching it without acceptance is an error.
DT_MIN_NS = 1e-4

DEFAULT_DT0_NS = {"drive_rot": 0.05, "lab_rwa": 0.05, "lab_full": 0.002}

# Flat segments are propagated by eigendecomposition up to this dimension.
EIGH_SEGMENT_LIMIT = 4096


@dataclass(frozen=True)
class Propagator:
    """Final states of a batch of initial columns, with integration metadata.

    ``states[:, k]`` is the propagated ``initial[:, k]``; ``column_labels``
    optionally records the bare occupation each column started from (set by
    gate-level callers, consumed by the computational truncation).
    metadata holds per-segment integration records.
    """

    space: SpaceMap
    frame: str
    reference_GHz: float
    t_initial_ns: float
    t_final_ns: float
    initial: np.ndarray
    states: np.ndarray
    column_labels: Optional[Tuple[Tuple[int, ...], ...]]
    metadata: Dict[str, object]

    @property
    def duration_ns(self) -> float:
        return self.t_final_ns - self.t_initial_ns

    def norm_defect(self) -> float:
        """Largest deviation of a column norm from its initial norm."""
        n0 = np.linalg.norm(self.initial, axis=0)
        n1 = np.linalg.norm(self.states, axis=0)
        return float(np.max(np.abs(n1 - n0)))


@dataclass(frozen=True)
class TruncatedGate:
    """Computational-subspace gate with frame phases stripped.

    ``matrix[m, n]`` is the amplitude on dressed computational state m after
    preparing dressed state n, multiplied by exp(+i E_m_rot t) so that idle
    evolution reduces to the identity. ``leakage[n]`` is the population that
    left the computational subspace from column n.
    """

    qubits: Tuple[str, ...]
    matrix: np.ndarray
    leakage: np.ndarray
    duration_ns: float

    def dimension(self) -> int:
        return self.matrix.shape[0]

    def unitarity_defect(self) -> float:
        d = self.dimension()
        return float(
            np.max(np.abs(self.matrix.conj().T @ self.matrix - np.eye(d)))
        )


def _segment_breakpoints(
    ham: TimeDependentHamiltonian,
    drives_breaks: Sequence[float],
    t0: float,
    t1: float,
) -> List[Tuple[float, float]]:
    pts = {t0, t1}
    for b in drives_breaks:
        if t0 < b < t1:
            pts.add(float(b))
    edges = sorted(pts)
    return [(edges[i], edges[i + 1]) for i in range(len(edges) - 1)]


def _flat_step(
    ham: TimeDependentHamiltonian, psi: np.ndarray, t0: float, t1: float
) -> np.ndarray:
    h = ham.value_at(0.5 * (t0 + t1))
    vals, vecs = eigh(hermitize(h).toarray())
    phases = np.exp(-1j * vals * (t1 - t0) * NS)
    return vecs @ (phases[:, None] * (vecs.conj().T @ psi))


def _rk4_segment(
    ham: TimeDependentHamiltonian,
    psi: np.ndarray,
    t0: float,
    t1: float,
    dt_ns: float,
) -> np.ndarray:
    diag = ham.static.diagonal()
    if np.max(np.abs(diag.imag)) > 1e-12:
        raise ValueError("static diagonal must be real")
    d = diag.real
    v0 = (ham.static - sp.diags(d)).tocsr()
    ops = [t.operator.tocsr() for t in ham.terms]
    coeffs = [t.coefficient for t in ham.terms]

    span = t1 - t0
    n_steps = max(1, int(math.ceil(span / dt_ns - 1e-12)))
    h_ns = span / n_steps

    def rhs(tau_ns: float, phi: np.ndarray) -> np.ndarray:
        w = np.exp((1j * tau_ns * NS) * d)
        x = w.conj()[:, None] * phi
        y = v0 @ x
        t_abs = t0 + tau_ns
        for op, cf in zip(ops, coeffs):
            c = cf(t_abs)
            if c != 0.0:
                y = y + c * (op @ x)
        return -1j * (w[:, None] * y)

    phi = psi.astype(complex)
    scale = h_ns * NS
    for k in range(n_steps):
        tau = k * h_ns
        k1 = rhs(tau, phi)
        k2 = rhs(tau + 0.5 * h_ns, phi + (0.5 * scale) * k1)
        k3 = rhs(tau + 0.5 * h_ns, phi + (0.5 * scale) * k2)
        k4 = rhs(tau + h_ns, phi + scale * k3)
        phi = phi + (scale / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    back = np.exp((-1j * span * NS) * d)
    return back[:, None] * phi


def _rk4_adaptive(
    ham: TimeDependentHamiltonian,
    psi: np.ndarray,
    t0: float,
    t1: float,
    dt0_ns: float,
    accept_tol: float,
    dt_min_ns: float,
) -> Tuple[np.ndarray, float, int]:
    dt = min(dt0_ns, (t1 - t0) / 4.0)
    coarse = _rk4_segment(ham, psi, t0, t1, dt)
    halvings = 0
    while True:
        fine = _rk4_segment(ham, psi, t0, t1, dt / 2.0)
        diff = float(np.max(np.abs(fine - coarse)))
        if diff < accept_tol:
            return fine, dt / 2.0, halvings
        dt /= 2.0
        halvings += 1
        if dt / 2.0 < dt_min_ns:
            raise RuntimeError(
                f"step doubling failed on [{t0}, {t1}] ns: residual {diff:.3e} "
                f"above {accept_tol:g} at the dt floor {dt_min_ns:g} ns"
            )
        coarse = fine


def propagate(
    hamiltonian: TimeDependentHamiltonian,
    initial: np.ndarray,
    t_final_ns: float,
    t_initial_ns: float = 0.0,
    breakpoints_ns: Sequence[float] = (),
    dt0_ns: Optional[float] = None,
    accept_tol: float = ACCEPT_TOL,
    dt_min_ns: float = DT_MIN_NS,
    column_labels: Optional[Sequence[Sequence[int]]] = None,
) -> Propagator:
    """Propagate state columns from t_initial to t_final.

    ``breakpoints_ns`` must include every time where a drive coefficient is
    not smooth (envelope ramp edges); gate-level callers pass them from the
    pulse definitions. Segments on which all coefficients are constant are
    propagated by eigendecomposition; the rest use interaction-picture RK4
    with step doubling starting from ``dt0_ns`` (frame-dependent default).
    """
    if t_final_ns <= t_initial_ns:
        raise ValueError("t_final_ns must exceed t_initial_ns")
    psi = np.asarray(initial, dtype=complex)
    if psi.ndim == 1:
        psi = psi[:, None]
    if psi.shape[0] != hamiltonian.space.dimension:
        raise ValueError(
            f"initial states have dimension {psi.shape[0]}, "
            f"space has {hamiltonian.space.dimension}"
        )
    if dt0_ns is None:
        dt0_ns = DEFAULT_DT0_NS[hamiltonian.frame]
    segments = _segment_breakpoints(hamiltonian, breakpoints_ns, t_initial_ns, t_final_ns)
    records: List[Dict[str, object]] = []
    state = psi.copy()
    for a, b in segments:
        if (
            hamiltonian.space.dimension <= EIGH_SEGMENT_LIMIT
            and hamiltonian.is_static_on(a, b)
        ):
            state = _flat_step(hamiltonian, state, a, b)
            records.append({"t0_ns": a, "t1_ns": b, "kind": "eigh"})
        else:
            state, dt_used, halvings = _rk4_adaptive(
                hamiltonian, state, a, b, dt0_ns, accept_tol, dt_min_ns
            )
            records.append(
                {
                    "t0_ns": a,
                    "t1_ns": b,
                    "kind": "rk4",
                    "dt_ns": dt_used,
                    "halvings": halvings,
                }
            )
    labels = None
    if column_labels is not None:
        labels = tuple(tuple(int(n) for n in occ) for occ in column_labels)
        if len(labels) != state.shape[1]:
            raise ValueError("column_labels length must match the number of columns")
    return Propagator(
        space=hamiltonian.space,
        frame=hamiltonian.frame,
        reference_GHz=hamiltonian.reference_GHz,
        t_initial_ns=t_initial_ns,
        t_final_ns=t_final_ns,
        initial=psi,
        states=state,
        column_labels=labels,
        metadata={"segments": records, "accept_tol": accept_tol},
    )


def computational_occupations(
    space: SpaceMap, qubits: Sequence[str]
) -> Tuple[Tuple[int, ...], ...]:
    """Bare occupations of the 2^k computational states, first qubit as MSB."""
    positions = [space.mode_position(q) for q in qubits]
    out = []
    for code in range(2 ** len(qubits)):
        occ = [0] * len(space.labels)
        for bit, pos in enumerate(positions):
            occ[pos] = (code >> (len(qubits) - 1 - bit)) & 1
        out.append(tuple(occ))
    return tuple(out)


def truncate_to_computational(
    propagator: Propagator,
    qubits: Sequence[str],
    spectrum: LabeledSpectrum,
    strict: bool = True,
) -> TruncatedGate:
    """Project propagated columns onto the dressed computational subspace.

    The propagator's columns must be the dressed computational states in
    binary order (``column_labels`` is checked against the expected
    occupations). Each projection row is rotated by exp(+i E_rot t) with
    E_rot the dressed energy in the propagation frame, so idle evolution
    maps to the identity; residual phases are then genuinely conditional.

    With ``strict=True`` a hybridized computational label (squared overlap
    below one half) is an error; pass ``strict=False`` to accept the
    best-overlap labeling anyway, e.g. when scanning through a collision.
    """
    occupations = computational_occupations(propagator.space, qubits)
    if propagator.column_labels is None:
        raise ValueError("propagator lacks column_labels; pass them to propagate()")
    if tuple(propagator.column_labels) != occupations:
        raise ValueError(
            "columns are not the computational states in binary order: "
            f"expected {occupations}, got {propagator.column_labels}"
        )
    for occ in occupations:
        if spectrum.is_hybridized(occ):
            if strict:
                raise ValueError(
                    f"computational state {occ} is hybridized "
                    f"(overlap {spectrum.overlaps[spectrum.index_of(occ)]:.3f}); "
                    "pass strict=False to truncate anyway"
                )
    dim = len(occupations)
    w_ref = angular_from_GHz(propagator.reference_GHz)
    dt = propagator.duration_ns * NS
    matrix = np.zeros((dim, dim), dtype=complex)
    for m, occ in enumerate(occupations):
        bra = spectrum.state_of(occ)
        e_rot = angular_from_MHz(spectrum.energy_of(occ)) - w_ref * sum(occ)
        phase = np.exp(1j * e_rot * dt)
        matrix[m, :] = phase * (bra.conj() @ propagator.states)
    leakage = 1.0 - np.sum(np.abs(matrix) ** 2, axis=0)
    return TruncatedGate(
        qubits=tuple(qubits),
        matrix=matrix,
        leakage=leakage,
        duration_ns=propagator.duration_ns,
    )
