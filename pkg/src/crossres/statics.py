"""Static spectra: Hamiltonian assembly, labeled eigensolves, ZZ/XY extraction.

The Hamiltonian is assembled in angular units (rad/us, i.e. 2 pi x MHz) but
every public result is reported in linear frequency: eigenenergies and XY
couplings in MHz, ZZ strengths in kHz. Transmons enter as Duffing oscillators
w n + (alpha/2) n (n - 1); resonators are harmonic. Exchange couplings are
g (a b' + a' b) under the rotating-wave approximation and g (a + a')(b + b')
without it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh
from scipy.optimize import brentq, linear_sum_assignment
from scipy.sparse.linalg import eigsh

from .device import Device, TransmonSpec
from .operators import (
    MHz_from_angular,
    SpaceMap,
    SparseOperator,
    angular_from_GHz,
    angular_from_MHz,
    apply,
    hermitize,
    ladder,
    total_number,
)

# Above this dimension full diagonalization is refused and callers must name
# target states for a shift-invert solve.
DENSE_DIM_LIMIT = 4096

# Dressed detuning below this (in MHz) makes the XY matrix-element formula
# ill-conditioned; the pair is effectively degenerate.
XY_DEGENERACY_TOL_MHZ = 1e-3

# Squared bare-state overlap below this marks an eigenstate as hybridized.
HYBRID_OVERLAP_THRESHOLD = 0.5

# Minimum squared overlap between consecutive scan points for level tracking.
CONTINUATION_MIN_OVERLAP = 0.5

EIGSH_CLUSTER_SIZE = 6


def static_hamiltonian(
    device: Device, space: Optional[SpaceMap] = None, rwa: bool = True
) -> SparseOperator:
    """Device Hamiltonian as a sparse Hermitian matrix in angular units.

    With ``rwa=False`` the counter-rotating coupling terms are kept; on a
    space with an excitation cutoff those terms are truncated at the cutoff
    boundary, so convergence in the cutoff should be checked when combining
    the two options.
    """
    if space is None:
        space = SpaceMap.from_device(device)
    occ = space.basis
    diag = np.zeros(space.dimension)
    for m in device.modes:
        n = occ[:, space.mode_position(m.label)].astype(float)
        diag += angular_from_GHz(m.frequency) * n
        if isinstance(m, TransmonSpec):
            diag += 0.5 * angular_from_GHz(m.anharmonicity) * n * (n - 1.0)
    h = sp.diags(diag, format="csr").astype(complex)
    for c in device.couplings:
        a = ladder(space, c.endpoints[0])
        b = ladder(space, c.endpoints[1])
        g = angular_from_MHz(c.strength)
        if rwa:
            term = a @ b.conj().T
            h = h + g * (term + term.conj().T)
        else:
            x_a = a + a.conj().T
            x_b = b + b.conj().T
            h = h + g * (x_a @ x_b)
    return hermitize(h.tocsr())


@dataclass(frozen=True)
class LabeledSpectrum:
    """Eigenpairs labeled by their dominant bare occupation.

    energies are linear MHz, one per retained eigenstate, with ``states``
    columns aligned. ``overlaps`` holds the squared overlap with the labeling
    bare state; ``hybridized`` marks labels below the identification
    threshold and ``ambiguous`` marks eigenstates whose best bare state was
    already claimed by a stronger candidate.
    """

    space: SpaceMap
    labels: Tuple[Tuple[int, ...], ...]
    energies: np.ndarray
    states: np.ndarray
    overlaps: np.ndarray
    hybridized: Tuple[bool, ...]
    ambiguous: Tuple[bool, ...]
    _lookup: Dict[Tuple[int, ...], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_lookup", {occ: i for i, occ in enumerate(self.labels)})

    def index_of(self, occupation: Sequence[int]) -> int:
        key = tuple(int(n) for n in occupation)
        if key not in self._lookup:
            raise KeyError(f"no eigenstate labeled {key}")
        return self._lookup[key]

    def energy_of(self, occupation: Sequence[int]) -> float:
        """Energy of the eigenstate labeled by ``occupation``, in MHz."""
        return float(self.energies[self.index_of(occupation)])

    def state_of(self, occupation: Sequence[int]) -> np.ndarray:
        return self.states[:, self.index_of(occupation)]

    def is_hybridized(self, occupation: Sequence[int]) -> bool:
        return self.hybridized[self.index_of(occupation)]


def _canonical_phase(vec: np.ndarray, anchor: int) -> np.ndarray:
    amp = vec[anchor]
    if abs(amp) < 1e-12:
        return vec
    return vec * (amp.conjugate() / abs(amp))


def _greedy_assignment(vecs: np.ndarray) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Assign each eigenvector a distinct bare index by descending certainty.

    Returns (bare index per column, achieved squared overlap, ambiguous flag).
    """
    weight = np.abs(vecs) ** 2
    n = vecs.shape[1]
    order = np.argsort(-weight.max(axis=0))
    assigned = -np.ones(n, dtype=int)
    achieved = np.zeros(n)
    ambiguous = np.zeros(n, dtype=bool)
    taken = np.zeros(vecs.shape[0], dtype=bool)
    for j in order:
        col = weight[:, j].copy()
        best = int(np.argmax(col))
        col[taken] = -1.0
        pick = int(np.argmax(col))
        if col[pick] < 0:
            raise ValueError("ran out of bare states during labeling")
        assigned[j] = pick
        achieved[j] = weight[pick, j]
        ambiguous[j] = pick != best
        taken[pick] = True
    return assigned, achieved, ambiguous


def eigensolve_labeled(
    hamiltonian: SparseOperator,
    space: SpaceMap,
    targets: Optional[Sequence[Sequence[int]]] = None,
    dense_limit: int = DENSE_DIM_LIMIT,
) -> LabeledSpectrum:
    """Diagonalize and label eigenstates by dominant bare occupation.

    Below ``DENSE_DIM_LIMIT`` the full spectrum is computed and labeled by a
    greedy maximum-overlap assignment (each bare state claimed once, most
    certain eigenvectors first). Above it, ``targets`` must list the bare
    occupations of interest; each is resolved with a shift-invert solve
    around its bare energy. Eigenvector phases are canonicalized so the
    amplitude on the labeling bare state is real and positive.
    """
    dim = space.dimension
    if dim <= dense_limit:
        vals, vecs = eigh(hamiltonian.toarray())
        assigned, achieved, ambiguous = _greedy_assignment(vecs)
        for j in range(dim):
            vecs[:, j] = _canonical_phase(vecs[:, j], assigned[j])
        labels = tuple(space.state_of(int(i)) for i in assigned)
        spectrum = LabeledSpectrum(
            space=space,
            labels=labels,
            energies=MHz_from_angular(vals),
            states=vecs,
            overlaps=achieved,
            hybridized=tuple(bool(o < HYBRID_OVERLAP_THRESHOLD) for o in achieved),
            ambiguous=tuple(bool(a) for a in ambiguous),
        )
        if targets is not None:
            for occ in targets:
                spectrum.index_of(occ)
        return spectrum

    if targets is None:
        raise ValueError(
            f"dimension {dim} exceeds the dense limit {dense_limit}; "
            "pass the target occupations to solve for"
        )
    diag = hamiltonian.diagonal().real
    h = hamiltonian.tocsc()
    found_vals: List[float] = []
    found_vecs: List[np.ndarray] = []
    for occ in targets:
        anchor = space.index_of(occ)
        k = min(EIGSH_CLUSTER_SIZE, dim - 2)
        # a bare energy can coincide with an exact eigenvalue (the vacuum
        # always does), which makes the shift-invert factorization singular;
        # nudge sigma until it factors
        last_error: Optional[Exception] = None
        for offset in (0.0, 0.59, -1.13, 2.71):
            try:
                vals, vecs = eigsh(h, k=k, sigma=diag[anchor] + offset, which="LM")
                break
            except RuntimeError as exc:
                last_error = exc
        else:
            raise ValueError(f"shift-invert failed near {tuple(occ)}: {last_error}")
        for j in range(vals.size):
            if any(abs(vals[j] - v) < 1e-9 * max(1.0, abs(v)) for v in found_vals):
                continue
            found_vals.append(float(vals[j]))
            found_vecs.append(vecs[:, j])
    basis = np.column_stack(found_vecs)
    labels: List[Tuple[int, ...]] = []
    indices: List[int] = []
    used: set = set()
    for occ in targets:
        anchor = space.index_of(occ)
        weights = np.abs(basis[anchor, :]) ** 2
        for j in used:
            weights[j] = -1.0
        pick = int(np.argmax(weights))
        if weights[pick] < 0:
            raise ValueError(f"no eigenvector left to label {tuple(occ)}")
        used.add(pick)
        labels.append(tuple(int(n) for n in occ))
        indices.append(pick)
    energies = np.array([found_vals[j] for j in indices])
    states = np.column_stack(
        [_canonical_phase(basis[:, j], space.index_of(l)) for j, l in zip(indices, labels)]
    )
    overlaps = np.array(
        [np.abs(states[space.index_of(l), i]) ** 2 for i, l in enumerate(labels)]
    )
    order = np.argsort(energies)
    return LabeledSpectrum(
        space=space,
        labels=tuple(labels[i] for i in order),
        energies=MHz_from_angular(energies[order]),
        states=states[:, order],
        overlaps=overlaps[order],
        hybridized=tuple(bool(o < HYBRID_OVERLAP_THRESHOLD) for o in overlaps[order]),
        ambiguous=tuple(False for _ in order),
    )


def _resolve_pair(device: Device, pair: Optional[Tuple[str, str]]) -> Tuple[str, str]:
    if pair is not None:
        for label in pair:
            if not isinstance(device.mode(label), TransmonSpec):
                raise ValueError(f"{label!r} is not a transmon")
        return pair
    transmons = device.transmons
    if len(transmons) != 2:
        raise ValueError("device has more than two qubits; pass the pair explicitly")
    return (transmons[0].label, transmons[1].label)


def _pair_occupations(
    space: SpaceMap, control: str, target: str
) -> Tuple[Tuple[int, ...], ...]:
    def occ(nc: int, nt: int) -> Tuple[int, ...]:
        state = [0] * len(space.labels)
        state[space.mode_position(control)] = nc
        state[space.mode_position(target)] = nt
        return tuple(state)

    return (occ(0, 0), occ(0, 1), occ(1, 0), occ(1, 1))


def zz_numeric(
    device: Device,
    pair: Optional[Tuple[str, str]] = None,
    rwa: bool = True,
    spectrum: Optional[LabeledSpectrum] = None,
) -> float:
    """Static ZZ strength of a qubit pair from exact diagonalization, in kHz.

    zz = (E11 - E10) - (E01 - E00) over the computational states of the pair
    with every other mode in the ground state.
    """
    control, target = _resolve_pair(device, pair)
    if spectrum is None:
        space = SpaceMap.from_device(device)
        spectrum = eigensolve_labeled(static_hamiltonian(device, space, rwa=rwa), space)
    occ00, occ01, occ10, occ11 = _pair_occupations(spectrum.space, control, target)
    zz_MHz = (spectrum.energy_of(occ11) - spectrum.energy_of(occ10)) - (
        spectrum.energy_of(occ01) - spectrum.energy_of(occ00)
    )
    return zz_MHz * 1e3


def xy_numeric(
    device: Device,
    pair: Optional[Tuple[str, str]] = None,
    rwa: bool = True,
    spectrum: Optional[LabeledSpectrum] = None,
) -> float:
    """Effective XY coupling of a qubit pair from the dressed spectrum, MHz.

    The coupling is extracted as minus the dressed detuning times the matrix
    element of the control quadrature between the dressed vacuum and the
    dressed target-excited state. Raises for effectively degenerate pairs
    (|detuning| below ``XY_DEGENERACY_TOL_MHZ``).
    """
    control, target = _resolve_pair(device, pair)
    if spectrum is None:
        space = SpaceMap.from_device(device)
        spectrum = eigensolve_labeled(static_hamiltonian(device, space, rwa=rwa), space)
    occ00, occ01, occ10, _ = _pair_occupations(spectrum.space, control, target)
    detuning = spectrum.energy_of(occ10) - spectrum.energy_of(occ01)
    if abs(detuning) < XY_DEGENERACY_TOL_MHZ:
        raise ValueError(
            f"pair ({control}, {target}) is degenerate to within "
            f"{XY_DEGENERACY_TOL_MHZ} MHz; the matrix-element extraction is ill-posed"
        )
    a = ladder(spectrum.space, control)
    quadrature = a + a.conj().T
    element = np.vdot(spectrum.state_of(occ01), apply(quadrature, spectrum.state_of(occ00)))
    if abs(element.imag) > 1e-6 * max(1.0, abs(element.real)):
        raise ValueError("quadrature matrix element is not real; check phase conventions")
    return -detuning * element.real


def zz_zero_crossing(
    device: Device,
    tune_label: str,
    lo_GHz: float,
    hi_GHz: float,
    pair: Optional[Tuple[str, str]] = None,
    rwa: bool = True,
    points: int = 25,
) -> float:
    """Frequency of ``tune_label`` where the pair's ZZ crosses zero, in GHz.

    Scans coarsely for a sign change, then refines by bisection. Raises if
    the ZZ does not change sign on the interval.
    """
    control, target = _resolve_pair(device, pair)

    def f(freq: float) -> float:
        return zz_numeric(device.with_frequencies({tune_label: freq}), (control, target), rwa)

    grid = np.linspace(lo_GHz, hi_GHz, points)
    values = [f(w) for w in grid]
    for i in range(len(grid) - 1):
        if values[i] == 0.0:
            return float(grid[i])
        if values[i] * values[i + 1] < 0:
            return float(brentq(f, grid[i], grid[i + 1], xtol=1e-9))
    raise ValueError(
        f"zz does not change sign for {tune_label} in [{lo_GHz}, {hi_GHz}] GHz"
    )


@dataclass(frozen=True)
class Anticrossing:
    """One avoided crossing located in a dressed scan.

    ``levels`` are the tracked occupation labels of the two branches,
    ``amplitude`` the refined drive amplitude in MHz, ``gap`` the refined
    minimum splitting in MHz, ``grid_index`` the scan point of the raw
    minimum.
    """

    levels: Tuple[Tuple[int, ...], Tuple[int, ...]]
    amplitude: float
    gap: float
    grid_index: int


@dataclass(frozen=True)
class DressedScan:
    """Level energies versus drive amplitude in the drive-rotated frame.

    energies[k, i] is the energy (MHz) of the level tracked from bare label
    labels[i] at amplitudes[k] (MHz). Levels are followed through crossings
    by eigenvector overlap, so branches keep their small-amplitude identity.
    """

    control: str
    frequency_GHz: float
    amplitudes: np.ndarray
    labels: Tuple[Tuple[int, ...], ...]
    energies: np.ndarray
    anticrossings: Tuple[Anticrossing, ...]
    _lookup: Dict[Tuple[int, ...], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "_lookup", {occ: i for i, occ in enumerate(self.labels)})

    def column_of(self, occupation: Sequence[int]) -> int:
        key = tuple(int(n) for n in occupation)
        if key not in self._lookup:
            raise KeyError(f"scan does not track {key}")
        return self._lookup[key]

    def energy_series(self, occupation: Sequence[int]) -> np.ndarray:
        return self.energies[:, self.column_of(occupation)]

    def gap_series(self, pair: Sequence[Sequence[int]]) -> np.ndarray:
        a, b = pair
        return np.abs(self.energy_series(a) - self.energy_series(b))


def _refine_minimum(
    amplitudes: np.ndarray, gap: np.ndarray, k: int
) -> Tuple[float, float]:
    lo = max(0, k - 2)
    hi = min(len(amplitudes), k + 3)
    window = slice(lo, hi)
    if hi - lo < 3:
        return float(amplitudes[k]), float(gap[k])
    coeffs = np.polyfit(amplitudes[window], gap[window] ** 2, 2)
    if coeffs[0] <= 0:
        return float(amplitudes[k]), float(gap[k])
    omega = -coeffs[1] / (2.0 * coeffs[0])
    omega = min(max(omega, amplitudes[lo]), amplitudes[hi - 1])
    value = np.polyval(coeffs, omega)
    return float(omega), float(np.sqrt(max(value, 0.0)))


def _detect_anticrossings(
    amplitudes: np.ndarray, energies: np.ndarray, labels: Tuple[Tuple[int, ...], ...]
) -> Tuple[Anticrossing, ...]:
    n_pts, n_lvl = energies.shape
    candidates = set()
    for k in range(1, n_pts - 1):
        order = np.argsort(energies[k])
        for pos in range(n_lvl - 1):
            i, j = int(order[pos]), int(order[pos + 1])
            gap_k = abs(energies[k, i] - energies[k, j])
            gap_prev = abs(energies[k - 1, i] - energies[k - 1, j])
            gap_next = abs(energies[k + 1, i] - energies[k + 1, j])
            if gap_k < gap_prev and gap_k < gap_next:
                candidates.add((min(i, j), max(i, j), k))
    out = []
    for i, j, k in sorted(candidates):
        gap = np.abs(energies[:, i] - energies[:, j])
        omega, value = _refine_minimum(amplitudes, gap, k)
        out.append(
            Anticrossing(
                levels=(labels[i], labels[j]), amplitude=omega, gap=value, grid_index=k
            )
        )
    return tuple(out)


def dressed_scan(
    device: Device,
    control: str,
    amplitudes_MHz: Sequence[float],
    frequency_GHz: float,
    rwa: bool = True,
    targets: Optional[Sequence[Sequence[int]]] = None,
    min_overlap: float = CONTINUATION_MIN_OVERLAP,
) -> DressedScan:
    """Spectrum of the statically driven device versus drive amplitude.

    The Hamiltonian in the frame rotating at the drive frequency is
    H(omega) = H_static - w_d N + (omega/2)(a_c + a_c') with the drive on
    mode ``control``. Levels are labeled at the first amplitude (which
    should be small enough for bare labeling to make sense) and tracked
    point to point by maximum-overlap assignment; a tracking overlap below
    ``min_overlap`` raises with a suggestion to refine the amplitude grid.
    ``targets`` restricts the returned columns.

    Dense spectra cross through avoided gaps far narrower than any
    practical amplitude step, and a grid point that lands inside such a
    gap mixes the two branches roughly half and half, capping the best
    achievable overlap near 0.5 no matter how fine the grid. Lowering
    ``min_overlap`` (0.2 is a reasonable floor) lets the scan continue
    through those points. The cost is that the two branch names may come
    out exchanged on the far side of a crossing the grid cannot resolve;
    gap locations and sizes reported by ``anticrossings`` are unaffected.
    """
    amplitudes = np.asarray(list(amplitudes_MHz), dtype=float)
    if amplitudes.ndim != 1 or amplitudes.size < 3:
        raise ValueError("need at least three amplitudes")
    if np.any(np.diff(amplitudes) <= 0):
        raise ValueError("amplitudes must be strictly increasing")
    if not 0.0 < min_overlap <= 1.0:
        raise ValueError("min_overlap must be in (0, 1]")
    space = SpaceMap.from_device(device)
    if space.dimension > DENSE_DIM_LIMIT:
        raise ValueError(
            f"dimension {space.dimension} exceeds the dense limit; "
            "restrict the device or lower the excitation cutoff"
        )
    h0 = static_hamiltonian(device, space, rwa=rwa)
    h_base = (h0 - angular_from_GHz(frequency_GHz) * total_number(space)).tocsr()
    a = ladder(space, control)
    quadrature = (a + a.conj().T).tocsr()

    dim = space.dimension
    energies = np.zeros((amplitudes.size, dim))
    prev_vecs: Optional[np.ndarray] = None
    labels: Tuple[Tuple[int, ...], ...] = ()
    for k, omega in enumerate(amplitudes):
        h = (h_base + 0.5 * angular_from_MHz(float(omega)) * quadrature).toarray()
        vals, vecs = eigh(h)
        if prev_vecs is None:
            assigned, _, _ = _greedy_assignment(vecs)
            order = np.argsort(assigned)
            vecs = vecs[:, order]
            vals = vals[order]
            labels = tuple(space.state_of(i) for i in np.sort(assigned))
        else:
            overlap = np.abs(prev_vecs.conj().T @ vecs) ** 2
            rows, cols = linear_sum_assignment(-overlap)
            matched = overlap[rows, cols]
            if matched.min() < min_overlap:
                worst = labels[int(rows[np.argmin(matched)])]
                raise ValueError(
                    f"level tracking lost {worst} between amplitudes "
                    f"{amplitudes[k - 1]:.3f} and {omega:.3f} MHz "
                    f"(overlap {matched.min():.3f}); refine the amplitude grid"
                )
            inverse = np.argsort(rows)
            vecs = vecs[:, cols[inverse]]
            vals = vals[cols[inverse]]
        for j in range(dim):
            anchor = space.index_of(labels[j]) if prev_vecs is None else None
            if prev_vecs is None:
                vecs[:, j] = _canonical_phase(vecs[:, j], anchor)
            else:
                phase = np.vdot(prev_vecs[:, j], vecs[:, j])
                if abs(phase) > 1e-12:
                    vecs[:, j] = vecs[:, j] * (phase.conjugate() / abs(phase))
        prev_vecs = vecs
        energies[k] = MHz_from_angular(vals)

    if targets is not None:
        keep = [labels.index(tuple(int(n) for n in occ)) for occ in targets]
        labels = tuple(labels[i] for i in keep)
        energies = energies[:, keep]
    anticrossings = _detect_anticrossings(amplitudes, energies, labels)
    return DressedScan(
        control=control,
        frequency_GHz=frequency_GHz,
        amplitudes=amplitudes,
        labels=labels,
        energies=energies,
        anticrossings=anticrossings,
    )
