"""Sparse operator algebra on the tensor-product Fock space.

Basis states are occupation tuples (n_0, n_1, ...) over the device modes in
declaration order, optionally restricted to a total-excitation cutoff. All
energies carried by assembled operators are angular MHz (2 pi x MHz) and all
times downstream are ns, so a phase is E * t * 1e-3.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.sparse as sp

from .device import Device

TWO_PI = 2.0 * np.pi
NS_TO_US = 1e-3
HERMITICITY_TOL = 1e-9

# scipy sparse matrix in CSR layout; creation is adjoint (.conj().T)
SparseOperator = sp.csr_matrix


def angular_from_GHz(frequency_GHz: float) -> float:
    """Angular MHz from a linear GHz frequency."""
    return TWO_PI * 1e3 * frequency_GHz


def angular_from_MHz(frequency_MHz: float) -> float:
    return TWO_PI * frequency_MHz


def MHz_from_angular(energy: float) -> float:
    return energy / TWO_PI


@dataclass(frozen=True)
class SpaceMap:
    """Bijection between occupation tuples and flat state indices.

    With ``cutoff`` set, only product states whose total occupation is at
    most the cutoff are enumerated; ordering follows the unrestricted
    row-major (first mode most significant) order, so the map is stable
    under cutoff changes.
    """

    labels: Tuple[str, ...]
    dims: Tuple[int, ...]
    cutoff: Optional[int] = None
    basis: np.ndarray = field(init=False, repr=False, compare=False)
    _index: Dict[Tuple[int, ...], int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        if len(self.labels) != len(self.dims):
            raise ValueError("labels and dims must have equal length")
        if any(d < 1 for d in self.dims):
            raise ValueError("mode dimensions must be positive")
        grids = np.indices(self.dims).reshape(len(self.dims), -1).T
        if self.cutoff is not None:
            grids = grids[grids.sum(axis=1) <= self.cutoff]
        if grids.shape[0] == 0:
            raise ValueError("excitation cutoff leaves an empty basis")
        basis = np.ascontiguousarray(grids, dtype=np.int64)
        index = {tuple(int(x) for x in row): i for i, row in enumerate(basis)}
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "_index", index)

    @staticmethod
    def from_device(device: Device) -> "SpaceMap":
        return SpaceMap(device.labels, device.dims, device.effective_cutoff())

    @property
    def dimension(self) -> int:
        return self.basis.shape[0]

    def mode_position(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(f"unknown mode {label!r}") from None

    def index_of(self, occupation: Sequence[int]) -> int:
        key = tuple(int(x) for x in occupation)
        try:
            return self._index[key]
        except KeyError:
            raise KeyError(f"state {key} is outside the enumerated basis") from None

    def state_of(self, index: int) -> Tuple[int, ...]:
        return tuple(int(x) for x in self.basis[index])

    def contains(self, occupation: Sequence[int]) -> bool:
        return tuple(int(x) for x in occupation) in self._index

    def total_excitations(self) -> np.ndarray:
        return self.basis.sum(axis=1)


def ladder(space: SpaceMap, mode: str) -> SparseOperator:
    """Annihilation operator for one mode: <n-1|a|n> = sqrt(n)."""
    m = space.mode_position(mode)
    basis = space.basis
    src = np.nonzero(basis[:, m] > 0)[0]
    vals = np.sqrt(basis[src, m].astype(float))
    lowered = basis[src].copy()
    lowered[:, m] -= 1
    dst = np.array([space.index_of(tuple(row)) for row in lowered], dtype=np.int64)
    a = sp.csr_matrix(
        (vals, (dst, src)), shape=(space.dimension, space.dimension), dtype=np.complex128
    )
    return a


def number(space: SpaceMap, mode: str) -> SparseOperator:
    m = space.mode_position(mode)
    diag = space.basis[:, m].astype(np.complex128)
    return sp.diags(diag, format="csr")


def total_number(space: SpaceMap) -> SparseOperator:
    diag = space.total_excitations().astype(np.complex128)
    return sp.diags(diag, format="csr")


def identity(space: SpaceMap) -> SparseOperator:
    return sp.identity(space.dimension, dtype=np.complex128, format="csr")


def hermitize(op: SparseOperator, tol: float = HERMITICITY_TOL) -> SparseOperator:
    """Validate near-Hermiticity and return the symmetrized operator."""
    diff = op - op.conj().T
    if diff.nnz:
        dev = np.abs(diff.data).max()
        if dev > tol:
            raise ValueError(f"operator is not Hermitian: max deviation {dev:.3e}")
    return ((op + op.conj().T) * 0.5).tocsr()


def apply(op: SparseOperator, state: np.ndarray) -> np.ndarray:
    """Matrix-vector kernel; dimensions must agree."""
    if op.shape[1] != state.shape[0]:
        raise ValueError(f"dimension mismatch: operator {op.shape}, state {state.shape}")
    return op @ state


def hermiticity_defect(op: SparseOperator) -> float:
    diff = op - op.conj().T
    return float(np.abs(diff.data).max()) if diff.nnz else 0.0
