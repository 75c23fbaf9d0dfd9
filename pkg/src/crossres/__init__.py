"""Simulation and analysis toolkit for cross-resonance gate architectures.

The package models fixed-frequency transmons coupled through capacitors,
bus resonators, multipath couplers, or lightweight resonator couplers.
It extracts effective ZZ and XY couplings from exact diagonalization,
tunes up direct CX gates by time-domain simulation, scans dressed spectra
under the CR drive, and audits static and dynamic frequency collisions
on multiqubit lattices.
"""

__version__ = "0.1.0"

from .device import (
    CouplingSpec,
    Device,
    ResonatorSpec,
    TransmonSpec,
    build_device,
    pair_preset,
    unit_preset,
)
from .lattice import (
    DisorderSpec,
    StarkMitigation,
    heavy_hex,
    run_disorder_ensemble,
    run_stark_mitigation,
    sample_disorder,
)

__all__ = [
    "CouplingSpec",
    "Device",
    "DisorderSpec",
    "ResonatorSpec",
    "StarkMitigation",
    "TransmonSpec",
    "build_device",
    "heavy_hex",
    "pair_preset",
    "run_disorder_ensemble",
    "run_stark_mitigation",
    "sample_disorder",
    "unit_preset",
    "__version__",
]
