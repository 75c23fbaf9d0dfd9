"""Closed-form estimators for couplings, drive prefactors, and collisions.

Every function here is a pure algebraic map used for initialization of the
numeric pipelines, for cross-checks against exact diagonalization, and for
collision bound arithmetic. Inputs and outputs are linear frequencies: MHz
unless a name says otherwise (zz values are returned in kHz because that is
the natural scale for the quantity).

Conventions:

- delta   = w_control - w_target (qubit-qubit detuning)
- delta_q = w_qubit - w_resonator (qubit-resonator detuning)
- For the ac-Stark shift, delta = w_qubit - w_drive.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import least_squares

# Denominators closer to a pole than this (in MHz) are refused rather than
# silently returning huge values; sweep drivers convert this into markers.
POLE_RADIUS_MHZ = 1e-3

COLLISION_COUPLING_KINDS = ("static", "linear", "quadratic")


class PoleError(ValueError):
    """A perturbative denominator sits within the pole exclusion radius."""

    def __init__(self, name: str, value: float):
        self.denominator = name
        self.value = value
        super().__init__(
            f"denominator {name} = {value:.6g} MHz is inside the "
            f"{POLE_RADIUS_MHZ:g} MHz pole exclusion radius"
        )


def _guard(name: str, value: float) -> float:
    if abs(value) < POLE_RADIUS_MHZ:
        raise PoleError(name, value)
    return value


@dataclass(frozen=True)
class CouplingEstimate:
    """Second-order coupling estimate for one qubit pair.

    zz_total is the sum of the three two-excitation contributions
    (zz_parts, all in kHz); j values are in MHz.
    """

    j_xy: float
    zz_total: float
    zz_parts: Tuple[float, float, float]
    j_direct: float
    j_indirect: float

    def __post_init__(self) -> None:
        if not all(math.isfinite(p) for p in self.zz_parts):
            raise ValueError("zz parts must be finite")
        if abs(self.zz_total - sum(self.zz_parts)) > 1e-9 * max(1.0, abs(self.zz_total)):
            raise ValueError("zz_total must equal the sum of its parts")


@dataclass(frozen=True)
class CrPrefactors:
    """Effective drive prefactors on the target qubit.

    mu_ix and mu_zx are dimensionless transfer factors of the CR drive onto
    the target; v_zx = (omega/2) * mu_zx is the resulting ZX rate in MHz
    for the drive amplitude the factors were computed with.
    """

    mu_ix: float
    mu_zx: float
    v_zx: float


@dataclass(frozen=True)
class CollisionModel:
    """Effective two-level avoided-crossing model versus drive amplitude.

    gap(omega) = sqrt((delta0 + stark_coefficient * omega^2)^2 + lam(omega)^2)
    with lam constant (static collision) or proportional to omega or omega^2
    (dynamic one- and two-photon collisions).
    """

    delta0: float
    stark_coefficient: float
    coupling_kind: str
    coupling_value: float

    def __post_init__(self) -> None:
        if self.coupling_kind not in COLLISION_COUPLING_KINDS:
            raise ValueError(f"coupling_kind must be one of {COLLISION_COUPLING_KINDS}")

    def detuning_at(self, omega: float) -> float:
        return self.delta0 + self.stark_coefficient * omega**2

    def coupling_at(self, omega: float) -> float:
        if self.coupling_kind == "static":
            return self.coupling_value
        if self.coupling_kind == "linear":
            return self.coupling_value * omega
        return self.coupling_value * omega**2

    def gap_at(self, omega: float) -> float:
        return math.hypot(self.detuning_at(omega), self.coupling_at(omega))

    def crossing_amplitude(self) -> Optional[float]:
        """Amplitude where the detuning term vanishes, if one exists."""
        if self.stark_coefficient == 0.0:
            return 0.0 if self.delta0 == 0.0 else None
        ratio = -self.delta0 / self.stark_coefficient
        return math.sqrt(ratio) if ratio >= 0 else None


def xy_indirect(g_r1: float, g_r2: float, delta_1: float, delta_2: float) -> float:
    """Resonator-mediated XY coupling (g_r1 g_r2 / 2)(1/delta_1 + 1/delta_2)."""
    if g_r1 == 0.0 or g_r2 == 0.0:
        return 0.0
    _guard("delta_1", delta_1)
    _guard("delta_2", delta_2)
    return 0.5 * g_r1 * g_r2 * (1.0 / delta_1 + 1.0 / delta_2)


def zz_from_bracket(
    j_xy: float,
    delta: float,
    alpha_1: float,
    alpha_2: float,
    delta_sum: Optional[float] = None,
) -> float:
    """ZZ strength in kHz from the bracket form.

    zz = 2 j^2 [1/(delta - alpha_2) - 1/(delta + alpha_1) + 1/delta_sum],
    with the last term dropped when delta_sum is None (direct coupling only,
    where no resonator level participates and no ZZ-free root exists).
    """
    b1 = 1.0 / _guard("delta - alpha_2", delta - alpha_2)
    b2 = 1.0 / _guard("delta + alpha_1", delta + alpha_1)
    bracket = b1 - b2
    if delta_sum is not None:
        bracket += 1.0 / _guard("delta_1 + delta_2", delta_sum)
    return 2.0 * j_xy**2 * bracket * 1e3


def estimate_couplings(
    g_r1: float,
    g_r2: float,
    g_12: float,
    delta_1: Optional[float],
    delta_2: Optional[float],
    delta: float,
    alpha_1: float,
    alpha_2: float,
) -> CouplingEstimate:
    """Second-order XY and ZZ estimate for a coupled qubit pair.

    The ZZ strength is assembled from the three two-excitation channels:
    the |200>-like channel driven by the full XY coupling through
    1/(delta + alpha_1), the |020>-like channel through 1/(delta - alpha_2),
    and the resonator channel driven by the indirect coupling alone through
    1/(delta_1 + delta_2). With g_12 = 0 the sum reduces to the bracket form
    of ``zz_from_bracket`` with the resonator term; with g_r = 0 it reduces
    to the direct-coupling form without it.
    """
    mediated = g_r1 != 0.0 and g_r2 != 0.0
    if mediated and (delta_1 is None or delta_2 is None):
        raise ValueError("resonator-mediated estimate needs both qubit-resonator detunings")
    j_indirect = xy_indirect(g_r1, g_r2, delta_1, delta_2) if mediated else 0.0
    j_xy = g_12 + j_indirect

    j_002 = math.sqrt(2.0) * j_xy
    j_200 = math.sqrt(2.0) * j_xy
    j_020 = math.sqrt(2.0) * j_indirect

    zz_200 = -(j_002**2) / _guard("delta + alpha_1", delta + alpha_1) * 1e3
    zz_020 = (j_200**2) / _guard("delta - alpha_2", delta - alpha_2) * 1e3
    if mediated:
        zz_002 = (j_020**2) / _guard("delta_1 + delta_2", delta_1 + delta_2) * 1e3
    else:
        zz_002 = 0.0

    parts = (zz_200, zz_020, zz_002)
    return CouplingEstimate(
        j_xy=j_xy,
        zz_total=sum(parts),
        zz_parts=parts,
        j_direct=g_12,
        j_indirect=j_indirect,
    )


def cr_prefactors(j_xy: float, delta: float, alpha_1: float, omega: float) -> CrPrefactors:
    """Drive transfer factors onto the target and the resulting ZX rate.

    mu_ix = -j / (alpha_1 + delta), mu_zx = j alpha_1 / (delta (alpha_1 + delta)),
    v_zx = (omega / 2) mu_zx. alpha_1 is the control anharmonicity. In the
    strongly anharmonic limit mu_zx tends to j/delta and mu_ix to zero.
    """
    _guard("delta", delta)
    _guard("alpha_1 + delta", alpha_1 + delta)
    mu_ix = -j_xy / (alpha_1 + delta)
    mu_zx = j_xy * alpha_1 / (delta * (alpha_1 + delta))
    return CrPrefactors(mu_ix=mu_ix, mu_zx=mu_zx, v_zx=0.5 * omega * mu_zx)


def ac_stark(omega: float, delta: float, alpha: float) -> float:
    """Off-resonant drive shift: alpha omega^2 / (2 delta (delta + alpha)).

    delta = w_qubit - w_drive. Returned in MHz; lowest order in the drive
    amplitude, so trust degrades once |shift| approaches |delta|.
    """
    if omega == 0.0:
        return 0.0
    _guard("delta", delta)
    _guard("delta + alpha", delta + alpha)
    return alpha * omega**2 / (2.0 * delta * (delta + alpha))


def two_photon_rates(
    g_rq: float, omega: float, delta_q: float, alpha_q: float
) -> Tuple[float, float]:
    """Drive-activated two-photon rates onto an attached resonator, in MHz.

    Returns (v_00_11, v_10_21): the |00> to |11> rate of the resonator-qubit
    pair and the corresponding |10> to |21> rate, both second order in the
    drive. delta_q = w_qubit - w_resonator.
    """
    if omega == 0.0:
        return (0.0, 0.0)
    d = _guard("delta_q", delta_q)
    da = _guard("delta_q + alpha_q", delta_q + alpha_q)
    d2a = _guard("delta_q + 2 alpha_q", delta_q + 2.0 * alpha_q)
    v_00_11 = 2.0 * g_rq * omega**2 * alpha_q / (da * d**2)
    v_10_21 = (-math.sqrt(2.0) * omega / da) * (
        -4.0 * g_rq * omega / da + g_rq * omega / d + 3.0 * g_rq * omega / d2a
    )
    return (v_00_11, v_10_21)


def _fit_one_model(
    amplitudes: np.ndarray, gaps: np.ndarray, kind: str, delta0: float, c0: float, lam0: float
) -> Tuple[float, np.ndarray]:
    def lam(omega: np.ndarray, k: float) -> np.ndarray:
        if kind == "static":
            return np.full_like(omega, k)
        if kind == "linear":
            return k * omega
        return k * omega**2

    def residuals(p: np.ndarray) -> np.ndarray:
        d0, c, k = p
        model = (d0 + c * amplitudes**2) ** 2 + lam(amplitudes, k) ** 2
        return model - gaps**2

    scale = max(float(np.max(amplitudes)), 1.0)
    k0 = {"static": lam0, "linear": lam0 / scale, "quadratic": lam0 / scale**2}[kind]
    sol = least_squares(residuals, x0=np.array([delta0, c0, k0]), method="lm", max_nfev=5000)
    return float(np.sum(sol.fun**2)), sol.x


def fit_collision_model(
    scan, level_pair: Tuple[str, str], kind: str = "auto"
) -> CollisionModel:
    """Fit the avoided-crossing of one tracked level pair in a dressed scan.

    With ``kind="auto"`` a constant, linear, and quadratic amplitude
    dependence of the coupling are all tried and the best fit by residual is
    kept. The squared gap of every member of that family is the same quartic
    polynomial in the amplitude, so a noiseless single scan cannot separate
    them; ties within fit tolerance resolve to the lowest polynomial order,
    and callers who know the collision mechanism should pass the kind
    explicitly. Raises if the scan holds no anticrossing for the pair.
    """
    if kind != "auto" and kind not in COLLISION_COUPLING_KINDS:
        raise ValueError(f"kind must be 'auto' or one of {COLLISION_COUPLING_KINDS}")
    hits = [a for a in scan.anticrossings if set(a.levels) == set(level_pair)]
    if not hits:
        raise ValueError(f"no anticrossing detected for pair {level_pair}")
    amplitudes = np.asarray(scan.amplitudes, dtype=float)
    gaps = np.asarray(scan.gap_series(level_pair), dtype=float)

    crossing = hits[0]
    delta0 = float(gaps[0])
    c0 = -delta0 / crossing.amplitude**2 if crossing.amplitude > 0 else 0.0
    lam0 = max(float(crossing.gap), 1e-6)

    candidates = kind if kind != "auto" else COLLISION_COUPLING_KINDS
    fits = []
    for trial in ([candidates] if isinstance(candidates, str) else candidates):
        sse, params = _fit_one_model(amplitudes, gaps, trial, delta0, c0, lam0)
        fits.append((sse, COLLISION_COUPLING_KINDS.index(trial), trial, params))
    tie = min(f[0] for f in fits) + 1e-10 * float(np.sum(gaps**4))
    _, _, kind, (d0, c, k) = min((f for f in fits if f[0] <= tie), key=lambda f: f[1])
    # The gap is even under (delta0, c) -> (-delta0, -c) and k -> -k; pick
    # the representative with delta0 >= 0 and k >= 0.
    if d0 < 0:
        d0, c = -d0, -c
    return CollisionModel(
        delta0=float(d0),
        stark_coefficient=float(c),
        coupling_kind=kind,
        coupling_value=float(abs(k)),
    )
