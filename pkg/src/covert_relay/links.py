"""Two-phase amplify-and-forward SINR algebra and secrecy rates.

Phase 1: the source beamforms data toward the relay with power ``rho * P``
while the destination jams with ``(1 - rho) * P``.  Phase 2: the relay
forwards with power ``(1 - xi) * P`` while the source jams with ``xi * P``
from a single antenna.  The destination cancels its own phase-1 jamming;
the untrusted relay cannot.

``mode="exact"`` keeps the additive-noise "+1" terms in the SINR
denominators; ``mode="high_snr"`` drops them, which is the form the power
allocator optimizes.  Rates are in bits per channel use (base-2 logs).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

PSI0 = 0  # source silent this slot
PSI1 = 1  # source transmitting


@dataclass(frozen=True)
class PowerSplit:
    """Decision variables: phase-1 source fraction and phase-2 jam fraction."""

    rho: float
    xi: float

    def __post_init__(self):
        if not 0 <= self.rho <= 1:
            raise ValueError(f"rho={self.rho} outside [0, 1]")
        if not 0 <= self.xi <= 1:
            raise ValueError(f"xi={self.xi} outside [0, 1]")


@dataclass(frozen=True)
class LinkGains:
    """Instantaneous SNR-like ratios of the selected source-relay-destination path."""

    gamma_sr: float
    gamma_rd: float

    def __post_init__(self):
        if self.gamma_sr < 0 or self.gamma_rd < 0:
            raise ValueError("link gains must be nonnegative")

    @property
    def varsigma(self) -> float:
        return self.gamma_sr / self.gamma_rd


def amplification_factor(
    split: PowerSplit,
    P: float,
    h_rd_abs2: float,
    w_h_sr_abs2: float,
    sigma2: float,
    hypothesis: int = PSI1,
) -> float:
    """Relay gain normalizing the phase-1 reception to power ``(1 - xi) * P``.

    Under the null hypothesis only the destination's jamming (plus noise)
    reaches the relay; under the alternative the beamformed data adds
    ``rho * P * |w^H h_sr|^2``.
    """
    if split.xi > 1:
        raise ValueError("xi > 1 would require negative relay power")
    denom = (1 - split.rho) * P * h_rd_abs2 + sigma2
    if hypothesis == PSI1:
        denom += split.rho * P * w_h_sr_abs2
    if denom <= 0:
        raise ValueError("nonpositive received power at the relay")
    return math.sqrt((1 - split.xi) * P / denom)


def sinr_destination(
    split: PowerSplit,
    gains: LinkGains,
    mode: str = "exact",
    hypothesis: int = PSI1,
) -> float:
    """End-to-end SINR of the forwarded data at the destination."""
    if hypothesis == PSI0 or split.rho == 0:
        return 0.0
    rho, xi = split.rho, split.xi
    if mode == "exact":
        denom = rho * gains.gamma_sr + (2 - rho - xi) * gains.gamma_rd + 1
        return rho * gains.gamma_sr * gains.gamma_rd * (1 - xi) / denom
    if mode == "high_snr":
        vs = gains.varsigma
        denom = rho * vs + 2 - rho - xi
        if denom <= 0:
            raise ValueError("degenerate split: high-SNR denominator <= 0")
        return rho * vs * gains.gamma_rd * (1 - xi) / denom
    raise ValueError(f"unknown mode {mode!r}")


def sinr_relay(
    split: PowerSplit,
    gains: LinkGains,
    mode: str = "exact",
    hypothesis: int = PSI1,
) -> float:
    """Eavesdropping SINR at the untrusted relay during phase 1.

    In high-SNR mode the relay's thermal noise is ignored (worst case for
    secrecy); ``rho = 1`` then means zero jamming and the function returns
    ``inf``.
    """
    if hypothesis == PSI0 or split.rho == 0:
        return 0.0
    rho = split.rho
    if mode == "exact":
        return rho * gains.gamma_sr / ((1 - rho) * gains.gamma_rd + 1)
    if mode == "high_snr":
        if rho == 1:
            return math.inf
        return rho * gains.varsigma / (1 - rho)
    raise ValueError(f"unknown mode {mode!r}")


def secrecy_rate_from_sinrs(
    gamma_d: float, gamma_r: float, pr_t: float, clamp: bool = True
) -> float:
    """``(pr_t / 2) * [log2(1 + gamma_d) - log2(1 + gamma_r)]``, clamped at 0."""
    rate = 0.5 * pr_t * (math.log2(1 + gamma_d) - math.log2(1 + gamma_r))
    return max(rate, 0.0) if clamp else rate


def secrecy_rate(
    split: PowerSplit,
    gains: LinkGains,
    pr_t: float,
    clamp: bool = True,
    mode: str = "exact",
) -> float:
    """Two-hop secrecy rate in bits per channel use.

    The unclamped form is what the optimizer maximizes (the positive-part
    operator is ignorable there because the optimum is nonnegative); the
    clamped form is the reported metric.
    """
    gamma_d = sinr_destination(split, gains, mode=mode)
    gamma_r = sinr_relay(split, gains, mode=mode)
    if math.isinf(gamma_r):
        return 0.0 if clamp else -math.inf
    return secrecy_rate_from_sinrs(gamma_d, gamma_r, pr_t, clamp=clamp)


def nonselected_relay_sinrs(
    split: PowerSplit,
    gamma_sj_bf: float,
    gamma_jd: float,
    gamma_si: float,
    gamma_id: float,
    gamma_ij: float,
    gamma_sj: float,
    mode: str = "exact",
    hypothesis: int = PSI1,
) -> tuple[float, float]:
    """Eavesdropping SINRs of a non-selected relay j in both phases.

    Phase 1: relay j overhears the beam aimed at the selected relay i
    (``gamma_sj_bf`` is the leaked beamformed gain) while being jammed by
    the destination.  Phase 2: relay j overhears relay i's forwarded
    mixture while the source jams it through the scalar channel
    ``gamma_sj``.
    """
    if hypothesis == PSI0:
        return 0.0, 0.0
    rho, xi = split.rho, split.xi
    if mode == "exact":
        g1 = rho * gamma_sj_bf / ((1 - rho) * gamma_jd + 1)
    elif mode == "high_snr":
        g1 = math.inf if rho == 1 else rho * (gamma_sj_bf / gamma_jd) / (1 - rho)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    denom = (1 - xi) * gamma_ij * (1 + (1 - rho) * gamma_id) + (
        xi * gamma_sj + 1
    ) * (rho * gamma_si + (1 - rho) * gamma_id + 1)
    g2 = rho * gamma_si * gamma_ij * (1 - xi) / denom
    return g1, g2


def leakage_max(
    gamma_j1: np.ndarray | list, gamma_i: float, gamma_j2: np.ndarray | list
) -> float:
    """Worst information leakage over non-colluding relays in both phases."""
    if gamma_i is None:
        raise ValueError("a selected relay is required")
    candidates = [float(gamma_i)]
    candidates.extend(float(g) for g in np.atleast_1d(gamma_j1))
    candidates.extend(float(g) for g in np.atleast_1d(gamma_j2))
    return max(candidates)
