"""Topology geometry, path-loss variances and seeded channel sampling.

All links are flat Rayleigh: each coefficient is drawn circularly-symmetric
complex Gaussian, zero mean, with a per-branch variance given by the
distance power law ``mu = d**(-alpha)`` (unit reference distance, distances
in meters).  Sampling uses numpy's Philox counter-based generator so that a
given seed reproduces the same realization on every platform.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

# Positions closer than this make the power-law variance blow up.
MIN_NODE_SEPARATION = 0.1

Point = tuple[float, float]


@dataclass(frozen=True)
class SystemParams:
    """Global scalar parameters shared by every scheme.

    Powers are in watts (convert from dBW with :func:`dbw_to_watts`),
    ``pr_t`` is the per-slot transmission probability, ``epsilon`` the
    covertness slack and ``n_symbols`` the slot length used by the Monte
    Carlo detection validator.
    """

    P: float = 10.0
    sigma2: float = 1e-5
    sigma2_w: float = 1e-5
    N_s: int = 16
    pr_t: float = 0.5
    epsilon: float = 0.1
    alpha: float = 4.0
    n_symbols: int = 10_000

    def __post_init__(self):
        if self.P <= 0:
            raise ValueError("P must be positive")
        if self.sigma2 <= 0 or self.sigma2_w <= 0:
            raise ValueError("noise variances must be positive")
        if not 0 < self.epsilon < 1:
            raise ValueError("epsilon must lie in (0, 1)")
        if not 0 <= self.pr_t <= 1:
            raise ValueError("pr_t must lie in [0, 1]")
        if self.N_s < 1:
            raise ValueError("N_s must be at least 1")
        if self.alpha <= 0:
            raise ValueError("alpha must be positive")
        if self.n_symbols < 1:
            raise ValueError("n_symbols must be at least 1")


def dbw_to_watts(p_dbw: float) -> float:
    """-50 dBW -> 1e-5 W, 10 dBW -> 10 W."""
    return 10.0 ** (p_dbw / 10.0)


def watts_to_dbw(p_watts: float) -> float:
    if p_watts <= 0:
        raise ValueError("power must be positive")
    return 10.0 * math.log10(p_watts)


@dataclass(frozen=True)
class Topology:
    """2-D node placement: one source, one destination, J relays, W Willies."""

    source: Point = (-5.0, 0.0)
    destination: Point = (5.0, 0.0)
    relays: tuple[Point, ...] = ((0.0, 0.0),)
    willies: tuple[Point, ...] = ((0.0, -5.0),)

    def __post_init__(self):
        nodes = [self.source, self.destination, *self.relays, *self.willies]
        for i in range(len(nodes)):
            for j in range(i + 1, len(nodes)):
                if math.dist(nodes[i], nodes[j]) < MIN_NODE_SEPARATION:
                    raise ValueError(
                        f"nodes {nodes[i]} and {nodes[j]} are closer than "
                        f"{MIN_NODE_SEPARATION} m"
                    )

    @property
    def n_relays(self) -> int:
        return len(self.relays)

    @property
    def n_willies(self) -> int:
        return len(self.willies)


@dataclass(frozen=True)
class LinkVariances:
    """Per-branch channel variances for every link in the network.

    Arrays are indexed by relay j and/or Willie w:
    ``sr[j]``, ``rd[j]``, ``sw[w]``, ``dw[w]``, ``rw[j, w]`` and the
    relay-to-relay matrix ``rr[i, j]`` (diagonal unused, kept at 0).
    ``sd`` is the direct source-destination branch variance.
    """

    sr: np.ndarray
    rd: np.ndarray
    sw: np.ndarray
    dw: np.ndarray
    rw: np.ndarray
    rr: np.ndarray
    sd: float

    def __post_init__(self):
        for name in ("sr", "rd", "sw", "dw", "rw"):
            arr = getattr(self, name)
            if arr.size and arr.min() <= 0:
                raise ValueError(f"variance array {name} must be positive")
        if self.sd <= 0:
            raise ValueError("variance sd must be positive")
        off = self.rr[~np.eye(self.rr.shape[0], dtype=bool)]
        if off.size and off.min() <= 0:
            raise ValueError("relay-relay variances must be positive")

    @property
    def n_relays(self) -> int:
        return self.sr.shape[0]

    @property
    def n_willies(self) -> int:
        return self.sw.shape[0]


def link_variances(topology: Topology, alpha: float = 4.0) -> LinkVariances:
    """Map node geometry to per-branch variances via ``mu = d**(-alpha)``."""
    if alpha <= 0:
        raise ValueError("alpha must be positive")

    def mu(a: Point, b: Point) -> float:
        d = math.dist(a, b)
        if d < MIN_NODE_SEPARATION:
            raise ValueError("coincident or near-coincident nodes")
        return d ** (-alpha)

    s, d = topology.source, topology.destination
    relays, willies = topology.relays, topology.willies
    J, W = len(relays), len(willies)
    rr = np.zeros((J, J))
    for i in range(J):
        for j in range(J):
            if i != j:
                rr[i, j] = mu(relays[i], relays[j])
    return LinkVariances(
        sr=np.array([mu(s, r) for r in relays]),
        rd=np.array([mu(r, d) for r in relays]),
        sw=np.array([mu(s, w) for w in willies]),
        dw=np.array([mu(d, w) for w in willies]),
        rw=np.array([[mu(r, w) for w in willies] for r in relays]),
        rr=rr,
        sd=mu(s, d),
    )


@dataclass(frozen=True)
class ChannelRealization:
    """One joint draw of all channel coefficients for a topology.

    ``h_sr[j]`` and ``h_sw[w]`` are length-``N_s`` vectors (multi-antenna
    source); the remaining links are scalars.  ``h_rr[i, j]`` is the channel
    from relay i to relay j (diagonal zero).  ``seed`` records the RNG seed
    that produced the draw.
    """

    h_sr: np.ndarray
    h_sw: np.ndarray
    h_rd: np.ndarray
    h_rw: np.ndarray
    h_dw: np.ndarray
    h_rr: np.ndarray
    h_sd: np.ndarray
    seed: int = field(compare=False, default=0)

    @property
    def n_relays(self) -> int:
        return self.h_sr.shape[0]

    @property
    def n_willies(self) -> int:
        return self.h_sw.shape[0]


def rng_from_seed(seed) -> np.random.Generator:
    """Philox generator keyed by ``seed`` (an int or tuple of ints).

    Philox is counter-based with a published algorithm, so streams are
    reproducible across platforms; tuples let callers derive independent
    per-trial streams from ``(master_seed, trial_index)``.
    """
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed)))


def _cn_sample(rng: np.random.Generator, variance, shape) -> np.ndarray:
    scale = np.sqrt(np.asarray(variance) / 2.0)
    return scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def sample_channels(
    variances: LinkVariances, params: SystemParams, seed
) -> ChannelRealization:
    """Draw one i.i.d. complex-Gaussian realization of every link.

    Deterministic given ``seed``; each coefficient has zero mean and the
    configured per-branch variance.
    """
    rng = rng_from_seed(seed)
    J, W, N_s = variances.n_relays, variances.n_willies, params.N_s
    h_sr = _cn_sample(rng, variances.sr[:, None], (J, N_s))
    h_sw = _cn_sample(rng, variances.sw[:, None], (W, N_s))
    h_rd = _cn_sample(rng, variances.rd, (J,))
    h_rw = _cn_sample(rng, variances.rw, (J, W))
    h_dw = _cn_sample(rng, variances.dw, (W,))
    h_rr = _cn_sample(rng, np.where(variances.rr > 0, variances.rr, 0.0), (J, J))
    h_rr[np.diag_indices(J)] = 0.0
    h_sd = _cn_sample(rng, variances.sd, (N_s,))
    seed_int = seed if isinstance(seed, int) else hash(tuple(np.ravel(seed)))
    return ChannelRealization(
        h_sr=h_sr, h_sw=h_sw, h_rd=h_rd, h_rw=h_rw,
        h_dw=h_dw, h_rr=h_rr, h_sd=h_sd, seed=seed_int,
    )


def mrt_weights(h: np.ndarray) -> np.ndarray:
    """Maximum-ratio transmission beamformer ``w = h / ||h||``.

    Satisfies ``||w|| = 1`` and ``w^H h = ||h||`` (real, nonnegative).
    """
    norm = np.linalg.norm(h)
    if norm == 0:
        raise ValueError("cannot beamform on a zero channel vector")
    return h / norm


def lsma_leakage_variance(mu_sw: float) -> float:
    """Mean of the exponential approximation of the beamforming leakage.

    For a large antenna array the leakage power ``|w^H h_sw|^2`` seen by an
    unintended receiver concentrates to an exponential random variable whose
    mean is simply the per-branch variance of that receiver's channel.
    """
    if mu_sw <= 0:
        raise ValueError("mu_sw must be positive")
    return mu_sw


def sample_lsma_leakage(mu_sw: float, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw leakage powers from the exponential approximation."""
    return rng.exponential(lsma_leakage_variance(mu_sw), size)


def lsma_sinr_si(params: SystemParams, mu_si: float) -> float:
    """Large-array deterministic approximation ``N_s * P * mu_si / sigma2``."""
    if mu_si <= 0:
        raise ValueError("mu_si must be positive")
    return params.N_s * params.P * mu_si / params.sigma2
