"""Single-phase benchmark: MRT data beamforming plus null-space artificial
noise, with the relays acting as pure eavesdroppers.

The source splits its power between the data beam (``rho * P``, aimed at
the destination) and a jamming vector ``z`` constrained to the orthogonal
complement of the destination channel, so the destination sees no jamming
at all while every relay does.  Covertness constrains ``rho`` alone: both
signal and jamming leave the same antenna array, so the observer-side
channel variance cancels from the detection certificate.

The optimizer alternates a 1-D search on ``rho`` with projected-gradient
steps on the jamming direction, the latter driven by the first-order
relaxation of the quadratic-over-linear eavesdropper constraints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._search import golden_max
from .channel import ChannelRealization, SystemParams, mrt_weights
from .detection import _bisect_threshold_bound, min_error_sum_ratio

ORTHOGONALITY_TOL = 1e-10
RHO_MARGIN = 1e-9


@dataclass(frozen=True)
class JammingVector:
    """Artificial-noise vector with its null-space basis.

    ``z`` carries power ``(1 - rho) * P`` and is orthogonal to the
    destination channel; ``basis`` is the orthonormal complement used to
    parametrize it.
    """

    z: np.ndarray
    basis: np.ndarray

    def validate(self, h_sd: np.ndarray, power: float) -> None:
        znorm = np.linalg.norm(self.z)
        if abs(np.vdot(self.z, h_sd)) > ORTHOGONALITY_TOL * znorm * np.linalg.norm(h_sd):
            raise ValueError("jamming vector leaks into the destination channel")
        if abs(znorm**2 - power) > ORTHOGONALITY_TOL * max(power, 1.0):
            raise ValueError("jamming vector power mismatch")


@dataclass(frozen=True)
class DirectResult:
    rho: float
    z: JammingVector
    rate: float
    nu: float
    iterations: int
    trajectory: tuple[float, ...]
    feasible: bool = True


def null_space_basis(h_sd: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the orthogonal complement of ``h_sd``.

    Householder QR of the single-column matrix gives ``N_s - 1``
    deterministic orthonormal columns, each orthogonal to ``h_sd``.
    """
    h_sd = np.asarray(h_sd, dtype=complex)
    if h_sd.ndim != 1 or h_sd.size < 2:
        raise ValueError("null-space jamming needs at least 2 source antennas")
    if np.linalg.norm(h_sd) == 0:
        raise ValueError("destination channel must be nonzero")
    q, _ = np.linalg.qr(h_sd.reshape(-1, 1), mode="complete")
    return q[:, 1:]


def direct_sinrs(
    rho: float,
    z: np.ndarray,
    h_sd: np.ndarray,
    h_relays: np.ndarray,
    params: SystemParams,
) -> tuple[float, np.ndarray]:
    """Destination SINR and per-relay eavesdropping SINRs.

    ``h_relays`` has one row per relay (empty array for none).  The
    destination term is evaluated with the actual ``z``; orthogonality
    makes it equal ``rho * P * ||h_sd||^2 / sigma2``.
    """
    P, s2 = params.P, params.sigma2
    w = mrt_weights(h_sd)
    gamma_d = rho * P * abs(np.vdot(w, h_sd)) ** 2 / (abs(np.vdot(z, h_sd)) ** 2 + s2)
    h_relays = np.atleast_2d(h_relays) if np.size(h_relays) else np.empty((0, h_sd.size))
    gammas = np.array(
        [
            rho * P * abs(np.vdot(w, h_j)) ** 2 / (abs(np.vdot(z, h_j)) ** 2 + s2)
            for h_j in h_relays
        ]
    )
    return float(gamma_d), gammas


def direct_secrecy_rate(
    rho: float,
    z: np.ndarray,
    h_sd: np.ndarray,
    h_relays: np.ndarray,
    params: SystemParams,
    clamp: bool = True,
) -> float:
    """Single-phase secrecy rate ``pr_t * [log2(1+g_D) - log2(1+max_j g_j)]``.

    No relays means no eavesdropper: the max defaults to zero SINR.
    """
    gamma_d, gammas = direct_sinrs(rho, z, h_sd, h_relays, params)
    worst = float(gammas.max()) if gammas.size else 0.0
    rate = params.pr_t * (math.log2(1 + gamma_d) - math.log2(1 + worst))
    return max(rate, 0.0) if clamp else rate


def direct_covert_bound(epsilon: float, P: float) -> float:
    """Upper bound on ``rho`` from the covert certificate.

    Signal and jamming both originate at the source, so the Willie-side
    variance cancels and the certificate depends on ``rho/(1-rho)`` alone;
    the bound is found by bisection and is itself certified covert.
    """
    if not 0 < epsilon < 1:
        raise ValueError("epsilon must lie in (0, 1)")
    if P <= 0:
        raise ValueError("P must be positive")

    def covert(rho: float) -> bool:
        return min_error_sum_ratio(rho / (1 - rho)) >= 1 - epsilon

    if covert(1 - RHO_MARGIN):
        return 1.0
    return _bisect_threshold_bound(covert, RHO_MARGIN, 1 - RHO_MARGIN, keep_true_side="lo")


@dataclass(frozen=True)
class TaylorSurrogate:
    """Affine lower bound of ``(z^H H z + sigma2) / nu`` at ``(z_t, nu_t)``.

    ``H = h h^H`` is the rank-one outer product of the eavesdropper
    channel.  Quadratic-over-linear is jointly convex, so its tangent plane
    sits below it everywhere and touches at the anchor.
    """

    h: np.ndarray
    z_t: np.ndarray
    nu_t: float
    kappa: complex  # z_t^H h
    q: float        # z_t^H H z_t = |kappa|^2
    sigma2: float

    def __call__(self, z: np.ndarray, nu: float) -> float:
        # z_t^H H z = kappa * (h^H z) with h^H z = vdot(h, z)
        lin = 2 * (self.kappa * np.vdot(self.h, z)).real
        return (
            2 * self.sigma2 / self.nu_t
            + lin / self.nu_t
            - (self.q + self.sigma2) * nu / self.nu_t**2
        )


def taylor_relax(z_t: np.ndarray, nu_t: float, h: np.ndarray, sigma2: float) -> TaylorSurrogate:
    """First-order expansion of the eavesdropper constraint's right side."""
    if nu_t <= 0:
        raise ValueError("anchor nu must be positive")
    kappa = complex(np.vdot(z_t, h))
    return TaylorSurrogate(
        h=np.asarray(h, dtype=complex),
        z_t=np.asarray(z_t, dtype=complex),
        nu_t=float(nu_t),
        kappa=kappa,
        q=abs(kappa) ** 2,
        sigma2=sigma2,
    )


@dataclass(frozen=True)
class DirectConfig:
    rate_tol: float = 1e-6
    max_iters: int = 200
    grad_steps: int = 4
    rho_tol: float = 1e-9


def _unclamped_rate(rho, u, c2, bu_abs2, a, gd_coef, params):
    """Rate for a given rho and fixed jamming direction (precomputed terms)."""
    gamma_d = rho * gd_coef
    if a.size:
        gj = rho * params.P * a / (c2 * (1 - rho) * bu_abs2 + params.sigma2)
        worst = float(gj.max())
    else:
        worst = 0.0
    return params.pr_t * (math.log2(1 + gamma_d) - math.log2(1 + worst))


def direct_optimize(
    realization: ChannelRealization,
    params: SystemParams,
    config: DirectConfig = DirectConfig(),
) -> DirectResult:
    """Alternating maximization of the direct-transmission secrecy rate.

    The jamming vector is parametrized as ``z = sqrt((1-rho) P) B u`` with
    ``u`` a unit vector, which enforces both the power equality and the
    null-space constraint by construction.  Each outer iteration
    (i) re-anchors the Taylor relaxation of the eavesdropper constraints at
    the current ``(z, nu)``, (ii) improves ``u`` by projected-gradient
    ascent on the relaxed worst-eavesdropper margin and re-optimizes
    ``rho`` by golden section, (iii) resets ``nu`` to the exact
    ``1 / (1 + max_j gamma_j)``.  A candidate is only accepted if the true
    rate does not decrease, so the trajectory ascends monotonically.
    """
    h_sd = realization.h_sd
    if h_sd.size < 2:
        raise ValueError("direct scheme needs at least 2 source antennas")
    h_relays = realization.h_sr  # relays overhear the direct transmission
    J = h_relays.shape[0]
    P, s2 = params.P, params.sigma2
    basis = null_space_basis(h_sd)
    rho_ub = direct_covert_bound(params.epsilon, P)
    rho_ub = min(rho_ub, 1 - RHO_MARGIN)
    if rho_ub <= RHO_MARGIN:
        z = JammingVector(z=np.zeros_like(h_sd), basis=basis)
        return DirectResult(0.0, z, 0.0, 1.0, 0, (), feasible=False)

    w = mrt_weights(h_sd)
    gd_coef = P * abs(np.vdot(w, h_sd)) ** 2 / s2  # gamma_D / rho
    b = np.array([basis.conj().T @ h_j for h_j in h_relays])  # (J, N_s-1)
    a = np.array([abs(np.vdot(w, h_j)) ** 2 for h_j in h_relays])

    # Deterministic start: aim the jamming at the aggregate relay leakage.
    if J:
        u = np.sum(b, axis=0)
        if np.linalg.norm(u) == 0:
            u = np.zeros(basis.shape[1], dtype=complex)
            u[0] = 1.0
    else:
        u = np.zeros(basis.shape[1], dtype=complex)
        u[0] = 1.0
    u = u / np.linalg.norm(u)

    def z_of(rho: float, u_: np.ndarray) -> np.ndarray:
        return math.sqrt((1 - rho) * P) * (basis @ u_)

    def rate_of(rho: float, u_: np.ndarray) -> float:
        bu_abs2 = np.abs(b @ u_.conj()) ** 2 if J else np.empty(0)
        return _unclamped_rate(rho, u_, P, bu_abs2, a, gd_coef, params)

    rho = 0.5 * rho_ub
    trajectory = [rate_of(rho, u)]
    iterations = 0
    for _ in range(config.max_iters):
        iterations += 1
        z = z_of(rho, u)
        _, gammas = direct_sinrs(rho, z, h_sd, h_relays, params)
        nu = 1.0 / (1.0 + (float(gammas.max()) if gammas.size else 0.0))
        u_new = u
        if J:
            surrogates = [taylor_relax(z, nu, h_j, s2) for h_j in h_relays]
            u_new = _ascend_direction(
                u, rho, b, a, surrogates, P, s2, nu, config.grad_steps
            )
        # 1-D refresh of rho for the candidate direction.
        def rho_rate(r: float) -> float:
            return rate_of(r, u_new)

        rho_new, rate_new = golden_max(rho_rate, RHO_MARGIN, rho_ub, tol=config.rho_tol)
        if rate_new < trajectory[-1]:
            # Direction step did not help; keep the previous direction.
            u_new = u
            rho_new, rate_new = golden_max(
                lambda r: rate_of(r, u), RHO_MARGIN, rho_ub, tol=config.rho_tol
            )
            if rate_new < trajectory[-1]:
                rho_new, rate_new = rho, trajectory[-1]
        improved = rate_new - trajectory[-1]
        trajectory.append(rate_new)
        rho, u = rho_new, u_new
        if improved < config.rate_tol and iterations > 1:
            break

    z = z_of(rho, u)
    jam = JammingVector(z=z, basis=basis)
    jam.validate(h_sd, (1 - rho) * P)
    _, gammas = direct_sinrs(rho, z, h_sd, h_relays, params)
    nu = 1.0 / (1.0 + (float(gammas.max()) if gammas.size else 0.0))
    rate = direct_secrecy_rate(rho, z, h_sd, h_relays, params, clamp=True)
    return DirectResult(
        rho=rho, z=jam, rate=rate, nu=nu, iterations=iterations,
        trajectory=tuple(trajectory), feasible=True,
    )


def _ascend_direction(u, rho, b, a, surrogates, P, s2, nu, steps):
    """Projected-gradient ascent on the relaxed worst-eavesdropper margin.

    The margin of eavesdropper j is the largest ``nu`` its linearized
    constraint allows for the current ``rho``; pushing up the smallest
    margin lets the next iterate claim a larger ``log(nu)`` term.
    """
    c = math.sqrt((1 - rho) * P)

    def margins(u_):
        out = np.empty(len(surrogates))
        for j, sur in enumerate(surrogates):
            bu = complex(np.vdot(b[j], u_))  # b_j^H u, so h_j^H z = c * bu
            lhs = rho * P * a[j] + (c * abs(bu)) ** 2 + s2
            lin = 2 * (sur.kappa * c * bu).real
            out[j] = (
                2 * s2 / sur.nu_t + lin / sur.nu_t - lhs
            ) * sur.nu_t**2 / (sur.q + s2)
        return out

    best = u
    best_margin = margins(u).min()
    for _ in range(steps):
        m = margins(best)
        j = int(np.argmin(m))
        sur = surrogates[j]
        bu = complex(np.vdot(b[j], best))
        # Wirtinger gradient of margin_j with respect to u*.
        grad = (
            (c / sur.nu_t) * np.conj(sur.kappa) * b[j]
            - c**2 * bu * b[j]
        ) * sur.nu_t**2 / (sur.q + s2)
        gn = np.linalg.norm(grad)
        if gn == 0:
            break
        improved = False
        step = 1.0
        while step > 1e-6:
            cand = best + step * grad / gn
            cand = cand / np.linalg.norm(cand)
            if margins(cand).min() > best_margin:
                best, best_margin = cand, margins(cand).min()
                improved = True
                break
            step *= 0.5
        if not improved:
            break
    return best
