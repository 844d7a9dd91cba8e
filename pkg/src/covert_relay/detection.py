"""Energy-detection statistics at the adversarial observers.

A Willie compares its slot-averaged received power against a threshold to
decide whether the source transmitted.  With Gaussian codebooks and long
slots the averaged power converges to ``sigma2_w + gamma`` where ``gamma``
is exponential (jamming only) under the null hypothesis and a sum of two
independent exponentials (jamming + signal) under the alternative.  That
yields closed-form false-alarm / miss-detection probabilities, an optimal
threshold, and a minimum error sum that depends only on the ratio
``r = lambda_s / lambda_j`` of signal to jamming mean powers:

    min (P_FA + P_MD) = 1 - exp(-ln(r) / (r - 1))

Communication is covert when this minimum stays above ``1 - epsilon``,
which (by monotonicity in ``r``) reduces to box bounds on the power-split
variables.  Multi-Willie extensions cover the worst observer (non-colluding)
and the fusion of all received energies (colluding), the latter both exactly
(hypoexponential tails) and through a Gaussian approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import mpmath as mp
import numpy as np
from scipy.special import erfc

from .channel import LinkVariances, SystemParams
from .links import PowerSplit

# Relative gap below which two exponential scales are treated as equal.
EQUAL_SCALE_RTOL = 1e-9
# Perturbation applied to evaluate the removable singularity at equal scales.
GUARD_DELTA = 1e-6
BISECT_TOL = 1e-9


def q_function(x):
    """Standard normal tail ``Q(x) = 0.5 * erfc(x / sqrt(2))``.

    erfc is evaluated by the platform libm / Cephes routine, accurate to a
    few ulp (relative error well below 1e-15) over the whole range.
    """
    return 0.5 * erfc(np.asarray(x) / math.sqrt(2.0)) if np.ndim(x) else 0.5 * math.erfc(x / math.sqrt(2.0))


@dataclass(frozen=True)
class PhaseScales:
    """Mean received jamming / signal powers at one Willie in one phase."""

    lambda_j: float
    lambda_s: float
    sigma2_w: float
    phase: int

    def __post_init__(self):
        if self.lambda_j <= 0 or self.lambda_s <= 0:
            raise ValueError("degenerate detector: both mean powers must be positive")
        if self.phase not in (1, 2):
            raise ValueError("phase must be 1 or 2")


@dataclass(frozen=True)
class DetectionOutcome:
    threshold: float
    p_fa: float
    p_md: float

    def __post_init__(self):
        for p in (self.p_fa, self.p_md):
            if not -1e-12 <= p <= 1 + 1e-12:
                raise ValueError(f"probability {p} outside [0, 1]")

    @property
    def error_sum(self) -> float:
        return self.p_fa + self.p_md


def phase_scales(
    split: PowerSplit,
    params: SystemParams,
    variances: LinkVariances,
    phase: int,
    willie: int = 0,
    relay: int = 0,
) -> PhaseScales:
    """Mean received powers at Willie ``willie`` for the given phase.

    Phase 1: destination jamming ``(1-rho) P mu_dw`` vs beamformed data
    leakage ``rho P mu_sw``.  Phase 2: source jamming ``xi P mu_sw`` vs the
    forwarded mixture ``(1-xi) P mu_rw`` from relay ``relay``.
    """
    P = params.P
    if phase == 1:
        lam_j = (1 - split.rho) * P * variances.dw[willie]
        lam_s = split.rho * P * variances.sw[willie]
    elif phase == 2:
        lam_j = split.xi * P * variances.sw[willie]
        lam_s = (1 - split.xi) * P * variances.rw[relay, willie]
    else:
        raise ValueError("phase must be 1 or 2")
    return PhaseScales(lambda_j=lam_j, lambda_s=lam_s, sigma2_w=params.sigma2_w, phase=phase)


def _scales_nearly_equal(lam_j: float, lam_s: float) -> bool:
    return abs(lam_s - lam_j) < EQUAL_SCALE_RTOL * max(lam_s, lam_j)


def _fa_md_raw(lam_j: float, lam_s: float, x: float) -> tuple[float, float]:
    """Closed forms for threshold excess ``x = theta - sigma2_w > 0``."""
    p_fa = math.exp(-x / lam_j)
    p_md = 1.0 - (lam_s * math.exp(-x / lam_s) - lam_j * math.exp(-x / lam_j)) / (
        lam_s - lam_j
    )
    return p_fa, min(max(p_md, 0.0), 1.0)


def fa_md(scales: PhaseScales, threshold: float) -> DetectionOutcome:
    """False-alarm and miss-detection probabilities at a given threshold.

    Any threshold at or below the noise floor yields ``(1, 0)``: the
    detector always declares a transmission.
    """
    x = threshold - scales.sigma2_w
    if x <= 0:
        return DetectionOutcome(threshold, 1.0, 0.0)
    lam_j, lam_s = scales.lambda_j, scales.lambda_s
    if _scales_nearly_equal(lam_j, lam_s):
        # Removable singularity at lam_s == lam_j: average the two sides.
        hi = _fa_md_raw(lam_j, lam_s * (1 + GUARD_DELTA), x)
        lo = _fa_md_raw(lam_j, lam_s * (1 - GUARD_DELTA), x)
        return DetectionOutcome(threshold, 0.5 * (hi[0] + lo[0]), 0.5 * (hi[1] + lo[1]))
    p_fa, p_md = _fa_md_raw(lam_j, lam_s, x)
    return DetectionOutcome(threshold, p_fa, p_md)


def optimal_threshold(scales: PhaseScales) -> float:
    """Threshold minimizing ``P_FA + P_MD``.

    Closed form ``lambda_j lambda_s / (lambda_s - lambda_j) *
    ln(lambda_s / lambda_j) + sigma2_w``, symmetric under swapping the two
    scales, with analytic limit ``lambda + sigma2_w`` at equal scales.
    """
    lam_j, lam_s = scales.lambda_j, scales.lambda_s
    if _scales_nearly_equal(lam_j, lam_s):
        hi, lo = lam_s * (1 + GUARD_DELTA), lam_s * (1 - GUARD_DELTA)
        t_hi = lam_j * hi / (hi - lam_j) * math.log(hi / lam_j)
        t_lo = lam_j * lo / (lo - lam_j) * math.log(lo / lam_j)
        return 0.5 * (t_hi + t_lo) + scales.sigma2_w
    return lam_j * lam_s / (lam_s - lam_j) * math.log(lam_s / lam_j) + scales.sigma2_w


def _log_ratio_over_rm1(r: float) -> float:
    """``ln(r) / (r - 1)`` with its removable singularity at r = 1."""
    d = r - 1.0
    if abs(d) < 1e-6:
        return 1.0 - d / 2.0 + d * d / 3.0
    return math.log(r) / d


def min_error_sum_ratio(r: float) -> float:
    """Minimum error sum as a function of ``r = lambda_s / lambda_j``.

    Equals ``1 - r**(-1/(r-1))``; strictly decreasing in ``r``, tending to 1
    as ``r -> 0`` (signal buried in jamming) and 0 as ``r -> inf``.
    """
    if r <= 0:
        raise ValueError("scale ratio must be positive")
    return -math.expm1(-_log_ratio_over_rm1(r))


def min_error_sum(scales: PhaseScales) -> float:
    """Error sum at the optimal threshold; ``1 - e**-1`` at equal scales.

    Satisfies the certificate identity
    ``1 - min_error_sum = exp(ln(lambda_j/lambda_s) * lambda_j /
    (lambda_s - lambda_j))`` used by the covertness constraint.
    """
    return min_error_sum_ratio(scales.lambda_s / scales.lambda_j)


def no_jamming_error_sum(lambda_s: float, sigma2_w: float) -> float:
    """Infimum of the error sum when the masking jammer is switched off.

    Without jamming the null-hypothesis power estimate converges exactly to
    the noise floor, so a threshold just above ``sigma2_w`` gives zero false
    alarms and vanishing miss detection: the infimum is 0 and covertness is
    unachievable for any positive signal power.
    """
    if lambda_s <= 0:
        raise ValueError("lambda_s must be positive")
    if sigma2_w < 0:
        raise ValueError("sigma2_w must be nonnegative")
    return 0.0


def no_jamming_error_sum_grid(
    lambda_s: float, sigma2_w: float, points: int = 10_000, span: float = 10.0
) -> float:
    """Grid-minimized error sum of the jamming-free detector.

    Thresholds sweep ``(sigma2_w, sigma2_w + span * lambda_s]``.  When
    ``lambda_s`` is so small that the grid cannot resolve thresholds above
    the noise floor, every grid point degenerates to ``(1, 0)`` and the
    minimum is 1.
    """
    theta = sigma2_w + np.linspace(0.0, span * lambda_s, points + 1)[1:]
    x = theta - sigma2_w
    above = x > 0
    err = np.where(above, -np.expm1(-x / lambda_s), 1.0)
    return float(err.min())


def _bisect_threshold_bound(predicate, lo: float, hi: float, keep_true_side: str) -> float:
    """Bisect a monotone predicate on [lo, hi] to absolute tolerance.

    ``keep_true_side`` is "lo" when the predicate holds below the boundary
    and "hi" when it holds above; the returned value always satisfies the
    predicate (conservative side of the last bracket).
    """
    while hi - lo > BISECT_TOL:
        mid = 0.5 * (lo + hi)
        if predicate(mid) == (keep_true_side == "lo"):
            lo = mid
        else:
            hi = mid
    return lo if keep_true_side == "lo" else hi


def covert_box_bounds(
    params: SystemParams,
    variances: LinkVariances,
    relay: int = 0,
    willie_phase1: int = 0,
    willie_phase2: int = 0,
) -> tuple[float, float]:
    """Reduce both per-phase covert constraints to box bounds ``(rho_ub, xi_lb)``.

    The minimum error sum is strictly decreasing in the signal/jamming
    ratio, which is increasing in ``rho`` (phase 1) and decreasing in ``xi``
    (phase 2), so each constraint is an interval found by bisection on the
    exact certificate ``min_error_sum >= 1 - epsilon``.  Returns 1 / 0 when
    the respective constraint never binds.
    """
    eps = params.epsilon
    mu_sw1, mu_dw = variances.sw[willie_phase1], variances.dw[willie_phase1]
    mu_sw2, mu_rw = variances.sw[willie_phase2], variances.rw[relay, willie_phase2]

    def covert_rho(rho: float) -> bool:
        r = rho * mu_sw1 / ((1 - rho) * mu_dw)
        return min_error_sum_ratio(r) >= 1 - eps

    def covert_xi(xi: float) -> bool:
        r = (1 - xi) * mu_rw / (xi * mu_sw2)
        return min_error_sum_ratio(r) >= 1 - eps

    tiny = BISECT_TOL
    rho_ub = 1.0 if covert_rho(1 - tiny) else _bisect_threshold_bound(
        covert_rho, tiny, 1 - tiny, keep_true_side="lo"
    )
    xi_lb = 0.0 if covert_xi(tiny) else _bisect_threshold_bound(
        covert_xi, tiny, 1 - tiny, keep_true_side="hi"
    )
    return rho_ub, xi_lb


def worst_willie(variances: LinkVariances, relay: int = 0) -> tuple[int, int]:
    """Index of the most capable detector in each phase.

    Phase 1: the Willie with the largest ``mu_sw / mu_dw`` (closest to the
    source relative to the jamming destination).  Phase 2: largest
    ``mu_rw / mu_sw`` relative to the transmitting relay.  Ties break to the
    lowest index.
    """
    if variances.n_willies == 0:
        raise ValueError("at least one Willie is required")
    idx1 = int(np.argmax(variances.sw / variances.dw))
    idx2 = int(np.argmax(variances.rw[relay] / variances.sw))
    return idx1, idx2


# ---------------------------------------------------------------------------
# Colluding Willies: exact hypoexponential fusion statistics.
# ---------------------------------------------------------------------------


def _check_distinct_rates(rates) -> None:
    rates = sorted(rates)
    for a, b in zip(rates, rates[1:]):
        if b - a < EQUAL_SCALE_RTOL * b:
            raise ValueError(
                "hypoexponential rates must be pairwise distinct "
                "(relative gap > 1e-9); perturb the variances or use the CLT path"
            )


def hypoexp_sf(rates, x: float) -> float:
    """Survival function of a sum of exponentials with distinct rates.

    ``P(X > x) = prod(rates) * sum_j exp(-r_j x) / (r_j * prod_{k!=j}(r_k - r_j))``.

    The partial-fraction terms cancel catastrophically when rates cluster,
    so the sum is evaluated in adaptive-precision arithmetic and only
    rounded to a float at the end.
    """
    if x <= 0:
        return 1.0
    _check_distinct_rates(rates)
    dps = 50
    while True:
        with mp.workdps(dps):
            rs = [mp.mpf(r) for r in rates]
            xx = mp.mpf(x)
            total = mp.mpf(0)
            max_term = mp.mpf(0)
            for j, rj in enumerate(rs):
                denom = rj
                for k, rk in enumerate(rs):
                    if k != j:
                        denom *= rk - rj
                term = mp.e ** (-rj * xx) / denom
                total += term
                max_term = max(max_term, abs(term))
            for rj in rs:
                total *= rj
                max_term *= rj
            # Digits lost to cancellation; retry with more precision if the
            # result would carry fewer than ~15 good digits.
            if total != 0 and max_term != 0:
                lost = mp.log10(max_term / abs(total))
            else:
                lost = mp.mpf(0)
            if lost < dps - 20 or dps >= 3200:
                return float(min(max(total, mp.mpf(0)), mp.mpf(1)))
        dps = int(max(dps * 2, dps + float(lost) + 30))


def colluding_exact_fa_md(
    jam_scales, sig_scales, threshold: float, sigma2_w: float
) -> DetectionOutcome:
    """Exact fusion-center detection over W colluding Willies.

    ``jam_scales[i]`` / ``sig_scales[i]`` are the mean jamming / signal
    powers at Willie i; the pooled energy is a sum of W (null hypothesis)
    or 2W (alternative) independent exponentials shifted by ``W sigma2_w``.
    """
    jam_scales = [float(s) for s in jam_scales]
    sig_scales = [float(s) for s in sig_scales]
    if len(jam_scales) != len(sig_scales) or not jam_scales:
        raise ValueError("need one (jam, signal) scale pair per Willie")
    if min(jam_scales) <= 0 or min(sig_scales) <= 0:
        raise ValueError("scales must be positive")
    W = len(jam_scales)
    x = threshold - W * sigma2_w
    if x <= 0:
        return DetectionOutcome(threshold, 1.0, 0.0)
    p_fa = hypoexp_sf([1.0 / s for s in jam_scales], x)
    p_md = 1.0 - hypoexp_sf([1.0 / s for s in jam_scales + sig_scales], x)
    return DetectionOutcome(threshold, p_fa, min(max(p_md, 0.0), 1.0))


# ---------------------------------------------------------------------------
# Colluding Willies: CLT approximation.
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CltMoments:
    """Gaussian moments of the fusion-center energy under both hypotheses."""

    mu_fa: float
    sigma_fa: float
    mu_md: float
    sigma_md: float
    W: int

    def __post_init__(self):
        if self.W < 1:
            raise ValueError("W must be at least 1")
        if self.mu_md < self.mu_fa:
            raise ValueError("mu_md must dominate mu_fa")
        if self.sigma_md < self.sigma_fa or self.sigma_fa < 0:
            raise ValueError("sigma_md must dominate sigma_fa >= 0")


def _iid_value(arr: np.ndarray, name: str) -> float:
    arr = np.atleast_1d(arr)
    if arr.size > 1 and (arr.max() - arr.min()) > 1e-9 * arr.max():
        raise ValueError(
            f"CLT moments assume i.i.d. Willie channels but {name} differs across Willies"
        )
    return float(arr[0])


def clt_moments(
    split: PowerSplit,
    params: SystemParams,
    variances: LinkVariances,
    W: int,
    phase: int,
    relay: int = 0,
) -> CltMoments:
    """Mean/stddev of the pooled energy of W i.i.d. Willies in one phase."""
    P, s2w = params.P, params.sigma2_w
    if phase == 1:
        jam = (1 - split.rho) * P * _iid_value(variances.dw, "mu_dw")
        sig = split.rho * P * _iid_value(variances.sw, "mu_sw")
    elif phase == 2:
        jam = split.xi * P * _iid_value(variances.sw, "mu_sw")
        sig = (1 - split.xi) * P * _iid_value(variances.rw[relay], "mu_rw")
    else:
        raise ValueError("phase must be 1 or 2")
    return CltMoments(
        mu_fa=W * jam + W * s2w,
        sigma_fa=math.sqrt(W) * jam,
        mu_md=W * sig + W * jam + W * s2w,
        sigma_md=math.sqrt(W * sig**2 + W * jam**2),
        W=W,
    )


def clt_fa_md(moments: CltMoments, threshold: float) -> DetectionOutcome:
    """Gaussian-approximate detection probabilities at a threshold."""
    if moments.sigma_fa <= 0 or moments.sigma_md <= 0:
        raise ValueError("CLT moments require positive standard deviations")
    p_fa = q_function((threshold - moments.mu_fa) / moments.sigma_fa)
    p_md = 1.0 - q_function((threshold - moments.mu_md) / moments.sigma_md)
    return DetectionOutcome(threshold, float(p_fa), float(p_md))


def clt_optimal_threshold(moments: CltMoments) -> float:
    """Error-sum-minimizing threshold of the two-Gaussian test.

    Root of the density-crossing quadratic; the branch that lies between the
    two means (and is therefore nonnegative) is returned.  When the two
    standard deviations coincide the quadratic degenerates and the crossing
    is the midpoint of the means.
    """
    mfa, sfa, mmd, smd = (
        moments.mu_fa,
        moments.sigma_fa,
        moments.mu_md,
        moments.sigma_md,
    )
    if smd - sfa < EQUAL_SCALE_RTOL * smd:
        return 0.5 * (mfa + mmd)
    a = smd**2 - sfa**2
    disc = sfa**2 * smd**2 * ((mmd - mfa) ** 2 + 2 * a * math.log(smd / sfa))
    return ((mfa * smd**2 - mmd * sfa**2) + math.sqrt(disc)) / a


def clt_min_error_sum(moments: CltMoments) -> float:
    return clt_fa_md(moments, clt_optimal_threshold(moments)).error_sum


def clt_box_bounds(
    params: SystemParams,
    variances: LinkVariances,
    W: int,
    relay: int = 0,
) -> tuple[float, float]:
    """Covert box under colluding detection, by bisection on the CLT error sum.

    The pooled detector's minimum error sum decreases in ``rho`` and
    increases in ``xi`` just like the single-Willie certificate, so the
    constraints again reduce to ``rho <= rho_ub`` and ``xi >= xi_lb``.
    """
    eps = params.epsilon
    tiny = BISECT_TOL

    def covert_rho(rho: float) -> bool:
        m = clt_moments(PowerSplit(rho, 0.5), params, variances, W, phase=1, relay=relay)
        return clt_min_error_sum(m) >= 1 - eps

    def covert_xi(xi: float) -> bool:
        m = clt_moments(PowerSplit(0.5, xi), params, variances, W, phase=2, relay=relay)
        return clt_min_error_sum(m) >= 1 - eps

    rho_ub = 1.0 if covert_rho(1 - tiny) else _bisect_threshold_bound(
        covert_rho, tiny, 1 - tiny, keep_true_side="lo"
    )
    xi_lb = 0.0 if covert_xi(tiny) else _bisect_threshold_bound(
        covert_xi, tiny, 1 - tiny, keep_true_side="hi"
    )
    return rho_ub, xi_lb


# ---------------------------------------------------------------------------
# Finite-slot Monte Carlo validation of the asymptotic forms.
# ---------------------------------------------------------------------------


def monte_carlo_detection(
    scales: PhaseScales,
    n: int,
    trials: int,
    threshold: float,
    seed,
    _chunk_symbols: int = 2**24,
) -> DetectionOutcome:
    """Empirical detection rates from per-symbol simulated receptions.

    Each trial draws fresh jamming/signal channel gains, then ``n`` complex
    Gaussian symbols per hypothesis; the slot statistic is the averaged
    received energy compared against ``threshold``.  Converges to the
    closed forms as ``n`` grows.
    """
    from .channel import rng_from_seed

    if n < 1 or trials < 1:
        raise ValueError("n and trials must be at least 1")
    rng = rng_from_seed(seed)
    g_jam = scales.lambda_j / 2 * (
        rng.standard_normal(trials) ** 2 + rng.standard_normal(trials) ** 2
    )
    g_sig = scales.lambda_s / 2 * (
        rng.standard_normal(trials) ** 2 + rng.standard_normal(trials) ** 2
    )
    # Conditional on the channel draw, each received symbol is CN(0, v):
    # jamming + noise under the null, plus the data term under the
    # alternative (all codebooks look Gaussian to Willie).
    v0 = g_jam + scales.sigma2_w
    v1 = g_jam + g_sig + scales.sigma2_w
    energies = {0: np.empty(trials), 1: np.empty(trials)}
    chunk = max(1, _chunk_symbols // max(n, 1))
    for start in range(0, trials, chunk):
        stop = min(start + chunk, trials)
        m = stop - start
        sym_energy = (
            rng.standard_normal((m, n)) ** 2 + rng.standard_normal((m, n)) ** 2
        ).mean(axis=1)
        energies[0][start:stop] = 0.5 * v0[start:stop] * sym_energy
        sym_energy = (
            rng.standard_normal((m, n)) ** 2 + rng.standard_normal((m, n)) ** 2
        ).mean(axis=1)
        energies[1][start:stop] = 0.5 * v1[start:stop] * sym_energy
    p_fa = float(np.mean(energies[0] > threshold))
    p_md = float(np.mean(energies[1] < threshold))
    return DetectionOutcome(threshold, p_fa, p_md)
