"""Seeded Monte Carlo ergodic-rate sweeps, figure presets and CSV output.

An experiment fixes a scheme (two-hop relaying, multi-relay with selection,
or the direct benchmark) and a Willie model, then sweeps one variable.  For
every sweep value each trial draws a topology (scattering relays/Willies
when there are several), samples channels, runs the configured optimizer
and re-evaluates the achieved split with the exact SINR expressions before
clamping.  Infeasible trials contribute zero rate and are reported through
the feasibility fraction.

Everything is deterministic given the master seed: per-trial streams derive
from ``(master_seed, trial_index)`` and aggregation is order-independent.
"""

from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .allocation import (
    AllocationResult,
    ScaConfig,
    colluding_allocation,
    grid_oracle,
    sca_optimize,
    select_relay_suboptimal,
)
from .channel import (
    ChannelRealization,
    LinkVariances,
    Point,
    SystemParams,
    Topology,
    dbw_to_watts,
    link_variances,
    mrt_weights,
    rng_from_seed,
    sample_channels,
)
from .detection import worst_willie
from .direct import direct_optimize
from .links import (
    LinkGains,
    PowerSplit,
    leakage_max,
    nonselected_relay_sinrs,
    secrecy_rate_from_sinrs,
    sinr_destination,
    sinr_relay,
)

SCHEMES = ("two_hop", "two_hop_multi_relay", "direct")
WILLIE_MODELS = ("single", "non_colluding", "colluding")
SWEEP_VARS = ("P", "N_s", "d_sr", "J", "W", "epsilon")

CSV_COLUMNS = (
    "sweep_var", "sweep_value", "scheme", "willie_model", "W", "J", "N_s",
    "epsilon", "ergodic_rate_bits", "mean_rho", "mean_xi", "feasible_frac",
    "trials", "seed", "wall_ms",
)

WORKERS_ENV = "COVERT_RELAY_WORKERS"


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: str = "two_hop"
    willie_model: str = "single"
    sweep_var: str = "P"
    sweep_values: tuple[float, ...] = (10.0,)
    trials: int = 2000
    master_seed: int = 1
    params: SystemParams = field(default_factory=SystemParams)
    J: int = 1
    W: int = 1
    relay_selection: str = "suboptimal"
    optimizer: str = "sca"  # "grid" swaps in the brute-force oracle
    d_sr: float = 5.0
    scatter_radius: float = 1.0
    source: Point = (-5.0, 0.0)
    destination: Point = (5.0, 0.0)
    relay_center: Point = (0.0, 0.0)
    willie_center: Point = (0.0, -5.0)
    include_timing: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if self.willie_model not in WILLIE_MODELS:
            raise ValueError(f"unknown willie_model {self.willie_model!r}")
        if self.sweep_var not in SWEEP_VARS:
            raise ValueError(f"unknown sweep variable {self.sweep_var!r}")
        if not self.sweep_values:
            raise ValueError("sweep_values must be nonempty")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if self.scheme == "direct" and self.willie_model == "colluding":
            raise ValueError(
                "colluding Willies are not supported for the direct scheme"
            )
        if self.scheme == "two_hop" and self.J != 1:
            raise ValueError("scheme two_hop is single-relay; use two_hop_multi_relay")
        if self.relay_selection not in ("suboptimal", "exhaustive"):
            raise ValueError(f"unknown relay_selection {self.relay_selection!r}")
        if self.optimizer not in ("sca", "grid"):
            raise ValueError(f"unknown optimizer {self.optimizer!r}")
        if self.willie_model == "colluding" and self.W < 1:
            raise ValueError("W must be at least 1")


@dataclass(frozen=True)
class SweepResult:
    sweep_var: str
    sweep_value: float
    scheme: str
    willie_model: str
    W: int
    J: int
    N_s: int
    epsilon: float
    ergodic_rate_bits: float
    mean_rho: float
    mean_xi: float
    feasible_frac: float
    trials: int
    seed: int
    wall_ms: int


def _apply_sweep_value(config: ExperimentConfig, value: float) -> ExperimentConfig:
    var = config.sweep_var
    if var == "P":
        return replace(config, params=replace(config.params, P=dbw_to_watts(value)))
    if var == "N_s":
        return replace(config, params=replace(config.params, N_s=int(round(value))))
    if var == "epsilon":
        return replace(config, params=replace(config.params, epsilon=value))
    if var == "d_sr":
        return replace(config, d_sr=float(value))
    if var == "J":
        return replace(config, J=int(round(value)))
    if var == "W":
        return replace(config, W=int(round(value)))
    raise ValueError(var)


def _scatter(rng, center: Point, radius: float, count: int) -> list[Point]:
    pts = []
    for _ in range(count):
        r = radius * math.sqrt(rng.uniform())
        phi = rng.uniform(0.0, 2.0 * math.pi)
        pts.append((center[0] + r * math.cos(phi), center[1] + r * math.sin(phi)))
    return pts


def _trial_topology(config: ExperimentConfig, trial: int) -> Topology:
    """Node placement for one trial; rejection-resampled until valid."""
    rng = rng_from_seed((config.master_seed, trial, 0))
    relay_on_line = (config.source[0] + config.d_sr, config.source[1])
    willies = [config.willie_center]
    for _ in range(100):
        relays = (
            [relay_on_line]
            if config.J == 1
            else _scatter(rng, config.relay_center, config.scatter_radius, config.J)
        )
        if config.W > 1 and config.willie_model == "non_colluding":
            willies = _scatter(rng, config.willie_center, config.scatter_radius, config.W)
        try:
            return Topology(
                source=config.source,
                destination=config.destination,
                relays=tuple(relays),
                willies=tuple(willies),
            )
        except ValueError:
            continue
    raise RuntimeError("could not place nodes without collisions")


def _gains_for_relay(real: ChannelRealization, params: SystemParams, i: int) -> LinkGains:
    g_sr = params.P * float(np.linalg.norm(real.h_sr[i]) ** 2) / params.sigma2
    g_rd = params.P * float(abs(real.h_rd[i]) ** 2) / params.sigma2
    return LinkGains(gamma_sr=g_sr, gamma_rd=g_rd)


def _exact_leakage(
    real: ChannelRealization, params: SystemParams, split: PowerSplit, i: int
) -> float:
    """Worst exact eavesdropping SINR over the selected and bystander relays."""
    gains_i = _gains_for_relay(real, params, i)
    gamma_i = sinr_relay(split, gains_i, mode="exact")
    if real.n_relays == 1:
        return gamma_i
    P, s2 = params.P, params.sigma2
    w_i = mrt_weights(real.h_sr[i])
    g1s, g2s = [], []
    for j in range(real.n_relays):
        if j == i:
            continue
        g1, g2 = nonselected_relay_sinrs(
            split,
            gamma_sj_bf=P * abs(np.vdot(w_i, real.h_sr[j])) ** 2 / s2,
            gamma_jd=P * abs(real.h_rd[j]) ** 2 / s2,
            gamma_si=gains_i.gamma_sr,
            gamma_id=gains_i.gamma_rd,
            gamma_ij=P * abs(real.h_rr[i, j]) ** 2 / s2,
            gamma_sj=P * abs(real.h_sr[j, 0]) ** 2 / s2,
            mode="exact",
        )
        g1s.append(g1)
        g2s.append(g2)
    return leakage_max(g1s, gamma_i, g2s)


def _allocate(
    config: ExperimentConfig,
    params: SystemParams,
    variances: LinkVariances,
    real: ChannelRealization,
    i: int,
) -> AllocationResult:
    gains = _gains_for_relay(real, params, i)
    if config.willie_model == "colluding":
        return colluding_allocation(params, variances, gains, config.W, relay=i)
    if config.willie_model == "non_colluding":
        w1, w2 = worst_willie(variances, relay=i)
    else:
        w1 = w2 = 0
    if config.optimizer == "grid":
        return grid_oracle(
            params, variances, gains, relay=i, willie_phase1=w1, willie_phase2=w2
        )
    return sca_optimize(
        params, variances, gains, ScaConfig(),
        relay=i, willie_phase1=w1, willie_phase2=w2,
    )


def run_trial(config: ExperimentConfig, trial: int) -> tuple[float, float, float, bool]:
    """One Monte Carlo trial: returns (rate_bits, rho, xi, feasible)."""
    params = config.params
    topo = _trial_topology(config, trial)
    variances = link_variances(topo, params.alpha)
    real = sample_channels(variances, params, seed=(config.master_seed, trial, 1))

    if config.scheme == "direct":
        res = direct_optimize(real, params)
        if not res.feasible:
            return 0.0, 0.0, math.nan, False
        return res.rate, res.rho, math.nan, True

    if config.scheme == "two_hop" or config.J == 1:
        candidates = [0]
    elif config.relay_selection == "suboptimal":
        candidates = [select_relay_suboptimal(real.h_rd)]
    else:
        candidates = list(range(config.J))

    best_rate, best = -math.inf, None
    for i in candidates:
        res = _allocate(config, params, variances, real, i)
        if not res.feasible:
            continue
        if res.rate > best_rate:
            best_rate, best = res.rate, (i, res)
    if best is None:
        return 0.0, 0.0, math.nan, False
    i, res = best
    gains = _gains_for_relay(real, params, i)
    gamma_d = sinr_destination(res.split, gains, mode="exact")
    gamma_e = _exact_leakage(real, params, res.split, i)
    rate = secrecy_rate_from_sinrs(gamma_d, gamma_e, params.pr_t, clamp=True)
    return rate, res.split.rho, res.split.xi, True


def _run_trial_range(config: ExperimentConfig, lo: int, hi: int):
    return [run_trial(config, t) for t in range(lo, hi)]


def ergodic_rate(config: ExperimentConfig, sweep_value: float) -> SweepResult:
    """Average optimized clamped secrecy rate over channel realizations."""
    cfg = _apply_sweep_value(config, sweep_value)
    start = time.perf_counter()
    workers = int(os.environ.get(WORKERS_ENV, "1"))
    if workers > 1 and cfg.trials >= 4 * workers:
        bounds = np.linspace(0, cfg.trials, workers + 1).astype(int)
        with ProcessPoolExecutor(max_workers=workers) as pool:
            chunks = list(
                pool.map(_run_trial_range, [cfg] * workers, bounds[:-1], bounds[1:])
            )
        outcomes = [o for chunk in chunks for o in chunk]
    else:
        outcomes = _run_trial_range(cfg, 0, cfg.trials)

    rates = np.array([o[0] for o in outcomes])
    feasible = np.array([o[3] for o in outcomes])
    rhos = np.array([o[1] for o in outcomes])[feasible]
    xis = np.array([o[2] for o in outcomes])[feasible]
    wall_ms = int(round(1000 * (time.perf_counter() - start)))
    return SweepResult(
        sweep_var=cfg.sweep_var,
        sweep_value=float(sweep_value),
        scheme=cfg.scheme,
        willie_model=cfg.willie_model,
        W=cfg.W,
        J=cfg.J,
        N_s=cfg.params.N_s,
        epsilon=cfg.params.epsilon,
        ergodic_rate_bits=float(np.sum(rates)) / cfg.trials,
        mean_rho=float(np.mean(rhos)) if rhos.size else math.nan,
        mean_xi=float(np.mean(xis)) if xis.size and not np.all(np.isnan(xis)) else math.nan,
        feasible_frac=float(np.mean(feasible)),
        trials=cfg.trials,
        seed=cfg.master_seed,
        wall_ms=wall_ms if cfg.include_timing else 0,
    )


def run_sweep(config: ExperimentConfig) -> list[SweepResult]:
    return [ergodic_rate(config, v) for v in config.sweep_values]


PRESETS = ("fig3", "fig4", "fig5", "fig6", "fig7")


def run_preset(name: str, overrides: dict | None = None, out: str | None = None) -> list[SweepResult]:
    """Named sweep reproducing one of the headline experiment figures.

    ``overrides`` patches ExperimentConfig fields (e.g. trials, master_seed,
    W); ``out`` additionally writes the CSV.
    """
    if name not in PRESETS:
        raise ValueError(f"unknown preset {name!r}; choose from {PRESETS}")
    overrides = dict(overrides or {})
    param_overrides = overrides.pop("params", {})

    def cfg(**kw) -> ExperimentConfig:
        base_params = SystemParams(**{"N_s": 16, "epsilon": 0.1, **kw.pop("params", {}), **param_overrides})
        return ExperimentConfig(params=base_params, **{**kw, **overrides})

    results: list[SweepResult] = []
    p_sweep = (0.0, 5.0, 10.0, 15.0, 20.0)
    if name == "fig3":
        for scheme in ("two_hop", "direct"):
            results += run_sweep(cfg(scheme=scheme, sweep_var="P", sweep_values=p_sweep))
    elif name == "fig4":
        for eps in (0.01, 0.001):
            results += run_sweep(
                cfg(scheme="two_hop", sweep_var="N_s",
                    sweep_values=(8.0, 16.0, 32.0), params={"epsilon": eps})
            )
    elif name == "fig5":
        results += run_sweep(
            cfg(scheme="two_hop", sweep_var="d_sr",
                sweep_values=tuple(float(d) for d in range(2, 10)))
        )
    elif name == "fig6":
        for scheme in ("two_hop_multi_relay", "direct"):
            results += run_sweep(
                cfg(scheme=scheme, willie_model="non_colluding", W=5,
                    sweep_var="J", sweep_values=(1.0, 2.0, 4.0, 8.0))
            )
    elif name == "fig7":
        for model in ("non_colluding", "colluding"):
            results += run_sweep(
                cfg(scheme="two_hop_multi_relay", willie_model=model, W=5,
                    sweep_var="J", sweep_values=(1.0, 2.0, 4.0, 8.0))
            )
    if out is not None:
        emit_csv(results, out)
    return results


def _format_cell(value) -> str:
    if isinstance(value, bool):
        return str(int(value))
    if isinstance(value, float):
        return format(value, ".17g")
    return str(value)


def write_csv(results: list[SweepResult], fh) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for r in results:
        writer.writerow([_format_cell(getattr(r, c)) for c in CSV_COLUMNS])


def emit_csv(results: list[SweepResult], path: str) -> None:
    """Write one row per sweep result with a stable column order.

    Floats are formatted with 17 significant digits so parsing the file
    recovers them exactly; identical configurations and seeds therefore
    produce byte-identical files.
    """
    try:
        with open(path, "w", newline="") as fh:
            write_csv(results, fh)
    except OSError as exc:
        raise OSError(f"could not write sweep results to {path!r}: {exc}") from exc
