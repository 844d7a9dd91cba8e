"""Command-line front end for the experiment sweeps.

Either run a named preset or assemble a custom sweep from flags.  A flat
``key=value`` config file can seed the options; command-line flags override
file entries.  Results go to stdout as CSV unless ``--out`` is given.
"""

from __future__ import annotations

import argparse
import sys

from .channel import SystemParams, dbw_to_watts
from .experiments import (
    PRESETS,
    SCHEMES,
    WILLIE_MODELS,
    ExperimentConfig,
    emit_csv,
    run_preset,
    run_sweep,
    write_csv,
)

CONFIG_KEYS = {
    "preset", "scheme", "willies", "trials", "seed", "out", "sweep",
    "epsilon", "N_s", "P_dbw", "sigma2_dbw", "sigma2w_dbw", "pr_t", "alpha",
    "J", "W", "relay_selection", "timing",
}


def parse_sweep_spec(spec: str) -> tuple[str, tuple[float, ...]]:
    """Parse ``var=start:step:stop`` into a variable name and value list."""
    try:
        var, rng = spec.split("=", 1)
        start, step, stop = (float(tok) for tok in rng.split(":"))
    except ValueError as exc:
        raise ValueError(f"bad sweep spec {spec!r}; expected var=start:step:stop") from exc
    if step <= 0:
        raise ValueError("sweep step must be positive")
    values = []
    v = start
    while v <= stop + 1e-12:
        values.append(round(v, 12))
        v += step
    if not values:
        raise ValueError("sweep range is empty")
    return var, tuple(values)


def read_config_file(path: str) -> dict[str, str]:
    entries: dict[str, str] = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value")
            key, value = (tok.strip() for tok in line.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            entries[key] = value
    return entries


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="covert-relay",
        description="Monte Carlo secrecy-rate sweeps for covert untrusted relaying",
    )
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--preset", choices=PRESETS)
    parser.add_argument("--scheme", choices=SCHEMES)
    parser.add_argument("--willies", choices=WILLIE_MODELS, dest="willies")
    parser.add_argument("--trials", type=int)
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output CSV path (default: stdout)")
    parser.add_argument("--sweep", help="var=start:step:stop, var in P/N_s/d_sr/J/W/epsilon")
    parser.add_argument("--epsilon", type=float)
    parser.add_argument("--N-s", type=int, dest="N_s")
    parser.add_argument("--P-dbw", type=float, dest="P_dbw")
    parser.add_argument("--J", type=int)
    parser.add_argument("--W", type=int)
    parser.add_argument("--relay-selection", choices=("suboptimal", "exhaustive"))
    parser.add_argument("--timing", action="store_true", default=None,
                        help="record wall time per row (breaks byte determinism)")
    return parser


def _merged_options(args: argparse.Namespace) -> dict:
    opts: dict = {}
    if args.config:
        raw = read_config_file(args.config)
        casts = {
            "trials": int, "seed": int, "epsilon": float, "N_s": int,
            "P_dbw": float, "sigma2_dbw": float, "sigma2w_dbw": float,
            "pr_t": float, "alpha": float, "J": int, "W": int,
            "timing": lambda s: s.lower() in ("1", "true", "yes"),
        }
        for key, value in raw.items():
            opts[key] = casts.get(key, str)(value)
    for key in (
        "preset", "scheme", "willies", "trials", "seed", "out", "sweep",
        "epsilon", "N_s", "P_dbw", "J", "W", "relay_selection", "timing",
    ):
        value = getattr(args, key, None)
        if value is not None:
            opts[key] = value
    return opts


def _system_params(opts: dict) -> SystemParams:
    kwargs = {}
    if "P_dbw" in opts:
        kwargs["P"] = dbw_to_watts(opts["P_dbw"])
    if "sigma2_dbw" in opts:
        kwargs["sigma2"] = dbw_to_watts(opts["sigma2_dbw"])
    if "sigma2w_dbw" in opts:
        kwargs["sigma2_w"] = dbw_to_watts(opts["sigma2w_dbw"])
    for key in ("epsilon", "pr_t", "alpha"):
        if key in opts:
            kwargs[key] = opts[key]
    if "N_s" in opts:
        kwargs["N_s"] = opts["N_s"]
    return SystemParams(**kwargs)


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        opts = _merged_options(args)
        out = opts.get("out")
        if opts.get("preset"):
            overrides: dict = {}
            for key, field in (
                ("trials", "trials"), ("seed", "master_seed"), ("W", "W"),
                ("J", "J"), ("relay_selection", "relay_selection"),
                ("timing", "include_timing"),
            ):
                if key in opts:
                    overrides[field] = opts[key]
            param_over = {}
            if "epsilon" in opts:
                param_over["epsilon"] = opts["epsilon"]
            if "N_s" in opts:
                param_over["N_s"] = opts["N_s"]
            if param_over:
                overrides["params"] = param_over
            results = run_preset(opts["preset"], overrides=overrides, out=None)
        else:
            if "sweep" not in opts:
                raise ValueError("either --preset or --sweep is required")
            var, values = parse_sweep_spec(opts["sweep"])
            config = ExperimentConfig(
                scheme=opts.get("scheme", "two_hop"),
                willie_model=opts.get("willies", "single"),
                sweep_var=var,
                sweep_values=values,
                trials=opts.get("trials", 2000),
                master_seed=opts.get("seed", 1),
                params=_system_params(opts),
                J=opts.get("J", 1),
                W=opts.get("W", 1),
                relay_selection=opts.get("relay_selection", "suboptimal"),
                include_timing=bool(opts.get("timing", False)),
            )
            results = run_sweep(config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    if out:
        emit_csv(results, out)
    else:
        write_csv(results, sys.stdout)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
