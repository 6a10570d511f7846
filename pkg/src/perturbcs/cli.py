"""Command-line surface for data generation, solving, analysis, and plots.

Subcommands: ``gen`` writes a reproducible problem instance, ``solve``
runs recovery strategies on freshly drawn instances, ``ric`` and
``drip`` enumerate isometry constants of seeded Gaussian ensembles,
``bounds`` evaluates error-bound constants, ``doa`` runs the
direction-finding protocol, ``sweep`` runs parameter sweeps or named
presets, and ``plot`` renders exported CSV results to vector graphics.

Every subcommand accepts ``--seed``, ``--config``, ``--threads`` and
``--out``. A config file is flat JSON whose keys match the long option
names of the subcommand (dashes as underscores); explicit command-line
flags override config values. Exit status is 0 on success, 1 for an
invalid configuration or I/O failure, and 2 when the solver failure
rate exceeds ``--fail-threshold``.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

import numpy as np

from .analysis import (
    baseline_bound_constants,
    compressible_bound_constants,
    compute_drip,
    compute_ric,
    drip_threshold,
    max_perturbation_radius,
    sparse_bound_constants,
)
from .harness import (
    STRATEGY_NAMES,
    DoaConfig,
    ExperimentConfig,
    SweepResult,
    _doa_report,
    _sweep_report,
    export_results,
    import_results,
    preset_names,
    run_doa,
    run_preset,
    run_sweep,
    run_trial,
)
from .model import (
    ROLE_ENSEMBLE,
    ROLE_NOISE,
    ROLE_PERTURBATION,
    ROLE_SIGNAL,
    GroundTruth,
    gen_gaussian_ensemble,
    gen_noise,
    gen_perturbation,
    gen_signal,
    measure,
)
from .serialization import format_report

__all__ = ["build_parser", "main", "run"]

_GEN_KEYS = ("n", "m", "k", "r", "epsilon", "signal_kind", "seed")
_SOLVE_KEYS = _GEN_KEYS + ("strategies", "trials", "fail_threshold")
_RIC_KEYS = ("m", "n", "k", "mode", "sample_trials", "budget", "seed")
_DRIP_KEYS = _RIC_KEYS + ("r",)
_BOUNDS_KEYS = ("kind", "delta_bar", "r", "psi_norm", "k", "delta", "eps_ratio")
_DOA_KEYS = ("m", "n", "trials", "seed", "format")
_SWEEP_KEYS = (
    "preset", "n", "m", "k", "r", "epsilon", "trials", "strategies",
    "signal_kind", "sweep_param", "sweep_values", "seed", "format",
    "fail_threshold",
)
_PLOT_KEYS = ("data",)


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    try:
        with open(path, encoding="utf-8") as fh:
            config = json.load(fh)
    except OSError as exc:
        raise ValueError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(config, dict):
        raise ValueError(f"config {path} must hold a JSON object")
    return config


def _check_keys(config: dict, allowed: tuple[str, ...]) -> None:
    unknown = set(config) - set(allowed)
    if unknown:
        raise ValueError(
            f"unknown config keys {sorted(unknown)}; allowed: {sorted(allowed)}"
        )


def _pick(args_value, config: dict, key: str, default):
    if args_value is not None:
        return args_value
    if key in config:
        return config[key]
    return default


def _names(raw) -> tuple[str, ...]:
    if isinstance(raw, str):
        raw = [tok.strip() for tok in raw.split(",") if tok.strip()]
    return tuple(str(tok) for tok in raw)


def _floats(raw) -> tuple[float, ...]:
    if isinstance(raw, str):
        raw = [tok.strip() for tok in raw.split(",") if tok.strip()]
    return tuple(float(tok) for tok in raw)


def _emit(fields: dict, out: str | None) -> None:
    text = format_report(fields)
    sys.stdout.write(text)
    if out is not None:
        try:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        except OSError as exc:
            raise OSError(f"cannot write report to {out}: {exc}") from exc


def _cmd_gen(args: argparse.Namespace, config: dict) -> int:
    _check_keys(config, _GEN_KEYS)
    n = int(_pick(args.n, config, "n", 200))
    m = int(_pick(args.m, config, "m", 80))
    k = int(_pick(args.k, config, "k", 10))
    r = float(_pick(args.r, config, "r", 0.1))
    epsilon = float(_pick(args.epsilon, config, "epsilon", 0.5))
    kind = str(_pick(args.signal_kind, config, "signal_kind", "unit-spikes"))
    seed = int(_pick(args.seed, config, "seed", 1))
    out = args.out or "instance.npz"

    ExperimentConfig(
        n=n, m=m, k=k, r=r, epsilon=epsilon, trials=1, master_seed=seed,
        strategies=(), signal_kind=kind,
    )
    ens = gen_gaussian_ensemble(m, n, r, (seed, 0, ROLE_ENSEMBLE))
    x_o = gen_signal(n, k, kind, (seed, 0, ROLE_SIGNAL))
    beta_o = gen_perturbation(n, r, (seed, 0, ROLE_PERTURBATION))
    e = gen_noise(m, epsilon, (seed, 0, ROLE_NOISE))
    gt = GroundTruth(x_o=x_o, beta_o=beta_o, e=e, epsilon=epsilon, k=k)
    y = measure(ens, gt).y
    try:
        np.savez(
            out, A=ens.A, B=ens.B, r=r, x_o=x_o, beta_o=beta_o, e=e, y=y,
            epsilon=epsilon, k=k, seed=seed,
        )
    except OSError as exc:
        raise OSError(f"cannot write instance to {out}: {exc}") from exc
    _emit(
        {
            "n": n, "m": m, "k": k, "r": r, "epsilon": epsilon,
            "signal_kind": kind, "seed": seed,
            "eps_mult": float(np.linalg.norm(ens.B @ (beta_o * x_o))),
            "path": out,
        },
        None,
    )
    return 0


def _cmd_solve(args: argparse.Namespace, config: dict) -> int:
    _check_keys(config, _SOLVE_KEYS)
    n = int(_pick(args.n, config, "n", 200))
    m = int(_pick(args.m, config, "m", 80))
    k = int(_pick(args.k, config, "k", 10))
    r = float(_pick(args.r, config, "r", 0.1))
    epsilon = float(_pick(args.epsilon, config, "epsilon", 0.5))
    kind = str(_pick(args.signal_kind, config, "signal_kind", "unit-spikes"))
    seed = int(_pick(args.seed, config, "seed", 1))
    trials = int(_pick(args.trials, config, "trials", 1))
    names = _names(
        _pick(args.strategies, config, "strategies", "oracle,nominal,tps,aa")
    )
    threshold = float(_pick(args.fail_threshold, config, "fail_threshold", 0.0))

    cfg = ExperimentConfig(
        n=n, m=m, k=k, r=r, epsilon=epsilon, trials=trials, master_seed=seed,
        strategies=names, signal_kind=kind,
    )
    records = [run_trial(cfg, i) for i in range(trials)]
    fields: dict = {
        "n": n, "m": m, "k": k, "r": r, "epsilon": epsilon, "trials": trials,
        "seed": seed,
    }
    failures = 0
    for name in names:
        cells = [rec.outcomes[name] for rec in records]
        good = [c for c in cells if not c.failed]
        failures += len(cells) - len(good)
        fields[f"{name}.mean_signal_err"] = (
            float(np.mean([c.signal_err for c in good])) if good else math.nan
        )
        fields[f"{name}.mean_beta_err"] = (
            float(np.mean([c.beta_err for c in good])) if good else math.nan
        )
        fields[f"{name}.effective_rate"] = sum(
            c.effective for c in cells
        ) / len(cells)
        fields[f"{name}.failures"] = len(cells) - len(good)
    total = trials * max(len(names), 1)
    rate = failures / total if names else 0.0
    fields["failure_rate"] = rate
    _emit(fields, args.out)
    return 2 if rate > threshold else 0


def _cmd_ric(args: argparse.Namespace, config: dict) -> int:
    _check_keys(config, _RIC_KEYS)
    m = int(_pick(args.m, config, "m", 12))
    n = int(_pick(args.n, config, "n", 16))
    k = int(_pick(args.k, config, "k", 2))
    mode = str(_pick(args.mode, config, "mode", "exact"))
    sample_trials = _pick(args.sample_trials, config, "sample_trials", None)
    seed = int(_pick(args.seed, config, "seed", 1))
    workers = args.threads or 1

    ens = gen_gaussian_ensemble(m, n, 0.0, (seed, 0, ROLE_ENSEMBLE))
    kwargs = {"seed": seed, "workers": workers}
    if sample_trials is not None:
        kwargs["sample_trials"] = int(sample_trials)
    if args.budget is not None or "budget" in config:
        kwargs["budget"] = int(_pick(args.budget, config, "budget", 0))
    report = compute_ric(ens.A, k, mode, **kwargs)
    _emit(
        {
            "m": m, "n": n, "k": report.k, "mode": mode, "seed": seed,
            "delta": report.delta,
            "enumerated_supports": report.enumerated_supports,
            "exact": report.exact,
        },
        args.out,
    )
    return 0


def _cmd_drip(args: argparse.Namespace, config: dict) -> int:
    _check_keys(config, _DRIP_KEYS)
    m = int(_pick(args.m, config, "m", 12))
    n = int(_pick(args.n, config, "n", 16))
    k = int(_pick(args.k, config, "k", 2))
    r = float(_pick(args.r, config, "r", 0.1))
    mode = str(_pick(args.mode, config, "mode", "exact"))
    sample_trials = _pick(args.sample_trials, config, "sample_trials", None)
    seed = int(_pick(args.seed, config, "seed", 1))
    workers = args.threads or 1

    ens = gen_gaussian_ensemble(m, n, r, (seed, 0, ROLE_ENSEMBLE))
    kwargs = {"seed": seed, "workers": workers}
    if sample_trials is not None:
        kwargs["sample_trials"] = int(sample_trials)
    if args.budget is not None or "budget" in config:
        kwargs["budget"] = int(_pick(args.budget, config, "budget", 0))
    report = compute_drip(ens, k, mode, **kwargs)
    threshold = drip_threshold(r)
    _emit(
        {
            "m": m, "n": n, "k": report.k, "r": r, "mode": mode, "seed": seed,
            "delta_bar": report.delta_bar,
            "enumerated_supports": report.enumerated_supports,
            "exact": report.exact,
            "threshold": threshold,
            "condition_met": report.delta_bar < threshold,
        },
        args.out,
    )
    return 0


def _require(config: dict, args_value, key: str, kind: str):
    value = _pick(args_value, config, key, None)
    if value is None:
        flag = "--" + key.replace("_", "-")
        raise ValueError(f"bounds --kind {kind} requires {flag}")
    return value


def _cmd_bounds(args: argparse.Namespace, config: dict) -> int:
    _check_keys(config, _BOUNDS_KEYS)
    kind = str(_pick(args.kind, config, "kind", "sparse"))
    if kind == "sparse":
        delta_bar = float(_require(config, args.delta_bar, "delta_bar", kind))
        r = float(_require(config, args.r, "r", kind))
        psi_norm = float(_require(config, args.psi_norm, "psi_norm", kind))
        report = sparse_bound_constants(delta_bar, r, psi_norm)
        fields = {"kind": kind, "delta_bar": delta_bar, "r": r}
        if 0.0 < delta_bar < 1.0:
            fields["max_radius"] = max_perturbation_radius(delta_bar)
    elif kind == "compressible":
        delta_bar = float(_require(config, args.delta_bar, "delta_bar", kind))
        r = float(_require(config, args.r, "r", kind))
        psi_norm = float(_require(config, args.psi_norm, "psi_norm", kind))
        k = int(_require(config, args.k, "k", kind))
        report = compressible_bound_constants(delta_bar, r, psi_norm, k)
        fields = {"kind": kind, "delta_bar": delta_bar, "r": r, "k": k}
    elif kind == "baseline":
        delta = float(_require(config, args.delta, "delta", kind))
        eps_ratio = float(_require(config, args.eps_ratio, "eps_ratio", kind))
        report = baseline_bound_constants(delta, eps_ratio)
        fields = {"kind": kind, "delta": delta, "eps_ratio": eps_ratio}
    else:
        raise ValueError(
            f"kind must be sparse, compressible or baseline, got {kind!r}"
        )
    fields["threshold"] = report.threshold
    fields["condition_met"] = report.condition_met
    fields.update(report.constants)
    if report.psi_spectral_norm is not None:
        fields["psi_spectral_norm"] = report.psi_spectral_norm
    _emit(fields, args.out)
    return 0


def _cmd_doa(args: argparse.Namespace, config: dict) -> int:
    _check_keys(config, _DOA_KEYS)
    m = int(_pick(args.m, config, "m", 30))
    n = int(_pick(args.n, config, "n", 90))
    trials = int(_pick(args.trials, config, "trials", 100))
    seed = int(_pick(args.seed, config, "seed", 1))
    fmt = str(_pick(args.format, config, "format", "csv"))

    result = run_doa(DoaConfig(m=m, n=n, trials=trials, master_seed=seed))
    fields = _doa_report(result)
    fields["seed"] = seed
    sys.stdout.write(format_report(fields))
    if args.out is not None:
        export_results(result, args.out, format=fmt)
    return 0


def _failure_rate(result: SweepResult) -> float:
    cells = list(result.table.values())
    total = sum(c.trials for c in cells)
    failed = sum(c.failures for c in cells)
    return failed / total if total else 0.0


def _cmd_sweep(args: argparse.Namespace, config: dict) -> int:
    _check_keys(config, _SWEEP_KEYS)
    preset = _pick(args.preset, config, "preset", None)
    seed = int(_pick(args.seed, config, "seed", 1))
    fmt = str(_pick(args.format, config, "format", "csv"))
    threshold = float(_pick(args.fail_threshold, config, "fail_threshold", 0.0))
    workers = args.threads or 1

    if preset is not None:
        result = run_preset(str(preset), workers=workers, master_seed=seed)
    else:
        sweep_param = _pick(args.sweep_param, config, "sweep_param", None)
        sweep_values = _pick(args.sweep_values, config, "sweep_values", None)
        if sweep_param is None or sweep_values is None:
            raise ValueError(
                "sweep needs --preset or both --sweep-param and --sweep-values"
            )
        cfg = ExperimentConfig(
            n=int(_pick(args.n, config, "n", 200)),
            m=int(_pick(args.m, config, "m", 80)),
            k=int(_pick(args.k, config, "k", 10)),
            r=float(_pick(args.r, config, "r", 0.1)),
            epsilon=float(_pick(args.epsilon, config, "epsilon", 0.5)),
            trials=int(_pick(args.trials, config, "trials", 10)),
            master_seed=seed,
            strategies=_names(
                _pick(
                    args.strategies, config, "strategies",
                    "oracle,nominal,tps,aa",
                )
            ),
            signal_kind=str(
                _pick(args.signal_kind, config, "signal_kind", "unit-spikes")
            ),
            sweep_param=str(sweep_param),
            sweep_values=_floats(sweep_values),
        )
        result = run_sweep(cfg, workers=workers)

    if isinstance(result, SweepResult):
        sys.stdout.write(format_report(_sweep_report(result)))
    elif hasattr(result, "errors"):
        sys.stdout.write(format_report(_doa_report(result)))
    else:
        sys.stdout.write(
            format_report(
                {
                    "kind": "spectra",
                    "model_points": int(result.model_grid.size),
                    "standard_points": int(result.standard_grid.size),
                    "sources": int(result.theta_true.size),
                }
            )
        )
    if args.out is not None:
        export_results(result, args.out, format=fmt)
    if isinstance(result, SweepResult) and _failure_rate(result) > threshold:
        return 2
    return 0


def _cmd_plot(args: argparse.Namespace, config: dict) -> int:
    _check_keys(config, _PLOT_KEYS)
    data = _pick(args.data, config, "data", None)
    if data is None:
        raise ValueError("plot requires --data")
    if args.out is None:
        raise ValueError("plot requires --out")
    from .plotting import emit_plot

    result = import_results(str(data))
    emit_plot(result, args.out)
    sys.stdout.write(format_report({"data": str(data), "plot": args.out}))
    return 0


def build_parser() -> argparse.ArgumentParser:
    """Assemble the argument parser with all subcommands."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None,
                        help="master seed (default 1)")
    common.add_argument("--config", default=None,
                        help="JSON config file; flags override its keys")
    common.add_argument("--threads", type=int, default=None,
                        help="worker processes for sweeps and enumeration")
    common.add_argument("--out", default=None, help="output file path")

    parser = argparse.ArgumentParser(
        prog="perturbcs",
        description="sparse recovery under structured sensing perturbation",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common],
                       help="write one seeded problem instance as .npz")
    for flag, typ in (("--n", int), ("--m", int), ("--k", int),
                      ("--r", float), ("--epsilon", float)):
        p.add_argument(flag, type=typ, default=None)
    p.add_argument("--signal-kind", default=None,
                   choices=("unit-spikes", "positive-spikes", "compressible"))
    p.set_defaults(handler=_cmd_gen)

    p = sub.add_parser("solve", parents=[common],
                       help="run recovery strategies on seeded instances")
    for flag, typ in (("--n", int), ("--m", int), ("--k", int),
                      ("--r", float), ("--epsilon", float),
                      ("--trials", int), ("--fail-threshold", float)):
        p.add_argument(flag, type=typ, default=None)
    p.add_argument("--signal-kind", default=None,
                   choices=("unit-spikes", "positive-spikes", "compressible"))
    p.add_argument("--strategies", default=None,
                   help=f"comma list from {','.join(STRATEGY_NAMES)}")
    p.set_defaults(handler=_cmd_solve)

    p = sub.add_parser("ric", parents=[common],
                       help="isometry constant of a seeded Gaussian matrix")
    for flag in ("--m", "--n", "--k", "--sample-trials", "--budget"):
        p.add_argument(flag, type=int, default=None)
    p.add_argument("--mode", default=None, choices=("exact", "sampled"))
    p.set_defaults(handler=_cmd_ric)

    p = sub.add_parser("drip", parents=[common],
                       help="duplicate isometry constant of a seeded ensemble")
    for flag in ("--m", "--n", "--k", "--sample-trials", "--budget"):
        p.add_argument(flag, type=int, default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--mode", default=None, choices=("exact", "sampled"))
    p.set_defaults(handler=_cmd_drip)

    p = sub.add_parser("bounds", parents=[common],
                       help="evaluate recovery error-bound constants")
    p.add_argument("--kind", default=None,
                   choices=("sparse", "compressible", "baseline"))
    p.add_argument("--delta-bar", type=float, default=None)
    p.add_argument("--r", type=float, default=None)
    p.add_argument("--psi-norm", type=float, default=None)
    p.add_argument("--k", type=int, default=None)
    p.add_argument("--delta", type=float, default=None)
    p.add_argument("--eps-ratio", type=float, default=None)
    p.set_defaults(handler=_cmd_bounds)

    p = sub.add_parser("doa", parents=[common],
                       help="two-source direction estimation Monte Carlo")
    p.add_argument("--m", type=int, default=None)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--format", default=None, choices=("csv", "keyvalue"))
    p.set_defaults(handler=_cmd_doa)

    p = sub.add_parser("sweep", parents=[common],
                       help="run a parameter sweep or a named preset")
    p.add_argument("--preset", default=None, choices=preset_names())
    for flag, typ in (("--n", int), ("--m", int), ("--k", int),
                      ("--r", float), ("--epsilon", float),
                      ("--trials", int), ("--fail-threshold", float)):
        p.add_argument(flag, type=typ, default=None)
    p.add_argument("--signal-kind", default=None,
                   choices=("unit-spikes", "positive-spikes", "compressible"))
    p.add_argument("--strategies", default=None)
    p.add_argument("--sweep-param", default=None, choices=("epsilon", "r", "m"))
    p.add_argument("--sweep-values", default=None,
                   help="comma list of sweep values")
    p.add_argument("--format", default=None, choices=("csv", "keyvalue"))
    p.set_defaults(handler=_cmd_sweep)

    p = sub.add_parser("plot", parents=[common],
                       help="render an exported results CSV to vector graphics")
    p.add_argument("--data", default=None, help="results CSV from export")
    p.set_defaults(handler=_cmd_plot)

    return parser


def main(argv: list[str] | None = None) -> int:
    """Entry point; returns the process exit code."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if not exc.code else 1
    try:
        config = _load_config(args.config)
        return args.handler(args, config)
    except (ValueError, TypeError, KeyError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
