"""Seeded Monte Carlo experiment harness.

Runs recovery strategies over randomly drawn problem instances, sweeps one
model parameter at a time with paired seeds (every sweep value sees the
same per-trial random draws), aggregates errors and effectiveness rates,
and serializes results to CSV or key-value reports. Ships named presets
for the standard experiment layouts at paper scale and at desk scale
(reduced trial counts for continuous integration).

The entire output is a pure function of the configuration, including its
master seed; wall-clock times are recorded but excluded from equality.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from .analysis import error_metrics
from .doa import (
    build_grid_model,
    estimate_doa,
    gen_two_source_scene,
    grid_truth,
    simulate_scene,
    steering_vector,
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
from .recovery import (
    effectiveness_check,
    recover_aa_p_bpdn,
    recover_nominal_bpdn,
    recover_oracle_bpdn,
    recover_pp_bpdn,
    recover_relax_check,
    recover_tps_bpdn,
)
from .solvers import SocL1Problem, solve_socl1

__all__ = [
    "STRATEGY_NAMES",
    "SWEEP_CSV_HEADER",
    "DOA_CSV_HEADER",
    "SPECTRA_CSV_HEADER",
    "ExperimentConfig",
    "DoaConfig",
    "SpectraConfig",
    "StrategyOutcome",
    "TrialRecord",
    "SweepAggregate",
    "SweepResult",
    "DoaRunResult",
    "SpectraResult",
    "run_trial",
    "run_sweep",
    "run_doa",
    "run_spectra",
    "run_preset",
    "get_preset",
    "preset_names",
    "export_results",
    "import_results",
]

STRATEGY_NAMES = ("oracle", "nominal", "tps", "aa", "pp", "relax")

SWEEP_CSV_HEADER = (
    "sweep_param",
    "value",
    "strategy",
    "mean_signal_err",
    "mean_beta_err",
    "trials",
    "effective_rate",
)
DOA_CSV_HEADER = ("trial", "source", "theta_true", "theta_hat", "error", "m", "n")
SPECTRA_CSV_HEADER = ("series", "theta", "magnitude")

_SWEEPABLE = ("epsilon", "r", "m")


def _fmt(value: float) -> str:
    return format(float(value), ".17g")


@dataclass(frozen=True)
class ExperimentConfig:
    """One recovery experiment: model sizes, noise, trials, strategies.

    Scalar fields hold the operating point; a sweep replaces exactly one
    of ``epsilon``, ``r`` or ``m`` by each entry of ``sweep_values`` in
    turn, reusing the same master seed so sweep points are paired.
    """

    n: int
    m: int
    k: int
    r: float
    epsilon: float
    trials: int
    master_seed: int
    strategies: tuple[str, ...] = ("oracle", "nominal", "tps", "aa")
    signal_kind: str = "unit-spikes"
    sweep_param: str | None = None
    sweep_values: tuple[float, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "strategies", tuple(self.strategies))
        object.__setattr__(
            self, "sweep_values", tuple(float(v) for v in self.sweep_values)
        )
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if not 1 <= self.k <= self.n:
            raise ValueError("k must satisfy 1 <= k <= n")
        if self.r < 0 or self.epsilon < 0:
            raise ValueError("r and epsilon must be nonnegative")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        unknown = set(self.strategies) - set(STRATEGY_NAMES)
        if unknown:
            raise ValueError(f"unknown strategies: {sorted(unknown)}")
        if len(set(self.strategies)) != len(self.strategies):
            raise ValueError("strategies must not repeat")
        if (self.sweep_param is None) != (len(self.sweep_values) == 0):
            raise ValueError("sweep_param and sweep_values go together")
        if self.sweep_param is not None and self.sweep_param not in _SWEEPABLE:
            raise ValueError(f"sweep_param must be one of {_SWEEPABLE}")


@dataclass(frozen=True)
class DoaConfig:
    """Direction-finding experiment over the two-source band protocol.

    Each trial draws one source uniformly on [2/n, 4/n] and one on
    [12/n, 14/n], both with unit amplitude and random phase, then
    estimates both positions from a single noise-free snapshot.
    """

    m: int
    n: int
    trials: int
    master_seed: int

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError("m must be at least 2")
        if self.n < 2 or self.n % 2 != 0:
            raise ValueError("n must be an even integer >= 2")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")


@dataclass(frozen=True)
class SpectraConfig:
    """Single-scene spectrum comparison: grid model versus a denser plain grid.

    The same snapshot is recovered once with the perturbation-aware model
    on an ``n_model``-point grid and once by plain l1 recovery on an
    ``n_standard``-point grid of steering vectors, for qualitative
    comparison of the recovered magnitude spectra.
    """

    m: int
    n_model: int
    n_standard: int
    master_seed: int

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError("m must be at least 2")
        for name in ("n_model", "n_standard"):
            value = getattr(self, name)
            if value < 2 or value % 2 != 0:
                raise ValueError(f"{name} must be an even integer >= 2")


@dataclass(frozen=True)
class StrategyOutcome:
    """Per-strategy results of one trial.

    ``wall_time`` is informational and excluded from equality so that
    identical reruns compare equal. A failed solve keeps ``failed=True``
    with the error message; its numeric fields are NaN and it counts as
    not effective.
    """

    strategy: str
    signal_err: float
    beta_err: float
    support_match: float
    iterations: int
    effective: bool
    l1_gap: float
    l1_trace: tuple[float, ...]
    fallback: bool = False
    failed: bool = False
    message: str = ""
    wall_time: float = field(default=0.0, compare=False)


@dataclass(frozen=True)
class TrialRecord:
    """All strategy outcomes for one trial; every strategy saw the same data."""

    index: int
    master_seed: int
    outcomes: dict[str, StrategyOutcome]


@dataclass(frozen=True)
class SweepAggregate:
    """Means over the trials of one (sweep value, strategy) cell.

    Means are taken over non-failed trials; ``failures`` counts the rest
    and failed trials still enter the effectiveness denominator.
    """

    mean_signal_err: float
    mean_beta_err: float
    trials: int
    effective_rate: float
    failures: int = 0


@dataclass(frozen=True)
class SweepResult:
    """Aggregated sweep with optional per-trial records.

    ``table`` maps (sweep value, strategy name) to a SweepAggregate.
    Results imported from CSV carry no config and no records.
    """

    sweep_param: str
    values: tuple[float, ...]
    strategies: tuple[str, ...]
    trials: int
    master_seed: int | None
    table: dict[tuple[float, str], SweepAggregate]
    config: ExperimentConfig | None = None
    records: tuple[tuple[TrialRecord, ...], ...] = field(
        default=(), repr=False
    )

    def mean_signal_errors(self, strategy: str) -> np.ndarray:
        return np.array(
            [self.table[(v, strategy)].mean_signal_err for v in self.values]
        )

    def mean_beta_errors(self, strategy: str) -> np.ndarray:
        return np.array(
            [self.table[(v, strategy)].mean_beta_err for v in self.values]
        )

    def effective_rates(self, strategy: str) -> np.ndarray:
        return np.array(
            [self.table[(v, strategy)].effective_rate for v in self.values]
        )


@dataclass(frozen=True, eq=False)
class DoaRunResult:
    """Per-trial direction estimates of the two-source protocol.

    Arrays have shape (trials, 2) with sources sorted ascending per trial;
    ``errors`` is estimate minus truth in matched order.
    """

    m: int
    n: int
    trials: int
    master_seed: int | None
    theta_true: np.ndarray
    theta_hat: np.ndarray
    errors: np.ndarray
    effective: np.ndarray
    iterations: np.ndarray
    config: DoaConfig | None = None


@dataclass(frozen=True, eq=False)
class SpectraResult:
    """Recovered magnitude spectra of one scene on two grids."""

    model_grid: np.ndarray
    model_magnitudes: np.ndarray
    standard_grid: np.ndarray
    standard_magnitudes: np.ndarray
    theta_true: np.ndarray
    source_magnitudes: np.ndarray
    config: SpectraConfig | None = None


def _run_strategy(name, ens, y, epsilon, beta_o, eps_mult):
    if name == "oracle":
        return recover_oracle_bpdn(ens, y, epsilon, beta_o)
    if name == "nominal":
        return recover_nominal_bpdn(ens, y, epsilon, eps_mult)
    if name == "tps":
        return recover_tps_bpdn(ens, y, epsilon)
    if name == "aa":
        return recover_aa_p_bpdn(ens, y, epsilon)
    if name == "pp":
        return recover_pp_bpdn(ens, y, epsilon)
    if name == "relax":
        return recover_relax_check(ens, y, epsilon)
    raise ValueError(f"unknown strategy {name!r}")


def _failed_outcome(name: str, message: str, wall: float) -> StrategyOutcome:
    return StrategyOutcome(
        strategy=name,
        signal_err=math.nan,
        beta_err=math.nan,
        support_match=math.nan,
        iterations=0,
        effective=False,
        l1_gap=math.nan,
        l1_trace=(),
        failed=True,
        message=message,
        wall_time=wall,
    )


def run_trial(cfg: ExperimentConfig, index: int) -> TrialRecord:
    """Draw one problem instance and run every configured strategy on it.

    The instance is a pure function of ``(cfg.master_seed, index)`` and
    the scalar model fields; all strategies consume identical data. The
    inflated-ball strategy receives the exact mismatch energy computed
    from the true perturbation, which real deployments cannot observe.
    Solver failures are recorded per strategy and never abort the trial.
    """
    seed = cfg.master_seed
    ens = gen_gaussian_ensemble(cfg.m, cfg.n, cfg.r, (seed, index, ROLE_ENSEMBLE))
    x_o = gen_signal(cfg.n, cfg.k, cfg.signal_kind, (seed, index, ROLE_SIGNAL))
    beta_o = gen_perturbation(cfg.n, cfg.r, (seed, index, ROLE_PERTURBATION))
    e = gen_noise(cfg.m, cfg.epsilon, (seed, index, ROLE_NOISE))
    gt = GroundTruth(x_o=x_o, beta_o=beta_o, e=e, epsilon=cfg.epsilon, k=cfg.k)
    y = measure(ens, gt).y
    eps_mult = float(np.linalg.norm(ens.B @ (beta_o * x_o)))

    outcomes: dict[str, StrategyOutcome] = {}
    for name in cfg.strategies:
        start = time.perf_counter()
        try:
            result = _run_strategy(name, ens, y, cfg.epsilon, beta_o, eps_mult)
        except Exception as exc:
            outcomes[name] = _failed_outcome(
                name, f"{type(exc).__name__}: {exc}", time.perf_counter() - start
            )
            continue
        wall = time.perf_counter() - start
        metrics = error_metrics(gt, result, cfg.k)
        check = effectiveness_check(result, ens, y, cfg.epsilon, x_o)
        outcomes[name] = StrategyOutcome(
            strategy=name,
            signal_err=metrics["signal_err"],
            beta_err=metrics["beta_err"],
            support_match=metrics["support_match"],
            iterations=result.iterations,
            effective=check["effective"],
            l1_gap=check["l1_gap"],
            l1_trace=tuple(float(v) for v in result.l1_trace),
            fallback=result.fallback,
            wall_time=wall,
        )
    return TrialRecord(index=index, master_seed=seed, outcomes=outcomes)


def _materialize(cfg: ExperimentConfig, value: float) -> ExperimentConfig:
    """Config at one sweep point: swept field replaced, sweep cleared."""
    updates = {"sweep_param": None, "sweep_values": ()}
    if cfg.sweep_param == "m":
        updates["m"] = int(round(value))
    else:
        updates[cfg.sweep_param] = float(value)
    return replace(cfg, **updates)


def _aggregate(
    records: tuple[TrialRecord, ...], strategies: tuple[str, ...]
) -> dict[str, SweepAggregate]:
    out = {}
    for name in strategies:
        cells = [rec.outcomes[name] for rec in records]
        good = [c for c in cells if not c.failed]
        out[name] = SweepAggregate(
            mean_signal_err=(
                float(np.mean([c.signal_err for c in good])) if good else math.nan
            ),
            mean_beta_err=(
                float(np.mean([c.beta_err for c in good])) if good else math.nan
            ),
            trials=len(cells),
            effective_rate=sum(c.effective for c in cells) / len(cells),
            failures=len(cells) - len(good),
        )
    return out


def run_sweep(cfg: ExperimentConfig, workers: int = 1) -> SweepResult:
    """Run the configured sweep: R paired trials at every sweep value.

    Every sweep value reuses the master seed, so trial ``i`` of one value
    differs from trial ``i`` of another only through the swept parameter.
    With ``workers > 1`` trials run in a process pool; aggregation always
    walks trials in index order, so the result is identical either way.
    """
    if cfg.sweep_param is None or not cfg.sweep_values:
        raise ValueError("config has no sweep axis; set sweep_param and values")
    points = [_materialize(cfg, v) for v in cfg.sweep_values]
    per_value: list[tuple[TrialRecord, ...]] = []
    if workers <= 1:
        for sub in points:
            per_value.append(
                tuple(run_trial(sub, i) for i in range(cfg.trials))
            )
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [
                [pool.submit(run_trial, sub, i) for i in range(cfg.trials)]
                for sub in points
            ]
            for row in futures:
                per_value.append(tuple(f.result() for f in row))
    table: dict[tuple[float, str], SweepAggregate] = {}
    for value, records in zip(cfg.sweep_values, per_value):
        for name, agg in _aggregate(records, cfg.strategies).items():
            table[(value, name)] = agg
    return SweepResult(
        sweep_param=cfg.sweep_param,
        values=cfg.sweep_values,
        strategies=cfg.strategies,
        trials=cfg.trials,
        master_seed=cfg.master_seed,
        table=table,
        config=cfg,
        records=tuple(per_value),
    )


def run_doa(cfg: DoaConfig) -> DoaRunResult:
    """Monte Carlo direction estimation over the two-source protocol.

    Scenes are drawn per trial from ``(master_seed, trial, signal role)``;
    the grid model is fixed across trials. Errors pair sorted estimates
    with sorted truths.
    """
    model = build_grid_model(cfg.m, cfg.n, sources=2, s_norm=math.sqrt(2.0))
    theta_true = np.zeros((cfg.trials, 2))
    theta_hat = np.zeros((cfg.trials, 2))
    effective = np.zeros(cfg.trials, dtype=bool)
    iterations = np.zeros(cfg.trials, dtype=int)
    for i in range(cfg.trials):
        scene = gen_two_source_scene(cfg.n, (cfg.master_seed, i, ROLE_SIGNAL))
        y = simulate_scene(scene, cfg.m)
        est = estimate_doa(y, model)
        order = np.argsort(scene.theta)
        theta_true[i] = scene.theta[order]
        theta_hat[i] = est.theta_hat
        x_o, _ = grid_truth(scene, model)
        check = effectiveness_check(
            est.result, model.ens, y, model.eps_model, x_o
        )
        effective[i] = check["effective"]
        iterations[i] = est.result.iterations
    return DoaRunResult(
        m=cfg.m,
        n=cfg.n,
        trials=cfg.trials,
        master_seed=cfg.master_seed,
        theta_true=theta_true,
        theta_hat=theta_hat,
        errors=theta_hat - theta_true,
        effective=effective,
        iterations=iterations,
        config=cfg,
    )


def run_spectra(cfg: SpectraConfig) -> SpectraResult:
    """Recover one scene on the perturbation-aware grid and a denser plain grid.

    The plain run solves l1 recovery over steering vectors on the
    ``n_standard`` grid with a tolerance equal to the worst-case zeroth
    order grid mismatch (derivative norm over grid half-spacing, summed
    over sources); the aware run uses the model's own tolerance.
    """
    scene = gen_two_source_scene(cfg.n_model, (cfg.master_seed, 0, ROLE_SIGNAL))
    y = simulate_scene(scene, cfg.m)

    model = build_grid_model(cfg.m, cfg.n_model, sources=2, s_norm=math.sqrt(2.0))
    est = estimate_doa(y, model)

    fine = build_grid_model(cfg.m, cfg.n_standard, sources=2, s_norm=math.sqrt(2.0))
    a_fine = np.stack(
        [steering_vector(cfg.m, t) for t in fine.grid.points], axis=1
    )
    eps_plain = math.sqrt(2.0) * math.sqrt(2.0) * fine.kappa / cfg.n_standard
    plain = solve_socl1(SocL1Problem(a_fine, y, eps_plain))

    return SpectraResult(
        model_grid=model.grid.points.copy(),
        model_magnitudes=np.abs(est.x_hat),
        standard_grid=fine.grid.points.copy(),
        standard_magnitudes=np.abs(plain.x),
        theta_true=np.sort(scene.theta),
        source_magnitudes=np.abs(scene.s[np.argsort(scene.theta)]),
        config=cfg,
    )


def _sweep_values(start: float, stop: float, step: float) -> tuple[float, ...]:
    count = int(round((stop - start) / step)) + 1
    return tuple(round(start + i * step, 10) for i in range(count))


def get_preset(name: str, master_seed: int = 1):
    """Named experiment configuration.

    ``fig2``..``fig5`` are recovery sweeps, ``fig6`` is the direction
    histogram run, ``fig7`` the spectrum comparison. ``-desk`` variants
    cut trials to 10 and thin the sweeps for fast continuous integration.
    """
    four = ("oracle", "nominal", "tps", "aa")
    if name == "fig2":
        return ExperimentConfig(
            n=200, m=80, k=10, r=0.1, epsilon=0.05, trials=50,
            master_seed=master_seed, strategies=four,
            sweep_param="epsilon", sweep_values=_sweep_values(0.05, 2.0, 0.05),
        )
    if name == "fig2-desk":
        return ExperimentConfig(
            n=200, m=80, k=10, r=0.1, epsilon=0.1, trials=10,
            master_seed=master_seed, strategies=four,
            sweep_param="epsilon", sweep_values=(0.1, 0.5, 1.0, 1.5, 2.0),
        )
    if name == "fig3":
        return ExperimentConfig(
            n=200, m=80, k=10, r=0.05, epsilon=0.5, trials=50,
            master_seed=master_seed, strategies=four,
            sweep_param="r", sweep_values=_sweep_values(0.05, 1.0, 0.05),
        )
    if name == "fig3-desk":
        return ExperimentConfig(
            n=200, m=80, k=10, r=0.1, epsilon=0.5, trials=10,
            master_seed=master_seed, strategies=("oracle", "nominal", "aa"),
            sweep_param="r", sweep_values=(0.1, 0.5, 1.0),
        )
    if name == "fig4":
        return ExperimentConfig(
            n=200, m=30, k=10, r=0.1, epsilon=0.2, trials=50,
            master_seed=master_seed, strategies=four,
            sweep_param="m", sweep_values=_sweep_values(30, 100, 5),
        )
    if name == "fig4-desk":
        return ExperimentConfig(
            n=200, m=30, k=10, r=0.1, epsilon=0.2, trials=10,
            master_seed=master_seed, strategies=four,
            sweep_param="m", sweep_values=_sweep_values(30, 100, 10),
        )
    if name == "fig5":
        return ExperimentConfig(
            n=200, m=50, k=10, r=0.1, epsilon=0.0, trials=20,
            master_seed=master_seed, strategies=("pp",),
            signal_kind="positive-spikes",
            sweep_param="epsilon", sweep_values=(0.0,),
        )
    if name == "fig6":
        return DoaConfig(m=30, n=90, trials=100, master_seed=master_seed)
    if name == "fig7":
        return SpectraConfig(
            m=30, n_model=90, n_standard=360, master_seed=master_seed
        )
    raise ValueError(f"unknown preset {name!r}; known: {preset_names()}")


def preset_names() -> tuple[str, ...]:
    return (
        "fig2", "fig2-desk", "fig3", "fig3-desk", "fig4", "fig4-desk",
        "fig5", "fig6", "fig7",
    )


def run_preset(name: str, workers: int = 1, master_seed: int = 1):
    """Run a named preset and return its result object."""
    cfg = get_preset(name, master_seed=master_seed)
    if isinstance(cfg, ExperimentConfig):
        return run_sweep(cfg, workers=workers)
    if isinstance(cfg, DoaConfig):
        return run_doa(cfg)
    return run_spectra(cfg)


def _open_for_write(path: str):
    try:
        return open(path, "w", newline="", encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def _export_sweep_csv(result: SweepResult, path: str) -> None:
    with _open_for_write(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_CSV_HEADER)
        for value in result.values:
            for name in result.strategies:
                agg = result.table[(value, name)]
                writer.writerow(
                    [
                        result.sweep_param,
                        _fmt(value),
                        name,
                        _fmt(agg.mean_signal_err),
                        _fmt(agg.mean_beta_err),
                        agg.trials,
                        _fmt(agg.effective_rate),
                    ]
                )


def _export_doa_csv(result: DoaRunResult, path: str) -> None:
    with _open_for_write(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(DOA_CSV_HEADER)
        for trial in range(result.trials):
            for source in range(result.theta_true.shape[1]):
                writer.writerow(
                    [
                        trial,
                        source,
                        _fmt(result.theta_true[trial, source]),
                        _fmt(result.theta_hat[trial, source]),
                        _fmt(result.errors[trial, source]),
                        result.m,
                        result.n,
                    ]
                )


def _export_spectra_csv(result: SpectraResult, path: str) -> None:
    with _open_for_write(path) as fh:
        writer = csv.writer(fh)
        writer.writerow(SPECTRA_CSV_HEADER)
        for theta, mag in zip(result.model_grid, result.model_magnitudes):
            writer.writerow(["model", _fmt(theta), _fmt(mag)])
        for theta, mag in zip(result.standard_grid, result.standard_magnitudes):
            writer.writerow(["standard", _fmt(theta), _fmt(mag)])
        for theta, mag in zip(result.theta_true, result.source_magnitudes):
            writer.writerow(["true", _fmt(theta), _fmt(mag)])


def _sweep_report(result: SweepResult) -> dict:
    fields: dict = {
        "kind": "sweep",
        "sweep_param": result.sweep_param,
        "values": ",".join(_fmt(v) for v in result.values),
        "strategies": ",".join(result.strategies),
        "trials": result.trials,
    }
    if result.master_seed is not None:
        fields["master_seed"] = result.master_seed
    for value in result.values:
        for name in result.strategies:
            agg = result.table[(value, name)]
            prefix = f"{name}[{_fmt(value)}]"
            fields[f"{prefix}.mean_signal_err"] = agg.mean_signal_err
            fields[f"{prefix}.mean_beta_err"] = agg.mean_beta_err
            fields[f"{prefix}.effective_rate"] = agg.effective_rate
            fields[f"{prefix}.failures"] = agg.failures
    return fields


def _doa_report(result: DoaRunResult) -> dict:
    abs_err = np.abs(result.errors).ravel()
    return {
        "kind": "doa",
        "m": result.m,
        "n": result.n,
        "trials": result.trials,
        "max_abs_error": float(abs_err.max()),
        "median_abs_error": float(np.median(abs_err)),
        "within_grid_cell_rate": float(
            np.mean(abs_err <= 1.0 / result.n)
        ),
        "effective_rate": float(result.effective.mean()),
    }


def export_results(result, path: str, format: str = "csv") -> None:
    """Write a result object to ``path`` as CSV rows or a key-value report.

    Sweep CSV has one row per (sweep value, strategy) under a mandatory
    header, in sweep order then configured strategy order; floats carry
    17 significant digits so re-importing reproduces them exactly.
    """
    if format == "csv":
        if isinstance(result, SweepResult):
            _export_sweep_csv(result, path)
        elif isinstance(result, DoaRunResult):
            _export_doa_csv(result, path)
        elif isinstance(result, SpectraResult):
            _export_spectra_csv(result, path)
        else:
            raise TypeError(f"cannot export {type(result).__name__} as csv")
        return
    if format == "keyvalue":
        from .serialization import format_report

        if isinstance(result, SweepResult):
            fields = _sweep_report(result)
        elif isinstance(result, DoaRunResult):
            fields = _doa_report(result)
        else:
            raise TypeError(
                f"cannot export {type(result).__name__} as keyvalue"
            )
        with _open_for_write(path) as fh:
            fh.write(format_report(fields))
        return
    raise ValueError(f"format must be 'csv' or 'keyvalue', got {format!r}")


def _import_sweep(rows: list[dict]) -> SweepResult:
    values: list[float] = []
    strategies: list[str] = []
    table: dict[tuple[float, str], SweepAggregate] = {}
    sweep_param = rows[0]["sweep_param"]
    trials = 0
    for row in rows:
        value = float(row["value"])
        name = row["strategy"]
        if value not in values:
            values.append(value)
        if name not in strategies:
            strategies.append(name)
        trials = int(row["trials"])
        table[(value, name)] = SweepAggregate(
            mean_signal_err=float(row["mean_signal_err"]),
            mean_beta_err=float(row["mean_beta_err"]),
            trials=trials,
            effective_rate=float(row["effective_rate"]),
        )
    return SweepResult(
        sweep_param=sweep_param,
        values=tuple(values),
        strategies=tuple(strategies),
        trials=trials,
        master_seed=None,
        table=table,
    )


def _import_doa(rows: list[dict]) -> DoaRunResult:
    trials = max(int(row["trial"]) for row in rows) + 1
    sources = max(int(row["source"]) for row in rows) + 1
    theta_true = np.zeros((trials, sources))
    theta_hat = np.zeros((trials, sources))
    for row in rows:
        t, s = int(row["trial"]), int(row["source"])
        theta_true[t, s] = float(row["theta_true"])
        theta_hat[t, s] = float(row["theta_hat"])
    return DoaRunResult(
        m=int(rows[0]["m"]),
        n=int(rows[0]["n"]),
        trials=trials,
        master_seed=None,
        theta_true=theta_true,
        theta_hat=theta_hat,
        errors=theta_hat - theta_true,
        effective=np.zeros(trials, dtype=bool),
        iterations=np.zeros(trials, dtype=int),
    )


def _import_spectra(rows: list[dict]) -> SpectraResult:
    series: dict[str, list[tuple[float, float]]] = {}
    for row in rows:
        series.setdefault(row["series"], []).append(
            (float(row["theta"]), float(row["magnitude"]))
        )
    def unpack(name):
        pairs = series.get(name, [])
        return (
            np.array([p[0] for p in pairs]),
            np.array([p[1] for p in pairs]),
        )
    model_grid, model_mag = unpack("model")
    std_grid, std_mag = unpack("standard")
    true_theta, true_mag = unpack("true")
    return SpectraResult(
        model_grid=model_grid,
        model_magnitudes=model_mag,
        standard_grid=std_grid,
        standard_magnitudes=std_mag,
        theta_true=true_theta,
        source_magnitudes=true_mag,
    )


def import_results(path: str):
    """Read a CSV written by :func:`export_results` back into a result object.

    The header row identifies the result kind. Imported sweeps have no
    config or records; imported direction runs have no effectiveness
    flags (the CSV does not carry them).
    """
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is None:
                raise ValueError(f"no header row in {path}")
            header = tuple(reader.fieldnames)
            rows = list(reader)
    except OSError as exc:
        raise OSError(f"cannot read results from {path}: {exc}") from exc
    if header == SWEEP_CSV_HEADER:
        if not rows:
            raise ValueError(f"no data rows in {path}")
        return _import_sweep(rows)
    if header == DOA_CSV_HEADER:
        if not rows:
            raise ValueError(f"no data rows in {path}")
        return _import_doa(rows)
    if header == SPECTRA_CSV_HEADER:
        return _import_spectra(rows)
    raise ValueError(f"unrecognized results header in {path}: {header}")
