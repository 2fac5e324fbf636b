"""Monte Carlo engine for the two simulation scenarios.

A scenario run is a grid of cells, one per (model, difficulty C, signal
fraction p).  Inside a cell the variance inflation is always derived from
the difficulty calibration (u from C and v), every requested procedure is
resolved to either a fixed threshold or a step-up level, and `replicates`
independent datasets are generated, decided, and counted.  Replicates are
embarrassingly parallel; each one owns a counter-derived substream keyed
by (cell index, replicate index), and the reduction runs in replicate
order, so results are identical whatever the worker count.

Datasets are never retained: a replicate reduces to one loss/error tuple
per procedure before the next one is drawn.
"""

from __future__ import annotations

import enum
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from functools import partial
from multiprocessing import get_context
from typing import Sequence

import numpy as np

from .distributions import TailModel, sample
from .procedures import bh_sweep, decide_fixed, error_counts, pvalues
from .regime import (
    TestingProblem,
    c_from_c0,
    compute_regime,
    optimal_alpha,
    u_from_difficulty,
)
from .thresholds import (
    ThresholdResult,
    ThresholdStatus,
    bfdr_threshold,
    gw_threshold,
    oracle_threshold,
)


class CellError(RuntimeError):
    """A cell whose derived parameters break the framework's assumptions."""


class Scenario(enum.Enum):
    RISK_RATIO_VS_ALPHA = "risk-ratio-vs-alpha"
    ERROR_RATES_VS_P = "error-rates-vs-p"


_PROCEDURE_KINDS = ("oracle", "bh", "bh-alpha-inf", "bh-log", "bfdr", "gw")


@dataclass(frozen=True)
class ProcedureSpec:
    """One requested decision rule.

    ``alpha`` parameterizes the level-based kinds: a number pins the rule
    at that level, None makes it sweep the config's alpha grid.  The
    oracle and the two derived-level rules (alpha-inf, 1/log m) take no
    alpha.
    """

    kind: str
    alpha: float | None = None

    def __post_init__(self) -> None:
        if self.kind not in _PROCEDURE_KINDS:
            raise ValueError(f"unknown procedure kind {self.kind!r}")
        if self.kind in ("oracle", "bh-alpha-inf", "bh-log"):
            if self.alpha is not None:
                raise ValueError(f"{self.kind} does not take an alpha")
        elif self.alpha is not None and not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0, 1)")

    def label(self) -> str:
        if self.alpha is not None:
            return f"{self.kind}@{self.alpha:g}"
        return self.kind


@dataclass(frozen=True)
class ExperimentConfig:
    """Full description of one scenario run.

    ``models`` crosses with ``c_grid`` to form the cells (the six-cell
    grids pair two tail indices with three difficulties).  ``workers``
    None defers to the ABOS_THREADS environment variable, defaulting to 1.
    """

    models: tuple[TailModel, ...]
    scenario: Scenario
    m: int
    replicates: int
    seed: int
    c_grid: tuple[float, ...]
    alpha_grid: tuple[float, ...] = ()
    p_grid: tuple[float, ...] = ()
    delta0: float = 1.0
    delta_a: float = 1.0
    procedures: tuple[ProcedureSpec, ...] = (
        ProcedureSpec("oracle"),
        ProcedureSpec("bh"),
    )
    workers: int | None = None

    def __post_init__(self) -> None:
        if not self.models:
            raise ValueError("at least one tail model is required")
        if self.m < 1 or self.replicates < 1:
            raise ValueError("m and replicates must be at least 1")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit nonnegative integer")
        if not self.c_grid or any(c <= 0 for c in self.c_grid):
            raise ValueError("c_grid must be nonempty and positive")
        if any(not 0.0 < a < 1.0 for a in self.alpha_grid):
            raise ValueError("alpha grid values must lie in (0, 1)")
        if any(not 0.0 < p < 1.0 for p in self.p_grid):
            raise ValueError("p grid values must lie in (0, 1)")
        if not (self.delta0 > 0 and self.delta_a > 0):
            raise ValueError("loss weights must be positive")
        if not self.procedures:
            raise ValueError("at least one procedure is required")
        if self.scenario is Scenario.RISK_RATIO_VS_ALPHA and not self.alpha_grid:
            raise ValueError("the risk-ratio scenario needs an alpha grid")
        if self.scenario is Scenario.ERROR_RATES_VS_P and not self.p_grid:
            raise ValueError("the error-rates scenario needs a p grid")


@dataclass(frozen=True)
class Cell:
    """One (model, difficulty, signal fraction) grid point."""

    model: TailModel
    c: float
    p: float
    index: int


@dataclass(frozen=True)
class ResultRecord:
    """Aggregated Monte Carlo outcome of one procedure in one cell.

    ``alpha`` is nan for the oracle (it has no level).  Standard errors
    are sample standard deviation over sqrt(replicates), 0.0 when a
    single replicate leaves no spread to estimate.
    """

    dist: str
    gamma: float
    c: float
    m: int
    p: float
    alpha: float
    procedure: str
    replicates: int
    risk_mean: float
    risk_se: float
    mp_mean: float
    mp_se: float
    p1_mean: float
    p1_se: float
    p2_mean: float
    p2_se: float


def default_alpha_grid() -> tuple[float, ...]:
    """30 levels: 15 geometric through 0.25, then 15 linear up to 0.95."""
    low = np.geomspace(0.001, 0.25, 15)
    high = np.linspace(0.25, 0.95, 16)[1:]
    return tuple(float(a) for a in np.concatenate([low, high]))


def generate_dataset(
    model: TailModel, problem: TestingProblem, stream: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Draw (truth, X): Bernoulli(p) signals at scale sigma1, rest sigma0."""
    truth = stream.random(problem.m) < problem.p
    x = sample(model, problem.sigma0, problem.m, stream)
    if problem.p > 0.0:
        x = np.where(truth, x * math.sqrt(problem.theta), x)
    return truth, x


def _resolve_workers(config: ExperimentConfig) -> int:
    if config.workers is not None:
        return max(1, config.workers)
    return max(1, int(os.environ.get("ABOS_THREADS", "1")))


@dataclass(frozen=True)
class _RuleSlot:
    """One output row in the making: a procedure resolved inside a cell."""

    label: str
    alpha: float  # nan for the oracle
    threshold: ThresholdResult | None  # None for step-up rules


@dataclass(frozen=True)
class _CellPlan:
    model: TailModel
    problem: TestingProblem
    seed: int
    cell_index: int
    slots: tuple[_RuleSlot, ...]


def _replicate_metrics(plan: _CellPlan, rep: int) -> tuple[tuple[float, ...], ...]:
    """(loss, MP, P1, P2) per slot for one replicate; dataset not retained."""
    seq = np.random.SeedSequence(entropy=plan.seed, spawn_key=(plan.cell_index, rep))
    rng = np.random.default_rng(seq)
    problem = plan.problem
    truth, x = generate_dataset(plan.model, problem, rng)
    z = np.abs(x) / problem.sigma0
    m = problem.m
    n_signals = int(np.count_nonzero(truth))
    n_nulls = m - n_signals

    bh_alphas = [s.alpha for s in plan.slots if s.threshold is None]
    swept = []
    if bh_alphas:
        swept = bh_sweep(
            pvalues(plan.model, z),
            bh_alphas,
            truth=truth,
            delta0=problem.delta0,
            delta_a=problem.delta_a,
        )
    swept_iter = iter(swept)

    out = []
    for slot in plan.slots:
        if slot.threshold is None:
            summary, _ = next(swept_iter)
        else:
            decisions = decide_fixed(z, slot.threshold)
            summary = error_counts(decisions, truth, problem.delta0, problem.delta_a)
        v = summary.false_rejections
        t = summary.missed_signals
        out.append(
            (
                summary.realized_loss,
                (v + t) / m,
                v / max(n_nulls, 1),
                t / max(n_signals, 1),
            )
        )
    return tuple(out)


def _mean_se(values: Sequence[float]) -> tuple[float, float]:
    arr = np.asarray(values, dtype=float)
    mean = float(arr.mean())
    if arr.size < 2:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / math.sqrt(arr.size))


def _problem_for_cell(config: ExperimentConfig, cell: Cell) -> TestingProblem:
    delta = config.delta0 / config.delta_a
    v = delta * (1.0 - cell.p) / cell.p
    u = u_from_difficulty(cell.model, cell.c, v)
    return TestingProblem(
        m=config.m,
        p=cell.p,
        sigma0=1.0,
        u=u,
        delta0=config.delta0,
        delta_a=config.delta_a,
    )


def _resolve_slots(
    config: ExperimentConfig,
    cell: Cell,
    problem: TestingProblem,
    omega_opt: ThresholdResult,
) -> tuple[_RuleSlot, ...]:
    regime = compute_regime(cell.model, cell.c, delta_inf=config.delta0 / config.delta_a)
    slots: list[_RuleSlot] = []
    for spec in config.procedures:
        if spec.kind == "oracle":
            slots.append(_RuleSlot("oracle", math.nan, omega_opt))
        elif spec.kind == "bh-alpha-inf":
            slots.append(_RuleSlot(spec.label(), optimal_alpha(regime), None))
        elif spec.kind == "bh-log":
            slots.append(_RuleSlot(spec.label(), 1.0 / math.log(config.m), None))
        elif spec.kind == "bh":
            alphas = [spec.alpha] if spec.alpha is not None else list(config.alpha_grid)
            slots.extend(_RuleSlot(spec.label(), float(a), None) for a in alphas)
        else:  # bfdr / gw: fixed thresholds solved once per cell
            solver = bfdr_threshold if spec.kind == "bfdr" else gw_threshold
            alphas = [spec.alpha] if spec.alpha is not None else list(config.alpha_grid)
            for a in alphas:
                slots.append(
                    _RuleSlot(spec.label(), float(a), solver(cell.model, problem, float(a)))
                )
    return tuple(slots)


def run_cell(config: ExperimentConfig, cell: Cell) -> list[ResultRecord]:
    """All requested procedures on one cell, aggregated over replicates."""
    problem = _problem_for_cell(config, cell)
    omega_opt = oracle_threshold(cell.model, problem)
    if omega_opt.status is not ThresholdStatus.INTERIOR:
        raise CellError(
            f"oracle threshold is {omega_opt.status.value} for "
            f"{cell.model.kind.value} gamma={cell.model.gamma:g} C={cell.c:g} "
            f"p={cell.p:g} (v={problem.v:g}, theta={problem.theta:g})"
        )
    slots = _resolve_slots(config, cell, problem, omega_opt)
    plan = _CellPlan(cell.model, problem, config.seed, cell.index, slots)

    workers = _resolve_workers(config)
    task = partial(_replicate_metrics, plan)
    reps = range(config.replicates)
    if workers == 1:
        per_rep = [task(r) for r in reps]
    else:
        # fork keeps the plan shared; map preserves replicate order, which
        # pins the reduction order and with it the output bytes
        with ProcessPoolExecutor(
            max_workers=workers, mp_context=get_context("fork")
        ) as pool:
            chunk = max(1, config.replicates // (workers * 4))
            per_rep = list(pool.map(task, reps, chunksize=chunk))

    records = []
    for i, slot in enumerate(slots):
        loss, mp, p1, p2 = (np.asarray([rep[i][j] for rep in per_rep]) for j in range(4))
        risk_mean, risk_se = _mean_se(loss)
        mp_mean, mp_se = _mean_se(mp)
        p1_mean, p1_se = _mean_se(p1)
        p2_mean, p2_se = _mean_se(p2)
        records.append(
            ResultRecord(
                dist=cell.model.kind.value,
                gamma=cell.model.gamma,
                c=cell.c,
                m=config.m,
                p=cell.p,
                alpha=slot.alpha,
                procedure=slot.label,
                replicates=config.replicates,
                risk_mean=risk_mean,
                risk_se=risk_se,
                mp_mean=mp_mean,
                mp_se=mp_se,
                p1_mean=p1_mean,
                p1_se=p1_se,
                p2_mean=p2_mean,
                p2_se=p2_se,
            )
        )
    return records


SCENARIO1_COLUMNS = (
    "dist",
    "gamma",
    "C",
    "m",
    "p",
    "alpha",
    "procedure",
    "replicates",
    "risk_mean",
    "risk_se",
    "risk_ratio",
    "p2_mean",
    "p2_se",
    "alpha_inf",
    "alpha_log",
    "beta_star_inf",
)

SCENARIO2_COLUMNS = (
    "dist",
    "gamma",
    "C",
    "m",
    "p",
    "procedure",
    "replicates",
    "mp_mean",
    "mp_se",
    "p1_mean",
    "p1_se",
    "p2_mean",
    "p2_se",
)


def _cells_for(config: ExperimentConfig, p_values: Sequence[float]) -> list[Cell]:
    cells = []
    for model in config.models:
        for c in config.c_grid:
            for p in p_values:
                cells.append(Cell(model, float(c), float(p), len(cells)))
    return cells


def _prepared(config: ExperimentConfig) -> ExperimentConfig:
    """Scenario-normalized config: the risk-ratio scenario always runs
    the oracle, since it is every row's ratio denominator."""
    if config.scenario is Scenario.RISK_RATIO_VS_ALPHA and not any(
        s.kind == "oracle" for s in config.procedures
    ):
        return replace(
            config, procedures=(ProcedureSpec("oracle"),) + config.procedures
        )
    return config


def scenario_cells(config: ExperimentConfig) -> list[Cell]:
    """The cell grid a scenario run visits, in execution order.

    The risk-ratio scenario pins the signal fraction to m**-0.5; the
    error-rates scenario crosses the configured p grid in.
    """
    if config.scenario is Scenario.RISK_RATIO_VS_ALPHA:
        p_values: Sequence[float] = (config.m**-0.5,)
    else:
        p_values = config.p_grid
    return _cells_for(config, p_values)


def cell_rows(config: ExperimentConfig, cell: Cell) -> list[dict]:
    """CSV-schema rows for one cell of whichever scenario is configured."""
    cfg = _prepared(config)
    if cfg.scenario is Scenario.RISK_RATIO_VS_ALPHA:
        return _risk_ratio_rows(cfg, cell)
    return _error_rate_rows(cfg, cell)


def _risk_ratio_rows(config: ExperimentConfig, cell: Cell) -> list[dict]:
    regime = compute_regime(cell.model, cell.c, delta_inf=config.delta0 / config.delta_a)
    alpha_inf = optimal_alpha(regime)
    alpha_log = 1.0 / math.log(config.m)
    records = run_cell(config, cell)
    oracle_mean = next(r.risk_mean for r in records if r.procedure == "oracle")
    rows: list[dict] = []
    for record in records:
        if record.procedure == "oracle":
            row_alphas: Sequence[float] = config.alpha_grid
            ratio = 1.0
        else:
            row_alphas = (record.alpha,)
            ratio = record.risk_mean / oracle_mean if oracle_mean > 0 else math.nan
        for alpha in row_alphas:
            rows.append(
                {
                    "dist": record.dist,
                    "gamma": record.gamma,
                    "C": record.c,
                    "m": record.m,
                    "p": record.p,
                    "alpha": float(alpha),
                    "procedure": record.procedure,
                    "replicates": record.replicates,
                    "risk_mean": record.risk_mean,
                    "risk_se": record.risk_se,
                    "risk_ratio": ratio,
                    "p2_mean": record.p2_mean,
                    "p2_se": record.p2_se,
                    "alpha_inf": alpha_inf,
                    "alpha_log": alpha_log,
                    "beta_star_inf": regime.beta_star_inf,
                }
            )
    return rows


def _error_rate_rows(config: ExperimentConfig, cell: Cell) -> list[dict]:
    rows: list[dict] = []
    for record in run_cell(config, cell):
        rows.append(
            {
                "dist": record.dist,
                "gamma": record.gamma,
                "C": record.c,
                "m": record.m,
                "p": record.p,
                "procedure": record.procedure,
                "replicates": record.replicates,
                "mp_mean": record.mp_mean,
                "mp_se": record.mp_se,
                "p1_mean": record.p1_mean,
                "p1_se": record.p1_se,
                "p2_mean": record.p2_mean,
                "p2_se": record.p2_se,
            }
        )
    return rows


def scenario_risk_ratio(config: ExperimentConfig) -> list[dict]:
    """Rows of risk ratio (procedure / oracle) against the level grid.

    The signal fraction is pinned to m**-0.5.  Every procedure gets one
    row per grid level; the oracle's statistics do not depend on the
    level, so its rows repeat them with ratio exactly 1.  Reference
    levels (alpha_inf, 1/log m, beta_star_inf) ride along as columns.
    """
    if config.scenario is not Scenario.RISK_RATIO_VS_ALPHA:
        raise ValueError("config is not a risk-ratio-vs-alpha scenario")
    return [row for cell in scenario_cells(config) for row in cell_rows(config, cell)]


def scenario_error_rates(config: ExperimentConfig) -> list[dict]:
    """Rows of MP / P1 / P2 against the signal-fraction grid at fixed m."""
    if config.scenario is not Scenario.ERROR_RATES_VS_P:
        raise ValueError("config is not an error-rates-vs-p scenario")
    return [row for cell in scenario_cells(config) for row in cell_rows(config, cell)]


def concentration_diagnostic(
    model: TailModel,
    problem: TestingProblem,
    alpha: float,
    epsilon: float,
    replicates: int,
    seed: int = 0,
) -> float:
    """Monte Carlo P(|omega_bh / omega_opt - 1| > epsilon) for step-up at alpha.

    Replicates that reject nothing have no realized threshold and count as
    exceedances.  Compare the estimate against 1/v: the rule tracks the
    oracle when the probability is small on that scale.
    """
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    opt = oracle_threshold(model, problem)
    if opt.status is not ThresholdStatus.INTERIOR:
        raise CellError(f"oracle threshold is {opt.status.value}")
    exceed = 0
    for rep in range(replicates):
        seq = np.random.SeedSequence(entropy=seed, spawn_key=(0, rep))
        rng = np.random.default_rng(seq)
        truth, x = generate_dataset(model, problem, rng)
        z = np.abs(x) / problem.sigma0
        (summary, omega_hat), = bh_sweep(pvalues(model, z), [alpha], z=z)
        if summary.rejections == 0 or abs(omega_hat / opt.omega - 1.0) > epsilon:
            exceed += 1
    return exceed / replicates


def estimate_c0(
    observations,
    model: TailModel,
    delta_inf: float,
    a1: float,
    a2: float,
    b: float,
) -> tuple[float, float]:
    """Window-count calibration estimate (c0_hat, c_hat) from raw data.

    c0_hat = (delta_inf * m0 / m1) / [(b/a1)**gamma - (b/a2)**gamma] with
    m1 = #{|X| > b} and m0 = #{a1 < |X| < a2}; c_hat inverts the
    difficulty map at c0_hat, which fails when the estimate falls outside
    the attainable range of the family.
    """
    if not 0.0 < a1 < a2 < b:
        raise ValueError("windows must satisfy 0 < a1 < a2 < b")
    if not delta_inf > 0:
        raise ValueError("delta_inf must be positive")
    mag = np.abs(np.asarray(observations, dtype=float))
    m1 = int(np.count_nonzero(mag > b))
    if m1 == 0:
        raise ValueError("no observations beyond b; the tail count is degenerate")
    m0 = int(np.count_nonzero((mag > a1) & (mag < a2)))
    g = model.gamma
    c0_hat = (delta_inf * m0 / m1) / ((b / a1) ** g - (b / a2) ** g)
    return c0_hat, c_from_c0(model, c0_hat)
