"""Perturbation sweeps through extract -> round -> lift, with log-log exponent fits."""
from __future__ import annotations

import csv
import io
import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import matcore as mc
from . import starpoly as sp
from .games import Strategy
from .instances import Instance, sweep_base
from .lifting import lift_bcs, lift_synchronous, lift_xor, orthogonalize_pvm, synch_assignment_from_bcs
from .rounding import round_representation
from .strategy2rep import extract_bcs, extract_synchronous, extract_xor

log = logging.getLogger(__name__)

PIPELINE_KIND = {"synch": "synchronous", "bcs": "bcs", "xor": "xor"}
PERTURBATIONS = ("local-unitary", "additive-hermitian")
COLUMNS = (
    "delta",
    "trial",
    "rho_defect",
    "atp_defect",
    "f_defect_after_rounding",
    "rounded_rank",
    "lift_input_f_defect",
    "lifted_score",
    "gap",
    "max_generator_distance",
    "functional_value",
    "functional_average",
)
DEFAULT_GRID = (1e-4, 1e-3, 1e-2, 1e-1)


@dataclass
class SweepConfig:
    game: str
    pipeline: str
    delta_grid: tuple = DEFAULT_GRID
    trials_per_delta: int = 20
    seed: int = 0
    perturbation: str = "local-unitary"
    output: str | None = None
    intermediates: str | None = None

    def __post_init__(self):
        self.delta_grid = tuple(float(x) for x in self.delta_grid)
        if self.pipeline not in PIPELINE_KIND:
            raise ValueError(f"unknown pipeline {self.pipeline!r}")
        if self.perturbation not in PERTURBATIONS:
            raise ValueError(f"unknown perturbation {self.perturbation!r}")
        if not self.delta_grid or any(d <= 0 for d in self.delta_grid):
            raise ValueError("deltas must be positive")
        if any(b <= a for a, b in zip(self.delta_grid, self.delta_grid[1:])):
            raise ValueError("deltas must be strictly ascending")
        if self.trials_per_delta < 1:
            raise ValueError("trials_per_delta must be >= 1")

    @classmethod
    def from_json(cls, obj: dict) -> SweepConfig:
        known = set(cls.__dataclass_fields__)
        extra = set(obj) - known
        if extra:
            raise ValueError(f"unknown config keys {sorted(extra)}")
        try:
            return cls(**obj)
        except TypeError as exc:
            raise ValueError(f"bad sweep config: {exc}") from exc


@dataclass
class SweepRow:
    delta: float
    trial: int
    rho_defect: float
    atp_defect: float
    f_defect_after_rounding: float
    rounded_rank: int
    lift_input_f_defect: float
    lifted_score: float
    gap: float
    max_generator_distance: float
    functional_value: float
    functional_average: float

    def values(self) -> list:
        return [getattr(self, c) for c in COLUMNS]


# --- perturbations ------------------------------------------------------------------------


def _local_unitary(d, delta, rng):
    return mc.unitary_from_hermitian(mc.random_hermitian(d, rng), delta)


def perturb_observable(x, delta, rng, model="local-unitary"):
    d = x.shape[0]
    if model == "local-unitary":
        u = _local_unitary(d, delta, rng)
        return u @ x @ mc.dagger(u)
    return mc.round_to_involution(x + delta * mc.random_hermitian(d, rng))


def perturb_pvm(q, delta, rng, model="local-unitary"):
    d = q[0].shape[0]
    if model == "local-unitary":
        u = _local_unitary(d, delta, rng)
        return [u @ p @ mc.dagger(u) for p in q]
    noisy = [p + delta * mc.random_hermitian(d, rng) for p in q]
    return orthogonalize_pvm(noisy)[0]


def perturb_strategy(s: Strategy, delta, rng, model="local-unitary") -> Strategy:
    """Independent perturbation of every question's measurement on both sides; the state is kept."""
    f = perturb_pvm if s.kind == "pvm" else perturb_observable
    bob = [f(q, delta, rng, model) for q in s.bob]
    alice = [f(q, delta, rng, model) for q in s.alice]
    return Strategy(s.kind, alice, bob, s.state, s.canonical)


# --- pipelines ----------------------------------------------------------------------------


@dataclass
class TrialRecord:
    row: SweepRow
    artifacts: dict = field(default_factory=dict)


def run_pipeline(inst: Instance, strategy: Strategy, pipeline: str, delta: float = 0.0, trial: int = 0) -> TrialRecord:
    """Extract, round and lift one strategy; returns the sweep row and the intermediate objects."""
    if PIPELINE_KIND[pipeline] != inst.kind:
        raise ValueError(f"pipeline {pipeline!r} does not apply to a {inst.kind} instance")
    game = inst.game
    if pipeline == "synch":
        ex = extract_synchronous(game, strategy)
        z_images = sp.synchbcs_from_synch(ex.assignment)
        pres = sp.synchbcs_algebra(game)
        rr = round_representation(z_images, ex.lam, pres)
        mapped = synch_assignment_from_bcs(rr.rounded, game)
        lift = lift_synchronous(mapped.assignment, game)
        lift_in = mapped.report.max_defect
        score = lift.score["value"]
        gap = 1.0 - score
    elif pipeline == "bcs":
        ex = extract_bcs(game, strategy)
        rr = round_representation(ex.assignment, ex.lam, ex.presentation)
        lift = lift_bcs(rr.rounded, game)
        lift_in = rr.f_report.max_defect
        score = lift.score["value"]
        gap = 1.0 - score
    else:
        sol = inst.reference["solution"]
        ex = extract_xor(game, strategy, sol.c)
        rr = round_representation(ex.assignment, ex.lam, ex.presentation)
        lift = lift_xor(rr.rounded, game, sol)
        lift_in = rr.f_report.max_defect
        score = lift.score["bias"]
        gap = lift.score["gap_to_optimum"]
    row = SweepRow(
        delta=float(delta),
        trial=int(trial),
        rho_defect=ex.report.max_defect,
        atp_defect=ex.atp_defect,
        f_defect_after_rounding=rr.f_report.max_defect,
        rounded_rank=rr.rank,
        lift_input_f_defect=lift_in,
        lifted_score=score,
        gap=gap,
        max_generator_distance=max(rr.per_generator_distance.values()),
        functional_value=rr.functional_value,
        functional_average=rr.functional_average,
    )
    return TrialRecord(row, {"strategy": strategy, "extraction": ex, "rounding": rr, "lift": lift})


def trial_rng(seed: int, delta_index: int, trial: int) -> np.random.Generator:
    return np.random.default_rng([seed, delta_index, trial])


def _dump(path: Path, obj):
    path.write_text(json.dumps(obj, sort_keys=True))


def _write_intermediates(root: Path, delta_index: int, trial: int, rec: TrialRecord):
    base = root / f"d{delta_index:02d}_t{trial:03d}"
    base.mkdir(parents=True, exist_ok=True)
    art = rec.artifacts
    _dump(base / "strategy.json", art["strategy"].to_json())
    _dump(base / "extraction.json", art["extraction"].to_json())
    _dump(base / "rounding.json", art["rounding"].to_json())
    _dump(base / "lift.json", art["lift"].to_json())


# --- fits ---------------------------------------------------------------------------------


def loglog_slope(x, y) -> float:
    """Least-squares slope of log y against log x over points with both positive."""
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    keep = (x > 0) & (y > 0) & np.isfinite(x) & np.isfinite(y)
    if keep.sum() < 2 or np.ptp(np.log(x[keep])) == 0:
        return float("nan")
    return float(np.polyfit(np.log(x[keep]), np.log(y[keep]), 1)[0])


def fit_slopes(rows: list[SweepRow], drop_largest: bool = False) -> dict:
    """Log-log slopes over all rows; ``drop_largest`` excludes the largest delta from the fit."""
    deltas = sorted({r.delta for r in rows})
    if drop_largest and len(deltas) > 2:
        rows = [r for r in rows if r.delta != deltas[-1]]
    col = lambda name: [getattr(r, name) for r in rows]  # noqa: E731
    return {
        "f_defect_vs_rho_defect": loglog_slope(col("rho_defect"), col("f_defect_after_rounding")),
        "gap_vs_lift_input_f_defect": loglog_slope(col("lift_input_f_defect"), col("gap")),
        "rho_defect_vs_delta": loglog_slope(col("delta"), col("rho_defect")),
        "f_defect_vs_delta": loglog_slope(col("delta"), col("f_defect_after_rounding")),
        "gap_vs_delta": loglog_slope(col("delta"), col("gap")),
        "n_points": len(rows),
    }


@dataclass
class SweepResult:
    config: SweepConfig
    rows: list
    slopes: dict
    averaging_violations: int

    def csv_text(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(COLUMNS)
        for r in self.rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else int(v) for v in r.values()])
        return buf.getvalue()

    def summary(self) -> dict:
        return {"config": asdict(self.config), "slopes": self.slopes, "averaging_violations": self.averaging_violations, "rows": len(self.rows)}


def run_sweep(cfg: SweepConfig) -> SweepResult:
    inst, base = sweep_base(cfg.game)
    if PIPELINE_KIND[cfg.pipeline] != inst.kind:
        raise ValueError(f"pipeline {cfg.pipeline!r} does not apply to instance {cfg.game!r} ({inst.kind})")
    rows: list[SweepRow] = []
    violations = 0
    inter = Path(cfg.intermediates) if cfg.intermediates else None
    for di, delta in enumerate(cfg.delta_grid):
        for t in range(cfg.trials_per_delta):
            rng = trial_rng(cfg.seed, di, t)
            s = perturb_strategy(base, delta, rng, cfg.perturbation)
            rec = run_pipeline(inst, s, cfg.pipeline, delta, t)
            rr = rec.artifacts["rounding"]
            if min(b.functional for b in rr.breakpoints) > rr.functional_average + 1e-9:
                violations += 1
            rows.append(rec.row)
            if inter is not None:
                _write_intermediates(inter, di, t, rec)
    result = SweepResult(cfg, rows, fit_slopes(rows), violations)
    if cfg.output:
        out = Path(cfg.output)
        out.write_text(result.csv_text())
        out.with_suffix(".slopes.json").write_text(json.dumps(result.summary(), indent=2, sort_keys=True))
    return result
