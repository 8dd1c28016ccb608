"""Truth specification, trajectory orchestration, replication management,
dataset ingestion, and persistence.

A trajectory is one (config, seed) run: data are streamed into the engine
and the configured diagnostics are evaluated on a geometric grid of sample
sizes (always including n = 1..10, so the small-n analytic identities stay
checkable in every run).  Trajectories persist as a CSV of numeric columns
plus a JSON sidecar carrying the exact config for replay; replications run
one engine per seed and reduce to an order-normalized summary.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .barron import BarronEngine, BarronPriorConfig, TruncationPolicy
from .cosine import CosineEngine, CosinePriorConfig
from .densities import (
    GaussExpDensity,
    StepDensity,
    UniformDensity,
    sample_gauss_exp,
    sample_step,
)
from .diagnostics import (
    BandSpec,
    DiagnosticRecord,
    DiagnosticSettings,
    evaluate_diagnostics,
)
from .intervals import Bracket
from .numerics import RandomStream

__all__ = [
    "TruthSpec",
    "RunConfig",
    "TrajectoryRecord",
    "ReplicationResult",
    "DatasetError",
    "ingest_dataset",
    "evaluation_grid",
    "run_trajectory",
    "run_replications",
    "write_trajectory",
    "load_trajectory",
    "config_hash",
]

log = logging.getLogger("posterior_lab")

FORMAT_VERSION = 1

# stream ids within one replicate seed (data vs. any auxiliary randomness)
DATA_STREAM = 0
AUX_STREAM = 1


class DatasetError(ValueError):
    """Malformed input dataset; the message names the offending row."""


def ingest_dataset(path: str, fmt: str = "csv") -> list:
    """Read one value per row, each strictly inside (0,1); an optional
    header row ``x`` is skipped.  Raises DatasetError naming the row on any
    parse or range failure; an empty file yields an empty list with a
    warning."""
    if fmt != "csv":
        raise ValueError(f"unsupported dataset format {fmt!r}")
    values = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            s = line.strip()
            if not s:
                continue
            if lineno == 1 and s.lower() == "x":
                continue
            try:
                v = float(s)
            except ValueError:
                raise DatasetError(f"row {lineno}: not a decimal value: {s!r}") \
                    from None
            if not 0.0 < v < 1.0:
                raise DatasetError(f"row {lineno}: value {v} outside (0,1)")
            values.append(v)
    if not values:
        log.warning("dataset %s is empty", path)
    log.info("ingested %d points from %s", len(values), path)
    return values


@dataclass(frozen=True)
class TruthSpec:
    """Data-generating distribution: uniform, a tilt member, a step density,
    or an external dataset (for which diagnostics use the uniform reference
    density, since the true density is unknown)."""

    kind: str
    theta: float | None = None
    level: int | None = None
    selected: tuple | None = None
    path: str | None = None

    def __post_init__(self):
        if self.kind == "uniform":
            pass
        elif self.kind == "gauss_exp":
            if self.theta is None or not 0.0 <= self.theta <= 1.0:
                raise ValueError(f"gauss_exp truth needs theta in [0,1], "
                                 f"got {self.theta}")
        elif self.kind == "step":
            if self.level is None or self.selected is None:
                raise ValueError("step truth needs level and selected cells")
            object.__setattr__(self, "selected",
                               tuple(sorted(int(i) for i in self.selected)))
            StepDensity(self.level, frozenset(self.selected))  # validates
        elif self.kind == "external":
            if not self.path:
                raise ValueError("external truth needs a dataset path")
        else:
            raise ValueError(f"unknown truth kind {self.kind!r}")

    def density(self):
        if self.kind == "uniform" or self.kind == "external":
            return UniformDensity()
        if self.kind == "gauss_exp":
            return GaussExpDensity(self.theta)
        return StepDensity(self.level, frozenset(self.selected))

    def sample(self, rs: RandomStream, n: int) -> np.ndarray:
        if self.kind == "uniform":
            return rs.uniform_open(n)
        if self.kind == "gauss_exp":
            return sample_gauss_exp(GaussExpDensity(self.theta), rs, n)
        if self.kind == "step":
            return sample_step(self.density(), rs, n)
        data = ingest_dataset(self.path)
        if len(data) < n:
            raise DatasetError(f"dataset {self.path} holds {len(data)} points, "
                               f"need {n}")
        return np.asarray(data[:n])

    def to_dict(self) -> dict:
        d = {"kind": self.kind}
        if self.theta is not None:
            d["theta"] = self.theta
        if self.level is not None:
            d["level"] = self.level
        if self.selected is not None:
            d["selected"] = list(self.selected)
        if self.path is not None:
            d["path"] = self.path
        return d

    @staticmethod
    def from_dict(d: dict) -> "TruthSpec":
        return TruthSpec(kind=d["kind"], theta=d.get("theta"),
                         level=d.get("level"),
                         selected=tuple(d["selected"]) if "selected" in d else None,
                         path=d.get("path"))


@dataclass(frozen=True)
class RunConfig:
    """Everything that determines a run except the seed actually used."""

    truth: TruthSpec = TruthSpec("uniform")
    model: str = "barron"
    n_max: int = 1000
    grid_ratio: float = 1.15
    seeds: tuple = (1,)
    quad_tol: float = 1e-9
    continuous_weight: float = 0.5
    trunc_multiplier: float = 4.0
    trunc_fixed: int | None = None
    diagnostics: DiagnosticSettings = DiagnosticSettings()
    cosine_prior: CosinePriorConfig = CosinePriorConfig()
    cosine_regions: tuple = ((5.0, math.inf),)

    def __post_init__(self):
        if self.model not in ("barron", "cosine"):
            raise ValueError(f"unknown model {self.model!r}")
        if self.n_max < 1:
            raise ValueError("n_max must be >= 1")
        if not self.grid_ratio > 1.0:
            raise ValueError("grid_ratio must exceed 1")
        if not self.seeds:
            raise ValueError("at least one seed is required")

    def barron_prior(self) -> BarronPriorConfig:
        return BarronPriorConfig(continuous_weight=self.continuous_weight)

    def truncation(self) -> TruncationPolicy:
        return TruncationPolicy(multiplier=self.trunc_multiplier,
                                fixed_levels=self.trunc_fixed)

    def to_dict(self) -> dict:
        dg = self.diagnostics
        return {
            "truth": self.truth.to_dict(),
            "model": self.model,
            "n_max": self.n_max,
            "grid_ratio": self.grid_ratio,
            "seeds": sorted(int(s) for s in self.seeds),
            "quad_tol": self.quad_tol,
            "continuous_weight": self.continuous_weight,
            "trunc_multiplier": self.trunc_multiplier,
            "trunc_fixed": self.trunc_fixed,
            "diagnostics": {
                "gamma": dg.gamma,
                "bands": [[b.alpha, b.beta] for b in dg.bands],
                "exponent_bands": [[b.alpha, b.beta] for b in dg.exponent_bands],
                "betas": list(dg.betas),
                "epsilons": list(dg.epsilons),
                "tau": dg.tau,
                "predictive_grid": dg.predictive_grid,
                "track_mean_inv_level": dg.track_mean_inv_level,
            },
            "cosine_prior": {
                "kind": self.cosine_prior.kind,
                "rate": self.cosine_prior.rate,
                "scale": self.cosine_prior.scale,
                "theta_max": self.cosine_prior.theta_max,
                "tail_fraction": self.cosine_prior.tail_fraction,
            },
            "cosine_regions": [[lo, hi] for lo, hi in self.cosine_regions],
        }

    @staticmethod
    def from_dict(d: dict) -> "RunConfig":
        dg = d.get("diagnostics", {})
        settings = DiagnosticSettings(
            gamma=dg.get("gamma", DiagnosticSettings.gamma),
            bands=tuple(BandSpec(a, b) for a, b in dg.get("bands", [])),
            exponent_bands=tuple(BandSpec(a, b)
                                 for a, b in dg.get("exponent_bands", [])),
            betas=tuple(dg.get("betas", [])),
            epsilons=tuple(dg.get("epsilons", [])),
            tau=dg.get("tau", 0.1),
            predictive_grid=dg.get("predictive_grid", 0),
            track_mean_inv_level=dg.get("track_mean_inv_level", True),
        )
        cp = d.get("cosine_prior", {})
        return RunConfig(
            truth=TruthSpec.from_dict(d["truth"]),
            model=d.get("model", "barron"),
            n_max=int(d["n_max"]),
            grid_ratio=float(d.get("grid_ratio", 1.15)),
            seeds=tuple(int(s) for s in d.get("seeds", (1,))),
            quad_tol=float(d.get("quad_tol", 1e-9)),
            continuous_weight=float(d.get("continuous_weight", 0.5)),
            trunc_multiplier=float(d.get("trunc_multiplier", 4.0)),
            trunc_fixed=d.get("trunc_fixed"),
            diagnostics=settings,
            cosine_prior=CosinePriorConfig(
                kind=cp.get("kind", "exponential"),
                rate=float(cp.get("rate", 1.0)),
                scale=float(cp.get("scale", 1.0)),
                theta_max=float(cp.get("theta_max", 50.0)),
                tail_fraction=float(cp.get("tail_fraction", 1e-3))),
            cosine_regions=tuple((float(lo), float(hi))
                                 for lo, hi in d.get("cosine_regions", [])),
        )


def config_hash(cfg: RunConfig) -> str:
    """sha256 of the canonical JSON form (sorted keys, seeds sorted -- seed
    order is not semantically meaningful)."""
    payload = json.dumps(cfg.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def evaluation_grid(n_max: int, ratio: float = 1.15) -> list:
    """Geometric grid of sample sizes, always containing 1..10 and n_max."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    pts = set(range(1, min(10, n_max) + 1))
    v = 10.0
    while v < n_max:
        v *= ratio
        r = int(round(v))
        if r <= n_max:
            pts.add(r)
    pts.add(n_max)
    return sorted(pts)


# ---------------------------------------------------------------------------
# column layout
# ---------------------------------------------------------------------------

def _fmt(v: float) -> str:
    return f"{v:.17g}"


def _bracket_cols(stem: str) -> list:
    return [f"{stem}.lower", f"{stem}.upper"]


def trajectory_columns(cfg: RunConfig) -> list:
    dg = cfg.diagnostics
    if cfg.model == "cosine":
        cols = ["n"]
        for eps in dg.epsilons:
            cols += _bracket_cols(f"hellinger_mass_{eps:g}")
        for lo, hi in cfg.cosine_regions:
            cols += _bracket_cols(f"region_mass_{lo:g}_{hi:g}")
        cols += _bracket_cols("log_evidence")
        return cols
    cols = ["n", "w_n", "sup_loglik", "realized_gamma"]
    cols += _bracket_cols("gamma_stat")
    cols += _bracket_cols("mass_f0") + _bracket_cols("mass_fstep")
    for band in dg.bands:
        cols += _bracket_cols(f"band_mass_{band.key()}")
    for band in dg.exponent_bands:
        cols.append(f"band_prior_exponent_{band.key()}")
    for beta in dg.betas:
        cols += _bracket_cols(f"beta_bound_mass_{beta:g}")
    for eps in dg.epsilons:
        cols += _bracket_cols(f"hellinger_mass_{eps:g}")
    cols.append("evidence_flag")
    cols += _bracket_cols("log_evidence")
    if dg.track_mean_inv_level:
        cols += _bracket_cols("mean_inv_level")
    if dg.predictive_grid:
        cols.append("predictive_ks")
    return cols


def _row_from_record(rec: DiagnosticRecord, cfg: RunConfig) -> dict:
    row = {"n": float(rec.n), "w_n": rec.w_n, "sup_loglik": rec.sup_loglik,
           "realized_gamma": rec.realized_gamma}

    def put(stem, br):
        row[f"{stem}.lower"] = br.lower if br is not None else math.nan
        row[f"{stem}.upper"] = br.upper if br is not None else math.nan

    put("gamma_stat", rec.gamma_mass)
    put("mass_f0", rec.mass_f0)
    put("mass_fstep", rec.mass_fstep)
    for band in cfg.diagnostics.bands:
        put(f"band_mass_{band.key()}", rec.band_masses.get(band))
    for band in cfg.diagnostics.exponent_bands:
        row[f"band_prior_exponent_{band.key()}"] = \
            rec.band_prior_exponents.get(band, math.nan)
    for beta in cfg.diagnostics.betas:
        put(f"beta_bound_mass_{beta:g}", rec.beta_bound_masses.get(beta))
    for eps in cfg.diagnostics.epsilons:
        put(f"hellinger_mass_{eps:g}", rec.hellinger_masses.get(eps))
    row["evidence_flag"] = (math.nan if rec.evidence_flag is None
                            else float(rec.evidence_flag))
    row["log_evidence.lower"] = rec.log_evidence_lower
    row["log_evidence.upper"] = rec.log_evidence_upper
    if cfg.diagnostics.track_mean_inv_level:
        put("mean_inv_level", rec.mean_inv_level)
    if cfg.diagnostics.predictive_grid:
        row["predictive_ks"] = rec.predictive_ks
    return row


@dataclass
class TrajectoryRecord:
    """One (config, seed) run: per-grid-point rows of named numeric values
    (bracketed statistics occupy ``stem.lower``/``stem.upper`` columns)."""

    config: RunConfig
    seed: int
    grid: list
    columns: list
    rows: list            # list of dicts keyed by column name
    errors: list = field(default_factory=list)  # (n, message)

    def bracket_series(self, stem: str):
        """[(n, Bracket | None)] for a bracketed statistic; ``stem`` may be a
        prefix (the first matching column pair is used)."""
        lo_col = self._resolve(stem, ".lower")
        if lo_col is None:
            return []
        hi_col = lo_col[:-6] + ".upper"
        out = []
        for row in self.rows:
            lo, hi = row.get(lo_col, math.nan), row.get(hi_col, math.nan)
            br = None if (math.isnan(lo) or math.isnan(hi)) else Bracket(lo, hi)
            out.append((int(row["n"]), br))
        return out

    def value_series(self, name: str):
        col = self._resolve(name, "")
        if col is None:
            return []
        return [(int(r["n"]), r.get(col, math.nan)) for r in self.rows]

    def _resolve(self, stem: str, suffix: str):
        exact = stem + suffix
        if exact in self.columns:
            return exact
        for c in self.columns:
            if not c.startswith(stem):
                continue
            if suffix:
                if c.endswith(suffix):
                    return c
            elif not c.endswith(".lower") and not c.endswith(".upper"):
                return c
        return None

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        for row in self.rows:
            lines.append(",".join(_fmt(row.get(c, math.nan)) for c in self.columns))
        return "\n".join(lines) + "\n"

    def sidecar(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "seed": self.seed,
            "grid": list(self.grid),
            "columns": list(self.columns),
            "version": FORMAT_VERSION,
            "config_hash": config_hash(self.config),
            "errors": [[n, msg] for n, msg in self.errors],
        }


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

def run_trajectory(cfg: RunConfig, seed: int) -> TrajectoryRecord:
    """Stream data from the truth, update the engine incrementally, and
    evaluate the configured diagnostics on the grid.  Deterministic given
    (cfg, seed); numeric failures are recorded per grid point and the run
    continues."""
    grid = evaluation_grid(cfg.n_max, cfg.grid_ratio)
    data = cfg.truth.sample(RandomStream(seed, DATA_STREAM), cfg.n_max)
    columns = trajectory_columns(cfg)
    rows, errors = [], []
    if cfg.model == "barron":
        engine = BarronEngine(prior=cfg.barron_prior(), trunc=cfg.truncation(),
                              quad_tol=cfg.quad_tol, truth=cfg.truth.density())
        want = set(grid)
        for i, x in enumerate(data, 1):
            engine.add_point(float(x))
            if i in want:
                rec = evaluate_diagnostics(engine, cfg.diagnostics)
                rows.append(_row_from_record(rec, cfg))
                errors.extend((i, msg) for msg in rec.errors)
    else:
        for n in grid:
            row = {"n": float(n)}
            eng = CosineEngine(cfg.cosine_prior, data[:n], quad_tol=cfg.quad_tol)
            try:
                for eps in cfg.diagnostics.epsilons:
                    br = eng.hellinger_mass(eps)
                    row[f"hellinger_mass_{eps:g}.lower"] = br.lower
                    row[f"hellinger_mass_{eps:g}.upper"] = br.upper
                for lo, hi in cfg.cosine_regions:
                    br = eng.region_mass(lo, hi)
                    row[f"region_mass_{lo:g}_{hi:g}.lower"] = br.lower
                    row[f"region_mass_{lo:g}_{hi:g}.upper"] = br.upper
                ev = eng.log_evidence()
                row["log_evidence.lower"] = ev.lower
                row["log_evidence.upper"] = ev.upper
            except Exception as exc:  # recorded gap, run continues
                errors.append((n, str(exc)))
            rows.append(row)
    log.info("trajectory seed=%d: %d grid points, %d flagged errors",
             seed, len(rows), len(errors))
    return TrajectoryRecord(config=cfg, seed=seed, grid=grid, columns=columns,
                            rows=rows, errors=errors)


def _worker(args) -> TrajectoryRecord:
    cfg, seed = args
    return run_trajectory(cfg, seed)


@dataclass
class ReplicationResult:
    trajectories: list            # ordered as cfg.seeds
    summary_columns: list
    summary_rows: list            # per grid n: min/median/max per column
    excursions: dict              # stem -> {delta -> {...}}


def run_replications(cfg: RunConfig, parallelism: int = 1,
                     deltas: tuple = (0.5, 0.9)) -> ReplicationResult:
    """One trajectory per seed (optionally in a process pool) plus an
    order-normalized summary; results are independent of the parallelism
    degree."""
    seeds = [int(s) for s in cfg.seeds]
    if len(set(seeds)) != len(seeds):
        raise ValueError("seeds must be distinct")
    if parallelism <= 1 or len(seeds) == 1:
        trajs = [run_trajectory(cfg, s) for s in seeds]
    else:
        with ProcessPoolExecutor(max_workers=min(parallelism, len(seeds))) as ex:
            trajs = list(ex.map(_worker, [(cfg, s) for s in seeds]))

    grid = trajs[0].grid
    data_cols = [c for c in trajs[0].columns if c != "n"]
    summary_columns = ["n"]
    for c in data_cols:
        summary_columns += [f"{c}.min", f"{c}.median", f"{c}.max"]
    summary_rows = []
    for gi, n in enumerate(grid):
        row = {"n": float(n)}
        for c in data_cols:
            vals = np.array([t.rows[gi].get(c, math.nan) for t in trajs])
            row[f"{c}.min"] = float(np.nanmin(vals)) if not np.all(np.isnan(vals)) else math.nan
            row[f"{c}.median"] = float(np.nanmedian(vals)) if not np.all(np.isnan(vals)) else math.nan
            row[f"{c}.max"] = float(np.nanmax(vals)) if not np.all(np.isnan(vals)) else math.nan
        summary_rows.append(row)

    from .diagnostics import excursion_count
    excursions: dict = {}
    stems = sorted({c[:-6] for c in data_cols if c.endswith(".lower")})
    for stem in stems:
        per_delta = {}
        for delta in deltas:
            counts = [excursion_count(t, stem, delta).count for t in trajs]
            per_delta[f"{delta:g}"] = {
                "per_seed_counts": counts,
                "seeds_with_excursion": int(sum(1 for c in counts if c > 0)),
                "frequency": sum(1 for c in counts if c > 0) / len(counts),
            }
        excursions[stem] = per_delta
    return ReplicationResult(trajectories=trajs, summary_columns=summary_columns,
                             summary_rows=summary_rows, excursions=excursions)


def summary_csv(result: ReplicationResult) -> str:
    lines = [",".join(result.summary_columns)]
    for row in result.summary_rows:
        lines.append(",".join(_fmt(row.get(c, math.nan))
                              for c in result.summary_columns))
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# persistence
# ---------------------------------------------------------------------------

def write_trajectory(traj: TrajectoryRecord, prefix: str) -> tuple:
    """Write ``<prefix>.csv`` and ``<prefix>.json``; returns the two paths."""
    csv_path, json_path = prefix + ".csv", prefix + ".json"
    os.makedirs(os.path.dirname(os.path.abspath(csv_path)), exist_ok=True)
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write(traj.to_csv())
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(traj.sidecar(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    return csv_path, json_path


def load_trajectory(prefix: str) -> TrajectoryRecord:
    """Load a persisted trajectory (CSV + sidecar) back into memory."""
    with open(prefix + ".json", "r", encoding="utf-8") as fh:
        side = json.load(fh)
    cfg = RunConfig.from_dict(side["config"])
    columns = list(side["columns"])
    rows = []
    with open(prefix + ".csv", "r", encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header != columns:
            raise ValueError("CSV header does not match sidecar columns")
        for line in fh:
            vals = [float(v) for v in line.strip().split(",")]
            rows.append(dict(zip(columns, vals)))
    return TrajectoryRecord(config=cfg, seed=int(side["seed"]),
                            grid=list(side["grid"]), columns=columns, rows=rows,
                            errors=[(int(n), m) for n, m in side.get("errors", [])])


def replay(prefix: str) -> TrajectoryRecord:
    """Re-run the config stored in a sidecar with its seed."""
    loaded = load_trajectory(prefix)
    return run_trajectory(loaded.config, loaded.seed)
