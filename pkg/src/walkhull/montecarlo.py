"""Replicated hull experiments and convergence diagnostics.

Each replication generates all walks of an ensemble from its own derived
random streams, builds the trajectory hull, and records perimeter and
diameter.  Replications are embarrassingly parallel and individually
addressed by (master seed, replication index), so results are bitwise
identical for any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from walkhull import asymptotics
from walkhull.geometry import AngleGrid, perimeter, support_profile
from walkhull.walks import (
    Ensemble,
    StepDistribution,
    WalkPath,
    build_ensemble,
    hull_of_ensemble,
)
from walkhull.geometry import diameter as hull_diameter
from walkhull.geometry import hausdorff as hausdorff_distance

CSV_HEADER = "rep,n,L,D"


@dataclass(frozen=True, eq=False)
class ExperimentConfig:
    """One experiment: walk laws, horizon, replication count, master seed.

    ``n_grid`` (increasing step counts) is only needed by the convergence
    curves; plain experiments ignore it."""

    distributions: tuple[StepDistribution, ...]
    n: int
    reps: int
    master_seed: int
    n_grid: tuple[int, ...] | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("step count must be >= 1")
        if self.reps < 1:
            raise ValueError("replication count must be >= 1")
        if not self.distributions:
            raise ValueError("at least one walk distribution required")
        if self.n_grid is not None:
            grid = tuple(self.n_grid)
            if not grid or any(b <= a for a, b in zip(grid, grid[1:])):
                raise ValueError("n_grid must be nonempty and strictly increasing")

    def as_dict(self) -> dict:
        return {
            "distributions": [d.as_dict() for d in self.distributions],
            "n": self.n,
            "reps": self.reps,
            "master_seed": self.master_seed,
            "n_grid": list(self.n_grid) if self.n_grid else None,
        }


@dataclass(eq=False)
class SampleSet:
    """Replicated observations of the hull functionals for one config."""

    config: ExperimentConfig
    rep_indices: np.ndarray
    l_values: np.ndarray
    d_values: np.ndarray

    @property
    def summary(self) -> dict:
        def stats(x: np.ndarray) -> dict:
            return {
                "mean": float(x.mean()),
                "var": float(x.var(ddof=1)) if len(x) > 1 else 0.0,
                "min": float(x.min()),
                "max": float(x.max()),
            }

        return {"perimeter": stats(self.l_values), "diameter": stats(self.d_values)}

    def as_dict(self) -> dict:
        return {"config": self.config.as_dict(), "summary": self.summary}

    def to_csv(self) -> str:
        lines = [CSV_HEADER]
        n = self.config.n
        for r, l, d in zip(self.rep_indices, self.l_values, self.d_values):
            lines.append(f"{int(r)},{n},{float(l)!r},{float(d)!r}")
        return "\n".join(lines) + "\n"


def _run_block(args) -> tuple[int, list[float], list[float]]:
    cfg, lo, hi = args
    ls: list[float] = []
    ds: list[float] = []
    for r in range(lo, hi):
        ens = build_ensemble(cfg.distributions, cfg.n, cfg.master_seed, r)
        hull = hull_of_ensemble(ens)
        ls.append(perimeter(hull))
        ds.append(hull_diameter(hull))
    return lo, ls, ds


def _map_blocks(fn, cfg, reps: int, workers: int):
    """Run fn over contiguous replication blocks; assemble by block start."""
    if workers <= 1:
        return [fn((cfg, 0, reps))]
    bounds = np.linspace(0, reps, workers + 1).astype(int)
    tasks = [(cfg, int(lo), int(hi)) for lo, hi in zip(bounds, bounds[1:]) if hi > lo]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(fn, tasks))
    return sorted(results, key=lambda t: t[0])


def run_experiment(cfg: ExperimentConfig, workers: int = 1) -> SampleSet:
    """All replications of one experiment; deterministic in (config, seed)."""
    blocks = _map_blocks(_run_block, cfg, cfg.reps, workers)
    ls = np.concatenate([np.array(b[1]) for b in blocks])
    ds = np.concatenate([np.array(b[2]) for b in blocks])
    return SampleSet(cfg, np.arange(cfg.reps), ls, ds)


@dataclass(frozen=True)
class SllnPoint:
    n: int
    med_hausdorff: float
    med_perimeter_gap: float
    med_diameter_gap: float


def _slln_block(args) -> tuple[int, list[list[float]], list[list[float]], list[list[float]]]:
    cfg, lo, hi = args
    grid = cfg.n_grid
    n_max = grid[-1]
    limit = asymptotics.limit_shape([d.mean for d in cfg.distributions])
    h_rows: list[list[float]] = []
    l_rows: list[list[float]] = []
    d_rows: list[list[float]] = []
    for r in range(lo, hi):
        ens = build_ensemble(cfg.distributions, n_max, cfg.master_seed, r)
        h_row: list[float] = []
        l_row: list[float] = []
        d_row: list[float] = []
        prev_l = prev_d = -math.inf
        for n in grid:
            hull = hull_of_ensemble(ens, upto=n)
            l_n = perimeter(hull)
            d_n = hull_diameter(hull)
            if l_n < prev_l - 1e-9 * max(1.0, prev_l) or d_n < prev_d - 1e-9 * max(1.0, prev_d):
                raise AssertionError(
                    f"hull functionals decreased along a trajectory at n={n} (rep {r})"
                )
            prev_l, prev_d = l_n, d_n
            h_row.append(hausdorff_distance(hull.scaled(1.0 / n), limit.polygon))
            l_row.append(abs(l_n / n - limit.per))
            d_row.append(abs(d_n / n - limit.diam))
        h_rows.append(h_row)
        l_rows.append(l_row)
        d_rows.append(d_row)
    return lo, h_rows, l_rows, d_rows


def slln_curve(cfg: ExperimentConfig, workers: int = 1) -> list[SllnPoint]:
    """Median rescaled-hull errors against the limit shape, per grid step.

    Tracks the Hausdorff distance of hull/n to the limit and the absolute
    gaps of perimeter/n and diameter/n to the limit functionals."""
    if not cfg.n_grid:
        raise ValueError("slln_curve needs a config with n_grid")
    blocks = _map_blocks(_slln_block, cfg, cfg.reps, workers)
    h = np.vstack([np.array(b[1]) for b in blocks])
    l = np.vstack([np.array(b[2]) for b in blocks])
    d = np.vstack([np.array(b[3]) for b in blocks])
    out = []
    for j, n in enumerate(cfg.n_grid):
        out.append(
            SllnPoint(
                n,
                float(np.median(h[:, j])),
                float(np.median(l[:, j])),
                float(np.median(d[:, j])),
            )
        )
    return out


@dataclass(frozen=True)
class VarianceRatio:
    varl_over_n: float
    vard_over_n: float


def variance_ratio(samples: SampleSet) -> VarianceRatio:
    """Unbiased sample variances of the functionals divided by the horizon."""
    if samples.config.reps < 2:
        raise ValueError("variance needs at least two replications")
    n = samples.config.n
    return VarianceRatio(
        float(samples.l_values.var(ddof=1)) / n,
        float(samples.d_values.var(ddof=1)) / n,
    )


def standardize(samples: SampleSet, sigma2: float, functional: str = "perimeter") -> np.ndarray:
    """Replication z-scores (x - sample mean) / sqrt(sigma2 * n).

    The sample mean substitutes the unknown expectation of the functional;
    its O(1/sqrt(reps)) effect is part of the tolerance of any consumer."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    x = samples.l_values if functional == "perimeter" else samples.d_values
    return (x - x.mean()) / math.sqrt(sigma2 * samples.config.n)


def _prefix_ensemble(ens: Ensemble, n: int) -> Ensemble:
    walks = tuple(
        WalkPath(w.increments[:n], w.partial_sums[: n + 1]) for w in ens.walks
    )
    return Ensemble(walks, ens.distributions, ens.master_seed, ens.rep_index)


def _l2_block(args) -> tuple[int, list[list[float]], list[list[float]]]:
    cfg, lo, hi, functional = args
    grid = cfg.n_grid
    n_max = grid[-1]
    geo = asymptotics.drift_geometry(
        cfg.distributions[0].mean, cfg.distributions[1].mean
    )
    x_rows: list[list[float]] = []
    a_rows: list[list[float]] = []
    for r in range(lo, hi):
        ens = build_ensemble(cfg.distributions, n_max, cfg.master_seed, r)
        x_row: list[float] = []
        a_row: list[float] = []
        for n in grid:
            hull = hull_of_ensemble(ens, upto=n)
            prefix = _prefix_ensemble(ens, n)
            if functional == "perimeter":
                x_row.append(perimeter(hull))
                a_row.append(asymptotics.approx_sum_perimeter(prefix, geo))
            else:
                x_row.append(hull_diameter(hull))
                a_row.append(asymptotics.approx_sum_diameter(prefix, geo))
        x_rows.append(x_row)
        a_rows.append(a_row)
    return lo, x_rows, a_rows


def _l2_map(fn, cfg, functional, workers):
    if workers <= 1:
        return [fn((cfg, 0, cfg.reps, functional))]
    bounds = np.linspace(0, cfg.reps, workers + 1).astype(int)
    tasks = [
        (cfg, int(lo), int(hi), functional)
        for lo, hi in zip(bounds, bounds[1:])
        if hi > lo
    ]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        results = list(pool.map(fn, tasks))
    return sorted(results, key=lambda t: t[0])


def l2_error_curve(
    cfg: ExperimentConfig, functional: str = "perimeter", workers: int = 1
) -> list[tuple[int, float]]:
    """Second moment of the sqrt(n)-scaled residual of the linear
    approximation, per grid step: mean(((X - mean X) - (A - mean A))^2) / n.

    Both the functional X and the approximation sum A are centered at
    their replication means.  Leaving A uncentered would add a noise floor
    of Var[A]/(n reps) = sigma^2/reps to the scaled value, constant in n,
    which would eventually bury the decay this curve exists to show."""
    if functional not in ("perimeter", "diameter"):
        raise ValueError("functional must be 'perimeter' or 'diameter'")
    if not cfg.n_grid:
        raise ValueError("l2_error_curve needs a config with n_grid")
    if len(cfg.distributions) != 2:
        raise ValueError("the approximation sums are defined for two walks")
    geo = asymptotics.drift_geometry(
        cfg.distributions[0].mean, cfg.distributions[1].mean
    )
    if not geo.a1_holds:
        raise asymptotics.AssumptionViolation("residual curve requires the drift assumptions")
    if functional == "diameter" and geo.a2_max is None:
        raise asymptotics.AssumptionViolation(
            "diameter residual curve requires a unique longest drift-triangle side"
        )
    blocks = _l2_map(_l2_block, cfg, functional, workers)
    x = np.vstack([np.array(b[1]) for b in blocks])
    a = np.vstack([np.array(b[2]) for b in blocks])
    out = []
    for j, n in enumerate(cfg.n_grid):
        res = (x[:, j] - x[:, j].mean()) - (a[:, j] - a[:, j].mean())
        out.append((n, float(np.mean(res**2)) / n))
    return out


@dataclass(frozen=True)
class ResamplingBoundCheck:
    """Range-function perturbation bound under one-step resampling."""

    sup_delta: float
    bound: float
    perimeter_gap: float
    integral_bound: float

    @property
    def sup_ok(self) -> bool:
        return self.sup_delta <= self.bound * (1.0 + 1e-9) + 1e-12

    @property
    def integral_ok(self) -> bool:
        return self.perimeter_gap <= self.integral_bound * (1.0 + 1e-9) + 1e-12

    @property
    def ok(self) -> bool:
        return self.sup_ok and self.integral_ok


def resampling_bound_check(
    ens: Ensemble, i: int, resampled: Ensemble, grid_count: int = 4096
) -> ResamplingBoundCheck:
    """Check that the projected-width change under resampling increment i
    never exceeds twice the total norm of the swapped increments, and the
    perimeter change never exceeds pi times that bound."""
    thetas = AngleGrid(grid_count).thetas
    h0 = hull_of_ensemble(ens)
    h1 = hull_of_ensemble(resampled)
    big0, small0 = support_profile(h0, thetas)
    big1, small1 = support_profile(h1, thetas)
    sup_delta = float(np.abs((big0 - small0) - (big1 - small1)).max())
    norm_sum = 0.0
    for w_old, w_new in zip(ens.walks, resampled.walks):
        zx, zy = w_old.increments[i - 1]
        norm_sum += math.hypot(zx, zy)
        zx, zy = w_new.increments[i - 1]
        norm_sum += math.hypot(zx, zy)
    bound = 2.0 * norm_sum
    per_gap = abs(perimeter(h0) - perimeter(h1))
    return ResamplingBoundCheck(sup_delta, bound, per_gap, math.pi * bound)
