"""Exact small-instance enumeration for hull functionals.

For ensembles of finitely-supported walks with few steps, every joint step
sequence can be enumerated, so expectations of the hull perimeter and
diameter are exact probability-weighted sums with no Monte-Carlo error.
On top of that the module verifies, outcome by outcome, the decomposition
of the centered functionals into the conditional-expectation differences
generated by single-increment resampling: the terms telescope to the
centered functional, have mean zero, are pairwise orthogonal, and their
second moments sum to the variance.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from walkhull.geometry import convex_hull, diameter, perimeter
from walkhull.walks import StepDistribution

OUTER_BUDGET = 1_000_000
INNER_BUDGET = 100_000_000


class BudgetExceeded(RuntimeError):
    def __init__(self, required: int, budget: int, what: str):
        super().__init__(f"{what} needs {required} weighted evaluations, budget is {budget}")
        self.required = required
        self.budget = budget


@dataclass(frozen=True, eq=False)
class DiscreteEnsembleSpec:
    """Finitely-supported walk ensemble small enough to enumerate."""

    distributions: tuple[StepDistribution, ...]
    n: int

    def __post_init__(self) -> None:
        if self.n < 0:
            raise ValueError("step count must be >= 0")
        if not self.distributions:
            raise ValueError("at least one walk required")
        for d in self.distributions:
            if d.family != "discrete":
                raise ValueError("exact enumeration requires discrete step laws")

    @property
    def outcome_count(self) -> int:
        count = 1
        for d in self.distributions:
            count *= len(d.support) ** self.n
        return count

    @property
    def replacement_count(self) -> int:
        count = 1
        for d in self.distributions:
            count *= len(d.support)
        return count


def _walk_supports(spec: DiscreteEnsembleSpec):
    points = [[ (z.x, z.y) for z, _ in d.support] for d in spec.distributions]
    probs = [[p for _, p in d.support] for d in spec.distributions]
    return points, probs


def _functionals(outcome, points) -> tuple[float, float]:
    """(perimeter, diameter) of the hull for one joint step sequence."""
    pts = [(0.0, 0.0)]
    for k, seq in enumerate(outcome):
        sx = sy = 0.0
        for step_idx in seq:
            zx, zy = points[k][step_idx]
            sx += zx
            sy += zy
            pts.append((sx, sy))
    hull = convex_hull(np.array(pts))
    return perimeter(hull), diameter(hull)


class _Enumeration:
    """All joint outcomes with probabilities and cached functionals."""

    def __init__(self, spec: DiscreteEnsembleSpec):
        self.spec = spec
        points, probs = _walk_supports(spec)
        self.points = points
        self.probs = probs
        per_walk = [
            list(itertools.product(range(len(points[k])), repeat=spec.n))
            for k in range(len(points))
        ]
        self.outcomes = list(itertools.product(*per_walk))
        self.table: dict[tuple, tuple[float, float]] = {}
        self.weights: list[float] = []
        for omega in self.outcomes:
            self.table[omega] = _functionals(omega, points)
            self.weights.append(self._probability(omega))

    def _probability(self, omega) -> float:
        p = 1.0
        for k, seq in enumerate(omega):
            for idx in seq:
                p *= self.probs[k][idx]
        return p


@dataclass(frozen=True)
class ExactMoments:
    e_l: float
    var_l: float
    e_d: float
    var_d: float
    outcome_count: int


def enumerate_exact(spec: DiscreteEnsembleSpec, budget: int = OUTER_BUDGET) -> ExactMoments:
    """Exact mean and variance of hull perimeter and diameter."""
    required = spec.outcome_count
    if required > budget:
        raise BudgetExceeded(required, budget, "exact enumeration")
    if spec.n == 0:
        return ExactMoments(0.0, 0.0, 0.0, 0.0, 1)
    enum = _Enumeration(spec)
    ls = [enum.table[o][0] for o in enum.outcomes]
    ds = [enum.table[o][1] for o in enum.outcomes]
    w = enum.weights
    e_l = math.fsum(wi * li for wi, li in zip(w, ls))
    e_l2 = math.fsum(wi * li * li for wi, li in zip(w, ls))
    e_d = math.fsum(wi * di for wi, di in zip(w, ds))
    e_d2 = math.fsum(wi * di * di for wi, di in zip(w, ds))
    return ExactMoments(e_l, e_l2 - e_l * e_l, e_d, e_d2 - e_d * e_d, len(enum.outcomes))


def functional_distribution(
    spec: DiscreteEnsembleSpec,
    resample_index: int | None = None,
    *,
    decimals: int = 12,
) -> tuple[dict[float, float], dict[float, float]]:
    """Exact laws of (perimeter, diameter), optionally after resampling the
    increments at one index of every walk.  Values are rounded to merge
    float-identical atoms."""
    if spec.outcome_count * max(1, spec.replacement_count) > INNER_BUDGET:
        raise BudgetExceeded(spec.outcome_count, INNER_BUDGET, "distribution enumeration")
    enum = _Enumeration(spec)
    dist_l: dict[float, float] = {}
    dist_d: dict[float, float] = {}

    def add(d, value, prob):
        key = round(value, decimals)
        d[key] = d.get(key, 0.0) + prob

    replacements = (
        list(itertools.product(*[range(len(p)) for p in enum.points]))
        if resample_index is not None
        else [None]
    )
    for omega, w in zip(enum.outcomes, enum.weights):
        if resample_index is None:
            l, d = enum.table[omega]
            add(dist_l, l, w)
            add(dist_d, d, w)
            continue
        for repl in replacements:
            rp = 1.0
            modified = []
            for k, seq in enumerate(omega):
                seq2 = list(seq)
                seq2[resample_index - 1] = repl[k]
                modified.append(tuple(seq2))
                rp *= enum.probs[k][repl[k]]
            l, d = enum.table[tuple(modified)]
            add(dist_l, l, w * rp)
            add(dist_d, d, w * rp)
    return dist_l, dist_d


@dataclass(frozen=True)
class MdsFunctionalReport:
    max_decomposition_error: float
    variance_error: float
    max_mean_abs: float
    max_cross_abs: float
    ok: bool


@dataclass(frozen=True)
class MdsReport:
    perimeter: MdsFunctionalReport
    diameter: MdsFunctionalReport
    outcome_count: int
    tol: float

    @property
    def ok(self) -> bool:
        return self.perimeter.ok and self.diameter.ok

    def as_dict(self) -> dict:
        def f(r: MdsFunctionalReport) -> dict:
            return {
                "max_decomposition_error": r.max_decomposition_error,
                "variance_error": r.variance_error,
                "max_mean_abs": r.max_mean_abs,
                "max_cross_abs": r.max_cross_abs,
                "ok": r.ok,
            }

        return {
            "perimeter": f(self.perimeter),
            "diameter": f(self.diameter),
            "outcome_count": self.outcome_count,
            "tol": self.tol,
            "ok": self.ok,
        }


def mds_check(spec: DiscreteEnsembleSpec, tol: float = 1e-10) -> MdsReport:
    """Verify the resampling decomposition of both hull functionals.

    For every time index i, the conditional expectation (given the first i
    increments of all walks) of the functional change under resampling of
    increment i is computed exactly.  The checks: the terms sum pointwise
    to the centered functional on every outcome; each term has mean zero;
    distinct terms are orthogonal; second moments of the terms sum to the
    variance of the functional.
    """
    outer = spec.outcome_count
    if outer > OUTER_BUDGET:
        raise BudgetExceeded(outer, OUTER_BUDGET, "decomposition check")
    inner = outer * max(1, spec.n) * spec.replacement_count
    if inner > INNER_BUDGET:
        raise BudgetExceeded(inner, INNER_BUDGET, "decomposition check (inner loop)")

    enum = _Enumeration(spec)
    n = spec.n
    m = len(spec.distributions)
    replacements = list(itertools.product(*[range(len(p)) for p in enum.points]))
    repl_probs = [
        math.prod(enum.probs[k][r[k]] for k in range(m)) for r in replacements
    ]

    # resample averages A_i(omega) per functional
    n_out = len(enum.outcomes)
    avg_l = [[0.0] * n for _ in range(n_out)]
    avg_d = [[0.0] * n for _ in range(n_out)]
    for oi, omega in enumerate(enum.outcomes):
        for i in range(1, n + 1):
            acc_l = []
            acc_d = []
            for r, rp in zip(replacements, repl_probs):
                modified = tuple(
                    seq[: i - 1] + (r[k],) + seq[i:] for k, seq in enumerate(omega)
                )
                l, d = enum.table[modified]
                acc_l.append(rp * l)
                acc_d.append(rp * d)
            avg_l[oi][i - 1] = math.fsum(acc_l)
            avg_d[oi][i - 1] = math.fsum(acc_d)

    # conditional expectations per prefix
    term_l: list[dict[tuple, float]] = [dict() for _ in range(n)]
    term_d: list[dict[tuple, float]] = [dict() for _ in range(n)]
    for i in range(1, n + 1):
        sums_l: dict[tuple, list[float]] = {}
        sums_d: dict[tuple, list[float]] = {}
        mass: dict[tuple, list[float]] = {}
        for oi, (omega, w) in enumerate(zip(enum.outcomes, enum.weights)):
            prefix = tuple(seq[:i] for seq in omega)
            l, d = enum.table[omega]
            sums_l.setdefault(prefix, []).append(w * (l - avg_l[oi][i - 1]))
            sums_d.setdefault(prefix, []).append(w * (d - avg_d[oi][i - 1]))
            mass.setdefault(prefix, []).append(w)
        for prefix in mass:
            p = math.fsum(mass[prefix])
            term_l[i - 1][prefix] = math.fsum(sums_l[prefix]) / p
            term_d[i - 1][prefix] = math.fsum(sums_d[prefix]) / p

    moments = enumerate_exact(spec)

    def check(values_idx: int, terms: list[dict[tuple, float]], mean: float, var: float):
        max_decomp = 0.0
        for omega, w in zip(enum.outcomes, enum.weights):
            x = enum.table[omega][values_idx]
            total = math.fsum(terms[i][tuple(seq[: i + 1] for seq in omega)] for i in range(n))
            err = abs(x - mean - total) / max(1.0, abs(x))
            max_decomp = max(max_decomp, err)
        max_mean = 0.0
        second_moments = []
        for i in range(n):
            e_i = math.fsum(
                w * terms[i][tuple(seq[: i + 1] for seq in omega)]
                for omega, w in zip(enum.outcomes, enum.weights)
            )
            max_mean = max(max_mean, abs(e_i))
            second_moments.append(
                math.fsum(
                    w * terms[i][tuple(seq[: i + 1] for seq in omega)] ** 2
                    for omega, w in zip(enum.outcomes, enum.weights)
                )
            )
        var_err = abs(var - math.fsum(second_moments)) / max(1.0, var)
        max_cross = 0.0
        for i in range(n):
            for j in range(i + 1, n):
                cross = math.fsum(
                    w
                    * terms[i][tuple(seq[: i + 1] for seq in omega)]
                    * terms[j][tuple(seq[: j + 1] for seq in omega)]
                    for omega, w in zip(enum.outcomes, enum.weights)
                )
                max_cross = max(max_cross, abs(cross))
        ok = max_decomp <= tol and var_err <= tol and max_mean <= tol and max_cross <= tol
        return MdsFunctionalReport(max_decomp, var_err, max_mean, max_cross, ok)

    rep_l = check(0, term_l, moments.e_l, moments.var_l)
    rep_d = check(1, term_d, moments.e_d, moments.var_d)
    return MdsReport(rep_l, rep_d, len(enum.outcomes), tol)
