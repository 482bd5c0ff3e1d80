"""Step sampling, walk paths, multi-walk ensembles, and increment resampling.

Reproducibility model: every random draw comes from an ``RngStream``, a
counter-based Philox generator whose 128-bit key is derived from the master
seed and a lineage path (replication index, walk index, purpose tag) via a
splitmix64 hash chain.  Streams are therefore independent of scheduling:
the same (config, master seed) produces bitwise-identical ensembles at any
parallelism level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

from walkhull.geometry import ConvexPolygon, Point2, convex_hull

_MASK64 = (1 << 64) - 1

# Domain-separation tags for stream lineages.
TAG_WALK = 0x57414C4B
TAG_RESAMPLE = 0x52534D50
TAG_CELL = 0x4752494D


def _splitmix64(x: int) -> int:
    """One round of the splitmix64 finalizer (public-domain constants)."""
    x = (x + 0x9E3779B97F4A7C15) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_key(master_seed: int, *path: int) -> tuple[int, int]:
    """Two 64-bit key words from a master seed and a lineage path.

    Distinct paths give (for all practical purposes) distinct keys, which
    is what makes parallel replications bit-reproducible: each consumer
    owns a stream addressed by content, not by draw order.
    """
    words = []
    for lane in (0x243F6A8885A308D3, 0x13198A2E03707344):
        h = _splitmix64((master_seed & _MASK64) ^ lane)
        for part in path:
            h = _splitmix64(h ^ (part & _MASK64))
        words.append(h)
    return words[0], words[1]


def derive_seed(master_seed: int, *path: int) -> int:
    """Single 64-bit derived seed (used for nested experiment seeds)."""
    return derive_key(master_seed, *path)[0]


class RngStream:
    """Counter-based random stream (numpy Philox 4x64, keyed).

    Identical (algorithm, key, counter) means identical output on every
    platform.  A stream has a single owner; it is never shared between
    threads or replications.
    """

    ALGORITHM = "philox4x64 keyed by splitmix64(master_seed, lineage path)"

    def __init__(self, key: tuple[int, int]):
        self.key = key
        self._gen = np.random.Generator(np.random.Philox(key=np.array(key, dtype=np.uint64)))

    @classmethod
    def from_lineage(cls, master_seed: int, *path: int) -> "RngStream":
        return cls(derive_key(master_seed, *path))

    def uniforms(self, n: int) -> np.ndarray:
        """n doubles uniform on [0, 1)."""
        return self._gen.random(n)

    def standard_normals(self, n: int) -> np.ndarray:
        """n standard normals via the polar (Marsaglia) Box-Muller variant.

        Candidate pairs are drawn in deterministic batches, so the output
        depends only on the stream contents, never on batching luck.
        """
        if n == 0:
            return np.empty(0)
        chunks: list[np.ndarray] = []
        have = 0
        while have < n:
            pairs = (n - have + 1) // 2
            m = max(16, pairs + (pairs >> 2) + 8)  # ~pi/4 acceptance headroom
            u = self._gen.random(2 * m)
            a = 2.0 * u[0::2] - 1.0
            b = 2.0 * u[1::2] - 1.0
            s = a * a + b * b
            ok = (s > 0.0) & (s < 1.0)
            sa = s[ok]
            f = np.sqrt(-2.0 * np.log(sa) / sa)
            out = np.empty(2 * sa.size)
            out[0::2] = a[ok] * f
            out[1::2] = b[ok] * f
            chunks.append(out)
            have += out.size
        return np.concatenate(chunks)[:n]


@dataclass(frozen=True, eq=False)
class StepDistribution:
    """Law of one iid increment: isotropic or general gaussian, or a finite
    discrete law.

    The ``discrete`` mean is derived from the support, never supplied.
    NOTE on the gaussian scale convention: ``isotropic_gaussian(mean, s)``
    uses covariance s * I (s is the variance multiplier, not a standard
    deviation).
    """

    family: str
    mean: Point2
    cov: np.ndarray | None = None
    support: tuple[tuple[Point2, float], ...] | None = None

    def __post_init__(self) -> None:
        if self.family not in ("gaussian", "discrete"):
            raise ValueError(f"unknown step family {self.family!r}")
        if not (math.isfinite(self.mean.x) and math.isfinite(self.mean.y)):
            raise ValueError("mean must be finite")
        if self.family == "gaussian":
            c = self.cov
            if c is None or c.shape != (2, 2):
                raise ValueError("gaussian law needs a 2x2 covariance")
            scale = max(1.0, float(np.abs(c).max()))
            if abs(c[0, 1] - c[1, 0]) > 1e-12 * scale:
                raise ValueError("covariance must be symmetric")
            w = np.linalg.eigvalsh(c)
            if w.min() < -1e-12 * scale:
                raise ValueError(f"covariance is not PSD (eigenvalues {w})")
        else:
            sup = self.support
            if not sup:
                raise ValueError("discrete law needs a nonempty support")
            total = math.fsum(p for _, p in sup)
            if any(p <= 0.0 for _, p in sup):
                raise ValueError("support probabilities must be positive")
            if abs(total - 1.0) > 1e-12:
                raise ValueError(f"support probabilities sum to {total}, not 1")

    @classmethod
    def gaussian(cls, mean: Sequence[float], cov: np.ndarray | Sequence[Sequence[float]]) -> "StepDistribution":
        c = np.array(cov, dtype=np.float64)
        return cls("gaussian", Point2(float(mean[0]), float(mean[1])), cov=c)

    @classmethod
    def isotropic_gaussian(cls, mean: Sequence[float], sigma: float) -> "StepDistribution":
        """Gaussian with covariance sigma * I (sigma = variance multiplier)."""
        if sigma < 0:
            raise ValueError("variance multiplier must be >= 0")
        return cls.gaussian(mean, sigma * np.eye(2))

    @classmethod
    def discrete(cls, support: Iterable[tuple[Sequence[float], float]]) -> "StepDistribution":
        sup = tuple((Point2(float(z[0]), float(z[1])), float(p)) for z, p in support)
        mx = math.fsum(z.x * p for z, p in sup)
        my = math.fsum(z.y * p for z, p in sup)
        return cls("discrete", Point2(mx, my), support=sup)

    @cached_property
    def covariance(self) -> np.ndarray:
        """Covariance matrix, exact for either family."""
        if self.family == "gaussian":
            return self.cov
        pts = np.array([[z.x, z.y] for z, _ in self.support])
        probs = np.array([p for _, p in self.support])
        centered = pts - np.array(self.mean)
        return (centered * probs[:, None]).T @ centered

    @cached_property
    def _factor(self) -> np.ndarray:
        """A with A A^T = cov; Cholesky, eigen fallback for singular PSD."""
        c = self.covariance
        try:
            return np.linalg.cholesky(c)
        except np.linalg.LinAlgError:
            w, u = np.linalg.eigh(c)
            return u @ np.diag(np.sqrt(np.clip(w, 0.0, None)))

    @cached_property
    def _cumprobs(self) -> np.ndarray:
        cum = np.cumsum([p for _, p in self.support])
        cum[-1] = 1.0
        return cum

    @cached_property
    def _support_points(self) -> np.ndarray:
        return np.array([[z.x, z.y] for z, _ in self.support])

    def as_dict(self) -> dict:
        """JSON-friendly description (used in summaries and manifests)."""
        out: dict = {"family": self.family, "mean": [self.mean.x, self.mean.y]}
        if self.family == "gaussian":
            out["cov"] = self.cov.tolist()
        else:
            out["support"] = [[[z.x, z.y], p] for z, p in self.support]
        return out

    def draw(self, n: int, rng: RngStream) -> np.ndarray:
        """n iid increments as an (n, 2) array."""
        if self.family == "gaussian":
            z = rng.standard_normals(2 * n).reshape(n, 2)
            return np.array(self.mean) + z @ self._factor.T
        u = rng.uniforms(n)
        idx = np.searchsorted(self._cumprobs, u, side="right")
        return self._support_points[np.minimum(idx, len(self.support) - 1)].copy()


def sample_step(dist: StepDistribution, rng: RngStream) -> Point2:
    """One increment draw."""
    z = dist.draw(1, rng)
    return Point2(float(z[0, 0]), float(z[0, 1]))


@dataclass(frozen=True, eq=False)
class WalkPath:
    """Increments Z_1..Z_n with running sums S_0 = 0, S_1..S_n."""

    increments: np.ndarray
    partial_sums: np.ndarray

    @classmethod
    def from_increments(cls, increments: np.ndarray) -> "WalkPath":
        inc = np.asarray(increments, dtype=np.float64).reshape(-1, 2)
        sums = np.vstack([np.zeros((1, 2)), np.cumsum(inc, axis=0)])
        inc.setflags(write=False)
        sums.setflags(write=False)
        return cls(inc, sums)

    @property
    def n(self) -> int:
        return self.increments.shape[0]


def generate_walk(dist: StepDistribution, n: int, rng: RngStream) -> WalkPath:
    """Walk of n iid increments; n = 0 gives the single point at the origin."""
    if n < 0:
        raise ValueError("step count must be >= 0")
    return WalkPath.from_increments(dist.draw(n, rng))


@dataclass(frozen=True, eq=False)
class Ensemble:
    """m equal-length walks plus the laws that generated them."""

    walks: tuple[WalkPath, ...]
    distributions: tuple[StepDistribution, ...]
    master_seed: int | None = None
    rep_index: int | None = None

    def __post_init__(self) -> None:
        if len(self.walks) == 0:
            raise ValueError("an ensemble needs at least one walk")
        if len(self.walks) != len(self.distributions):
            raise ValueError("one distribution per walk required")
        lengths = {w.n for w in self.walks}
        if len(lengths) != 1:
            raise ValueError(f"walks have unequal lengths {sorted(lengths)}")

    @property
    def n(self) -> int:
        return self.walks[0].n

    @property
    def m(self) -> int:
        return len(self.walks)


def build_ensemble(
    distributions: Sequence[StepDistribution],
    n: int,
    master_seed: int,
    rep_index: int = 0,
) -> Ensemble:
    """Generate an ensemble from per-walk streams keyed by
    (master_seed, walk tag, rep_index, walk index)."""
    walks = tuple(
        generate_walk(dist, n, RngStream.from_lineage(master_seed, TAG_WALK, rep_index, k))
        for k, dist in enumerate(distributions)
    )
    return Ensemble(walks, tuple(distributions), master_seed, rep_index)


def resample_at(ens: Ensemble, i: int, rng: RngStream) -> Ensemble:
    """Ensemble with increment i of every walk replaced by a fresh draw.

    The returned paths agree with the originals before index i; from i on,
    each path is shifted by the constant (fresh - original) increment.
    """
    if not (1 <= i <= ens.n):
        raise ValueError(f"resample index {i} outside 1..{ens.n}")
    new_walks = []
    for walk, dist in zip(ens.walks, ens.distributions):
        fresh = dist.draw(1, rng)[0]
        delta = fresh - walk.increments[i - 1]
        inc = walk.increments.copy()
        inc[i - 1] = fresh
        sums = walk.partial_sums.copy()
        sums[i:] += delta
        inc.setflags(write=False)
        sums.setflags(write=False)
        new_walks.append(WalkPath(inc, sums))
    return Ensemble(tuple(new_walks), ens.distributions, None, None)


def hull_of_ensemble(ens: Ensemble, upto: int | None = None) -> ConvexPolygon:
    """Convex hull of all partial sums S_0..S_upto of every walk."""
    if upto is None:
        upto = ens.n
    if not (0 <= upto <= ens.n):
        raise ValueError(f"upto {upto} outside 0..{ens.n}")
    pts = np.vstack([w.partial_sums[: upto + 1] for w in ens.walks])
    return convex_hull(pts)
