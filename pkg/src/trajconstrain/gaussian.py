"""Gaussian trajectory densities over (birth, death) hypotheses.

A trajectory density factorizes into a probability mass function over
(birth, death) pairs and, per pair, a joint Gaussian over the stacked state
sequence. This module provides marginalization onto time subsets, region
probabilities (closed form where the constrained coordinates are independent
single boxes, plain Monte Carlo otherwise), stratified sampling, and moment
matching of weighted sample clouds.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.stats import norm

from .core import StateRegion, TimeWindow, Trajectory, existence_pairs
from .errors import DimensionMismatchError

Pair = Tuple[int, int]

INSIDE = "inside"
COMPLEMENT = "complement"

_PMF_TOL = 1e-12
_SYM_TOL = 1e-10
_EIG_TOL = 1e-10


def child_rng(seed: int, *keys: int) -> np.random.Generator:
    """Deterministic child generator for (seed, keys); keys must be >= 0."""
    return np.random.default_rng(np.random.SeedSequence([int(seed)] + [int(k) for k in keys]))


@dataclass(frozen=True)
class BirthDeathPmf:
    """Probability mass function over (birth, death) pairs."""

    pairs: Tuple[Pair, ...]
    probs: np.ndarray

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=np.float64)
        if len(self.pairs) != probs.shape[0]:
            raise ValueError("pairs/probs length mismatch")
        if len(set(self.pairs)) != len(self.pairs):
            raise ValueError("duplicate (birth, death) pairs")
        if np.any(probs < 0):
            raise ValueError("probabilities must be nonnegative")
        if abs(probs.sum() - 1.0) > _PMF_TOL:
            raise ValueError(f"probabilities must sum to 1, got {probs.sum()!r}")
        for b, e in self.pairs:
            if b > e:
                raise ValueError(f"pair ({b}, {e}) violates birth <= death")
        probs.setflags(write=False)
        object.__setattr__(self, "pairs", tuple((int(b), int(e)) for b, e in self.pairs))
        object.__setattr__(self, "probs", probs)

    @classmethod
    def uniform_over_window(cls, window: TimeWindow) -> "BirthDeathPmf":
        pairs = existence_pairs(window)
        return cls(tuple(pairs), np.full(len(pairs), 1.0 / len(pairs)))

    def prob(self, pair: Pair) -> float:
        try:
            return float(self.probs[self.pairs.index(pair)])
        except ValueError:
            return 0.0

    def items(self) -> Iterable[Tuple[Pair, float]]:
        return zip(self.pairs, self.probs)


def _psd_factor(cov: np.ndarray) -> np.ndarray:
    """Matrix A with A @ A.T = cov, via eigendecomposition with eigenvalue floor."""
    w, v = np.linalg.eigh(cov)
    if w.min(initial=0.0) < -_EIG_TOL:
        raise ValueError(f"covariance has eigenvalue {w.min()} below -{_EIG_TOL}")
    return v * np.sqrt(np.clip(w, 0.0, None))


@dataclass(frozen=True)
class GaussianSequence:
    """Joint Gaussian over a stacked state sequence.

    Time step t of a (birth, death) hypothesis occupies coordinates
    (t - birth) * dim .. (t - birth) * dim + dim - 1.
    """

    mean: np.ndarray
    cov: np.ndarray
    dim: int

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64).ravel()
        cov = np.asarray(self.cov, dtype=np.float64)
        if cov.shape != (mean.size, mean.size):
            raise ValueError(f"cov shape {cov.shape} incompatible with mean size {mean.size}")
        if mean.size % self.dim != 0:
            raise ValueError(f"mean size {mean.size} not a multiple of dim {self.dim}")
        asym = np.max(np.abs(cov - cov.T), initial=0.0)
        if asym > _SYM_TOL:
            raise ValueError(f"covariance asymmetry {asym} exceeds {_SYM_TOL}")
        cov = 0.5 * (cov + cov.T)
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    @property
    def length(self) -> int:
        return self.mean.size // self.dim

    def coords(self, pair: Pair, times: Sequence[int]) -> np.ndarray:
        """Flat coordinate indices of the given time steps, ascending in time."""
        birth, death = pair
        if self.length != death - birth + 1:
            raise ValueError(f"sequence length {self.length} != lifetime of pair {pair}")
        idx = []
        for t in sorted(times):
            if not (birth <= t <= death):
                raise ValueError(f"time {t} outside lifetime {birth}..{death}")
            base = (t - birth) * self.dim
            idx.extend(range(base, base + self.dim))
        return np.array(idx, dtype=np.intp)

    def draw(self, n: int, rng: np.random.Generator) -> np.ndarray:
        """n joint samples, shape (n, length * dim)."""
        factor = _psd_factor(self.cov)
        z = rng.standard_normal((n, self.mean.size))
        return self.mean + z @ factor.T


@dataclass(frozen=True)
class TrajectoryDensity:
    """BirthDeathPmf paired with one GaussianSequence per support pair."""

    pmf: BirthDeathPmf
    conditionals: Tuple[GaussianSequence, ...]

    def __post_init__(self):
        if len(self.conditionals) != len(self.pmf.pairs):
            raise ValueError("conditionals/support length mismatch")
        dims = {g.dim for g in self.conditionals}
        if len(dims) != 1:
            raise ValueError("all conditionals must share one state dimension")
        for (b, e), g in zip(self.pmf.pairs, self.conditionals):
            if g.length != e - b + 1:
                raise ValueError(f"conditional length {g.length} != lifetime of ({b}, {e})")
        object.__setattr__(self, "conditionals", tuple(self.conditionals))

    @property
    def dim(self) -> int:
        return self.conditionals[0].dim

    def conditional(self, pair: Pair) -> GaussianSequence:
        return self.conditionals[self.pmf.pairs.index(pair)]


@dataclass
class Stratum:
    """Weighted samples sharing one (birth, death) pair; states (n, length, dim)."""

    states: np.ndarray
    weights: np.ndarray
    n_proposed: Optional[int] = None

    @property
    def total_weight(self) -> float:
        return float(self.weights.sum())


@dataclass
class SampleCloud:
    """Weighted trajectory samples keyed by (birth, death) stratum."""

    dim: int
    strata: Dict[Pair, Stratum]

    @property
    def total_weight(self) -> float:
        return sum(s.total_weight for s in self.strata.values())

    def trajectories(self) -> List[Tuple[Trajectory, float]]:
        out = []
        for (b, e), s in self.strata.items():
            for i in range(s.states.shape[0]):
                out.append((Trajectory(b, e, s.states[i]), float(s.weights[i])))
        return out


def marginal(gs: GaussianSequence, pair: Pair, times: Sequence[int]) -> GaussianSequence:
    """Exact Gaussian marginal over the stacked subset of time steps."""
    times = sorted(set(times))
    if not times:
        raise ValueError("times must be nonempty")
    idx = gs.coords(pair, times)
    return GaussianSequence(gs.mean[idx], gs.cov[np.ix_(idx, idx)], gs.dim)


def _box_prob_independent(region: StateRegion, mean: np.ndarray, sd: np.ndarray) -> float:
    """Single-box inside probability when per-dimension coordinates are independent."""
    lo, hi = region.lows[0], region.highs[0]
    p = 1.0
    for j in range(region.dim):
        if not (np.isfinite(lo[j]) or np.isfinite(hi[j])):
            continue
        if sd[j] == 0.0:
            p *= 1.0 if lo[j] <= mean[j] <= hi[j] else 0.0
        else:
            p *= norm.cdf((hi[j] - mean[j]) / sd[j]) - norm.cdf((lo[j] - mean[j]) / sd[j])
    return float(p)


def region_probability(
    gs: GaussianSequence,
    pair: Pair,
    entries: Sequence[Tuple[int, StateRegion, str]],
    mc_budget: int = 100_000,
    rng_seed: int = 0,
) -> Tuple[float, float]:
    """Joint probability that each constrained time's state is in its region.

    Each entry is (time, region, side) with side "inside" or "complement".
    Exact product path (standard error 0) when every region is a single box
    and the marginal covariance over the constrained coordinates is diagonal;
    plain Monte Carlo on the marginal otherwise.
    """
    if not entries:
        raise ValueError("entries must be nonempty")
    for t, region, side in entries:
        if side not in (INSIDE, COMPLEMENT):
            raise ValueError(f"side must be inside/complement, got {side!r}")
        if region.dim != gs.dim:
            raise DimensionMismatchError(f"region dim {region.dim} != state dim {gs.dim}")
    times = sorted({t for t, _, _ in entries})
    sub = marginal(gs, pair, times)
    d = gs.dim
    col_of_time = {t: i * d for i, t in enumerate(times)}

    single_box = all(region.n_boxes == 1 for _, region, _ in entries)
    off_diag = sub.cov - np.diag(np.diag(sub.cov))
    if single_box and not np.any(off_diag):
        sd = np.sqrt(np.diag(sub.cov))
        p = 1.0
        for t, region, side in entries:
            c = col_of_time[t]
            q = _box_prob_independent(region, sub.mean[c : c + d], sd[c : c + d])
            p *= q if side == INSIDE else 1.0 - q
        return p, 0.0

    rng = child_rng(rng_seed)
    x = sub.draw(int(mc_budget), rng)
    mask = np.ones(x.shape[0], dtype=bool)
    for t, region, side in entries:
        c = col_of_time[t]
        m = region.contains_batch(x[:, c : c + d])
        mask &= m if side == INSIDE else ~m
    p = float(mask.mean())
    se = math.sqrt(p * (1.0 - p) / x.shape[0])
    return p, se


def alive_probability(pmf: BirthDeathPmf, predicate: Callable[[Pair], bool]) -> float:
    """Total pmf mass on pairs where the predicate holds."""
    return float(sum(p for pair, p in pmf.items() if predicate(pair)))


def sample(td: TrajectoryDensity, n: int, rng_seed: int = 0) -> SampleCloud:
    """Stratified i.i.d. sampling: draw (birth, death) from the pmf, then the sequence."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = child_rng(rng_seed)
    counts = rng.multinomial(n, td.pmf.probs)
    strata: Dict[Pair, Stratum] = {}
    for pair, g, c in zip(td.pmf.pairs, td.conditionals, counts):
        if c == 0:
            continue
        x = g.draw(int(c), rng)
        b, e = pair
        strata[pair] = Stratum(x.reshape(c, e - b + 1, td.dim), np.ones(c))
    return SampleCloud(td.dim, strata)


def step_moments(td: TrajectoryDensity) -> Tuple[List[int], np.ndarray, np.ndarray, np.ndarray]:
    """Per-time-step mixture mean/covariance over pairs alive at each step.

    Returns (times, means (T, d), covs (T, d, d), alive mass (T,)); entries
    are NaN where no support pair is alive.
    """
    d = td.dim
    times = sorted({t for (b, e) in td.pmf.pairs for t in range(b, e + 1)})
    means = np.full((len(times), d), np.nan)
    covs = np.full((len(times), d, d), np.nan)
    alive = np.zeros(len(times))
    for k, t in enumerate(times):
        w_sum = 0.0
        m_acc = np.zeros(d)
        s_acc = np.zeros((d, d))
        for (pair, w), g in zip(td.pmf.items(), td.conditionals):
            b, e = pair
            if not (b <= t <= e) or w == 0.0:
                continue
            idx = g.coords(pair, [t])
            m = g.mean[idx]
            c = g.cov[np.ix_(idx, idx)]
            w_sum += w
            m_acc += w * m
            s_acc += w * (c + np.outer(m, m))
        if w_sum == 0.0:
            continue
        mean = m_acc / w_sum
        means[k] = mean
        covs[k] = s_acc / w_sum - np.outer(mean, mean)
        alive[k] = w_sum
    return times, means, covs, alive


def moment_match(cloud: SampleCloud) -> TrajectoryDensity:
    """Per-stratum weighted mean/covariance; pmf proportional to stratum weights."""
    if not cloud.strata:
        raise ValueError("cloud has no strata")
    pairs, probs, conds = [], [], []
    for pair in sorted(cloud.strata):
        s = cloud.strata[pair]
        w = s.weights
        total = w.sum()
        ess = total * total / float((w * w).sum()) if total > 0 else 0.0
        if ess < 2.0:
            raise ValueError(f"stratum {pair} has fewer than 2 effective samples")
        flat = s.states.reshape(s.states.shape[0], -1)
        mean = (w[:, None] * flat).sum(axis=0) / total
        centered = flat - mean
        cov = (w[:, None] * centered).T @ centered / total
        cov = 0.5 * (cov + cov.T)
        pairs.append(pair)
        probs.append(total)
        conds.append(GaussianSequence(mean, cov, cloud.dim))
    probs = np.asarray(probs)
    return TrajectoryDensity(BirthDeathPmf(tuple(pairs), probs / probs.sum()), tuple(conds))
