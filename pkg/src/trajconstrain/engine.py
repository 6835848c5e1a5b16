"""Constrained trajectory, Bernoulli, PPP and PMBM densities.

For a constraint set, each (birth, death) pair with at least one active
constraint gets a spatial satisfaction probability: in conjunct mode the
joint probability of being inside every active region, in disjunct mode one
minus the probability of being inside every complement. The constrained
existence/intensity scale is the original scale times the joint
temporal-spatial satisfaction probability; a PMBM is constrained by
constraining its PPP and every Bernoulli while hypothesis weights stay
untouched.

In disjunct mode the constrained conditional is a mixture over partitions of
the active constraints into satisfied/unsatisfied index sets; the partition
weights are materialized explicitly, and the component densities are realized
by rejection sampling against the inside/complement indicators.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import ConstraintSet, CONJUNCT, DISJUNCT, active_indices, satisfies_batch
from .errors import (
    DegenerateDensityError,
    DimensionMismatchError,
    LowAcceptanceError,
    PartitionBudgetError,
    ZeroSupportError,
)
from .gaussian import (
    INSIDE,
    BirthDeathPmf,
    GaussianSequence,
    Pair,
    SampleCloud,
    Stratum,
    TrajectoryDensity,
    alive_probability,
    child_rng,
    marginal,
    moment_match,
    region_probability,
)
from .gaussian import _box_prob_independent as _single_box_prob
from .kernels import pattern_codes
from .rfs import BernoulliTrajectory, PmbmDensity, PppTrajectory

MAX_ACTIVE_FOR_PARTITIONS = 20


@dataclass(frozen=True)
class PartitionEntry:
    """One disjunct partition: constraints satisfied (inside) vs not (outside)."""

    inside: Tuple[int, ...]
    outside: Tuple[int, ...]
    weight: float
    raw_weight: float


@dataclass(frozen=True)
class PairConstraintInfo:
    """Per-(birth, death) constraint data of a constrained density."""

    pair: Pair
    active: Tuple[int, ...]
    spatial_prob: float
    spatial_se: float
    partitions: Optional[Tuple[PartitionEntry, ...]] = None


@dataclass(frozen=True)
class ConstraintReport:
    """Temporal, spatial and joint satisfaction probabilities.

    ``prob_spatial`` is the alive-conditioned pmf-weighted average of the
    per-pair spatial probabilities, so joint = prob_alive * prob_spatial.
    """

    prob_alive: float
    prob_spatial: float
    joint: float
    spatial_se: float
    joint_se: float


@dataclass
class MarginalMoments:
    """Per-time-step moment-matched summary of a constrained density."""

    times: List[int]
    means: np.ndarray
    covs: np.ndarray
    alive_probs: np.ndarray
    acceptance_rate: float
    n_accepted: int


@dataclass
class ConstrainedTrajectoryDensity:
    """Indicator-truncated trajectory density under a constraint set.

    Evaluation/sampling goes through the base Gaussians restricted by the
    constraint indicators; ``pmf`` is the constrained (birth, death) mass.
    A degenerate instance (zero spatial probability everywhere) carries no
    pmf.
    """

    base: TrajectoryDensity
    cs: ConstraintSet
    pmf: Optional[BirthDeathPmf]
    pair_info: Dict[Pair, PairConstraintInfo]
    degenerate: bool = False
    _cloud_cache: Optional[SampleCloud] = field(default=None, repr=False)

    @property
    def dim(self) -> int:
        return self.base.dim

    def conditional(self, pair: Pair) -> GaussianSequence:
        return self.base.conditional(pair)

    def sample_cloud(self, mc_budget: int = 100_000, rng_seed: int = 0) -> SampleCloud:
        """Rejection-sample the constrained density; the last cloud is cached."""
        cloud = _rejection_cloud(self, mc_budget, rng_seed)
        self._cloud_cache = cloud
        return cloud

    def moment_matched(self, mc_budget: int = 100_000, rng_seed: int = 0) -> TrajectoryDensity:
        """Gaussian view of the constrained density via sample moment matching."""
        cloud = self._cloud_cache or self.sample_cloud(mc_budget, rng_seed)
        return moment_match(cloud)


@dataclass
class ConstrainedBernoulli:
    r: float
    density: ConstrainedTrajectoryDensity
    report: ConstraintReport
    degenerate: bool = False


@dataclass
class ConstrainedPpp:
    mu: float
    density: ConstrainedTrajectoryDensity
    report: ConstraintReport
    degenerate: bool = False


@dataclass
class ConstrainedHypothesis:
    weight: float
    tracks: List[ConstrainedBernoulli]


@dataclass
class ConstrainedPmbm:
    ppp: ConstrainedPpp
    hypotheses: List[ConstrainedHypothesis]


def _pair_seed(rng_seed: int, pair_index: int, query: int = 0) -> int:
    # One common stream per (pair, query); folded into a single int seed so
    # region_probability's child_rng stays deterministic.
    return int(np.random.SeedSequence([int(rng_seed), pair_index, query]).generate_state(1)[0])


def _conjunct_pair_prob(
    gs: GaussianSequence,
    pair: Pair,
    cs: ConstraintSet,
    active: Tuple[int, ...],
    mc_budget: int,
    rng_seed: int,
    pair_index: int,
) -> PairConstraintInfo:
    entries = [(cs.constraints[i].time, cs.constraints[i].region, INSIDE) for i in active]
    p, se = region_probability(gs, pair, entries, mc_budget, _pair_seed(rng_seed, pair_index))
    return PairConstraintInfo(pair, active, p, se)


def _partition_cell_probs(
    gs: GaussianSequence,
    pair: Pair,
    cs: ConstraintSet,
    active: Tuple[int, ...],
    mc_budget: int,
    seed: int,
) -> Tuple[np.ndarray, bool]:
    """Probabilities of every inside/outside pattern over the active constraints.

    Returns (cells, exact): cells[code] is the probability that exactly the
    constraints whose bit is set in `code` are satisfied. Exact product path
    when all regions are single boxes and the marginal covariance over the
    active times is diagonal; otherwise one common Monte Carlo batch, so the
    cells sum to 1 exactly.
    """
    m = len(active)
    times = [cs.constraints[i].time for i in active]
    sub = marginal(gs, pair, times)
    d = gs.dim
    sorted_times = sorted(times)
    col_of = {t: sorted_times.index(t) * d for t in times}

    regions = [cs.constraints[i].region for i in active]
    off_diag = sub.cov - np.diag(np.diag(sub.cov))
    if all(r.n_boxes == 1 for r in regions) and not np.any(off_diag):
        sd = np.sqrt(np.diag(sub.cov))
        p_in = np.empty(m)
        for t_idx in range(m):
            c = col_of[times[t_idx]]
            p_in[t_idx] = _single_box_prob(regions[t_idx], sub.mean[c : c + d], sd[c : c + d])
        cells = np.ones(2**m)
        for code in range(2**m):
            p = 1.0
            for t_idx in range(m):
                p *= p_in[t_idx] if code >> t_idx & 1 else 1.0 - p_in[t_idx]
            cells[code] = p
        return cells, True

    rng = child_rng(seed)
    x = sub.draw(int(mc_budget), rng)
    masks = np.empty((m, x.shape[0]), dtype=bool)
    for t_idx in range(m):
        c = col_of[times[t_idx]]
        masks[t_idx] = regions[t_idx].contains_batch(x[:, c : c + d])
    codes = pattern_codes(masks)
    cells = np.bincount(codes, minlength=2**m).astype(np.float64) / x.shape[0]
    return cells, False


def _disjunct_pair_prob(
    gs: GaussianSequence,
    pair: Pair,
    cs: ConstraintSet,
    active: Tuple[int, ...],
    mc_budget: int,
    rng_seed: int,
    pair_index: int,
) -> PairConstraintInfo:
    m = len(active)
    if m > MAX_ACTIVE_FOR_PARTITIONS:
        raise PartitionBudgetError(
            f"{m} active constraints need {2**m - 1} partitions; "
            f"use conjunct mode or coarser constraints (cap {MAX_ACTIVE_FOR_PARTITIONS})"
        )
    cells, exact = _partition_cell_probs(
        gs, pair, cs, active, mc_budget, _pair_seed(rng_seed, pair_index)
    )
    total_inside = float(cells[1:].sum())
    p_spatial = 1.0 - float(cells[0])
    se = 0.0 if exact else math.sqrt(p_spatial * (1.0 - p_spatial) / mc_budget)
    partitions = []
    for code in range(1, 2**m):
        inside = tuple(active[t] for t in range(m) if code >> t & 1)
        outside = tuple(active[t] for t in range(m) if not code >> t & 1)
        w = float(cells[code] / total_inside) if total_inside > 0 else 0.0
        partitions.append(PartitionEntry(inside, outside, w, float(cells[code])))
    return PairConstraintInfo(pair, active, p_spatial, se, tuple(partitions))


def constrain_density(
    td: TrajectoryDensity,
    cs: ConstraintSet,
    mc_budget: int = 100_000,
    rng_seed: int = 0,
) -> Tuple[ConstrainedTrajectoryDensity, ConstraintReport]:
    """Constrained trajectory density and its satisfaction report.

    Raises ZeroSupportError when no support pair overlaps any constraint
    time. A zero spatial probability everywhere yields a degenerate (but
    valid) result instead.
    """
    if td.dim != cs.dim:
        raise DimensionMismatchError(f"density dim {td.dim} != constraint dim {cs.dim}")
    qualifying = []
    for j, (pair, prob) in enumerate(td.pmf.items()):
        active = active_indices(cs, *pair)
        if active:
            qualifying.append((j, pair, float(prob), active))
    prob_alive = sum(p for _, _, p, _ in qualifying)
    if not qualifying or prob_alive <= 0.0:
        raise ZeroSupportError("no (birth, death) support pair overlaps any constraint time")

    pair_info: Dict[Pair, PairConstraintInfo] = {}
    for j, pair, _, active in qualifying:
        gs = td.conditionals[j]
        if cs.mode == DISJUNCT and len(active) > 1:
            info = _disjunct_pair_prob(gs, pair, cs, active, mc_budget, rng_seed, j)
        else:
            info = _conjunct_pair_prob(gs, pair, cs, active, mc_budget, rng_seed, j)
        pair_info[pair] = info

    # Spatially weighted pmf: mass proportional to P(pair) * spatial_prob(pair),
    # which is what rejection sampling through the constraint indicators yields.
    masses = np.array([p * pair_info[pair].spatial_prob for _, pair, p, _ in qualifying])
    joint = float(masses.sum())
    joint_var = sum(
        (p * pair_info[pair].spatial_se) ** 2 for _, pair, p, _ in qualifying
    )
    joint_se = math.sqrt(joint_var)
    prob_spatial = joint / prob_alive
    report = ConstraintReport(prob_alive, prob_spatial, joint, joint_se / prob_alive, joint_se)

    if joint <= 0.0:
        ctd = ConstrainedTrajectoryDensity(td, cs, None, pair_info, degenerate=True)
        return ctd, report
    keep = masses > 0.0
    pairs = tuple(pair for (_, pair, _, _), k in zip(qualifying, keep) if k)
    pmf = BirthDeathPmf(pairs, masses[keep] / joint)
    ctd = ConstrainedTrajectoryDensity(td, cs, pmf, pair_info)
    return ctd, report


def constrain_bernoulli(
    b: BernoulliTrajectory,
    cs: ConstraintSet,
    mc_budget: int = 100_000,
    rng_seed: int = 0,
) -> ConstrainedBernoulli:
    """Constrained Bernoulli: r is scaled by the joint satisfaction probability."""
    ctd, report = constrain_density(b.density, cs, mc_budget, rng_seed)
    r_c = b.r * report.joint
    return ConstrainedBernoulli(r_c, ctd, report, degenerate=ctd.degenerate)


def constrain_ppp(
    p: PppTrajectory,
    cs: ConstraintSet,
    mc_budget: int = 100_000,
    rng_seed: int = 0,
) -> ConstrainedPpp:
    """Constrained PPP: mu is scaled by the joint satisfaction probability."""
    ctd, report = constrain_density(p.density, cs, mc_budget, rng_seed)
    mu_c = p.mu * report.joint
    return ConstrainedPpp(mu_c, ctd, report, degenerate=ctd.degenerate)


def constrain_pmbm(
    m: PmbmDensity,
    cs: ConstraintSet,
    mc_budget: int = 100_000,
    rng_seed: int = 0,
) -> ConstrainedPmbm:
    """Constrained PMBM: componentwise constraining, hypothesis weights unchanged."""
    ppp_c = constrain_ppp(m.ppp, cs, mc_budget, rng_seed)
    hyps = [
        ConstrainedHypothesis(
            h.weight,
            [constrain_bernoulli(t, cs, mc_budget, rng_seed) for t in h.tracks],
        )
        for h in m.hypotheses
    ]
    return ConstrainedPmbm(ppp_c, hyps)


def _rejection_cloud(ctd: ConstrainedTrajectoryDensity, mc_budget: int, rng_seed: int) -> SampleCloud:
    if ctd.degenerate or ctd.pmf is None:
        raise DegenerateDensityError("cannot sample a degenerate constrained density")
    strata: Dict[Pair, Stratum] = {}
    total_drawn = total_accepted = 0
    for j, (pair, prob) in enumerate(ctd.pmf.items()):
        n_pair = max(int(math.ceil(mc_budget * prob)), 2)
        gs = ctd.base.conditional(pair)
        rng = child_rng(rng_seed, 1, j)
        b, e = pair
        nu = e - b + 1
        x = gs.draw(n_pair, rng).reshape(n_pair, nu, ctd.dim)
        acc = satisfies_batch(b, e, x, ctd.cs)
        total_drawn += n_pair
        n_acc = int(acc.sum())
        total_accepted += n_acc
        if n_acc == 0:
            continue
        weights = np.full(n_acc, prob / n_acc)
        strata[pair] = Stratum(x[acc], weights, n_proposed=n_pair)
    rate = total_accepted / total_drawn if total_drawn else 0.0
    if rate < 1e-6:
        raise LowAcceptanceError(
            f"acceptance rate {rate} below 1e-6 over budget {total_drawn}; increase mc_budget"
        )
    return SampleCloud(ctd.dim, strata)


def constrained_marginals(
    ctd: ConstrainedTrajectoryDensity,
    mc_budget: int = 100_000,
    rng_seed: int = 0,
) -> MarginalMoments:
    """Per-time-step moment-matched mean/covariance by rejection sampling."""
    cloud = ctd.sample_cloud(mc_budget, rng_seed)
    total_drawn = sum(s.n_proposed for s in cloud.strata.values())
    total_accepted = sum(s.states.shape[0] for s in cloud.strata.values())
    times = sorted({t for (b, e) in cloud.strata for t in range(b, e + 1)})
    d = ctd.dim
    means = np.full((len(times), d), np.nan)
    covs = np.full((len(times), d, d), np.nan)
    alive = np.zeros(len(times))
    for k, t in enumerate(times):
        xs, ws = [], []
        for (b, e), s in cloud.strata.items():
            if b <= t <= e:
                xs.append(s.states[:, t - b, :])
                ws.append(s.weights)
        if not xs:
            continue
        x = np.vstack(xs)
        w = np.concatenate(ws)
        total = w.sum()
        alive[k] = total
        mean = (w[:, None] * x).sum(axis=0) / total
        centered = x - mean
        means[k] = mean
        covs[k] = (w[:, None] * centered).T @ centered / total
    rate = total_accepted / total_drawn if total_drawn else 0.0
    return MarginalMoments(times, means, covs, alive, rate, total_accepted)
