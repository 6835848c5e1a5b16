"""Point-target scenario simulation and Bernoulli track fitting.

Ground truth follows the standard linear-Gaussian point-target model:
Poisson births, per-step survival, linear transition with additive noise.
Measurements are linear detections plus uniform Poisson clutter.
``fit_bernoulli_track`` turns one associated measurement sequence into a
Bernoulli trajectory density by filtering/smoothing every plausible
(birth, death) hypothesis and weighting hypotheses by measurement evidence
and birth/survival priors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import logsumexp

from .core import TimeWindow, Trajectory
from .errors import DimensionMismatchError
from .gaussian import BirthDeathPmf, GaussianSequence, TrajectoryDensity, child_rng
from .rfs import BernoulliTrajectory


@dataclass(frozen=True)
class MotionModel:
    """Linear-Gaussian dynamics with Poisson birth and per-step survival."""

    transition: np.ndarray
    process_noise: np.ndarray
    survival: float
    birth_rate: float
    birth_mean: np.ndarray
    birth_cov: np.ndarray
    birth_schedule: Optional[Tuple[int, ...]] = None

    def __post_init__(self):
        F = np.atleast_2d(np.asarray(self.transition, dtype=np.float64))
        Q = np.atleast_2d(np.asarray(self.process_noise, dtype=np.float64))
        bm = np.asarray(self.birth_mean, dtype=np.float64).ravel()
        bc = np.atleast_2d(np.asarray(self.birth_cov, dtype=np.float64))
        d = F.shape[0]
        if F.shape != (d, d) or Q.shape != (d, d) or bm.size != d or bc.shape != (d, d):
            raise DimensionMismatchError("motion model matrices have inconsistent shapes")
        if not (0.0 <= self.survival <= 1.0):
            raise ValueError(f"survival probability {self.survival} outside [0, 1]")
        if self.birth_rate < 0.0:
            raise ValueError(f"birth rate {self.birth_rate} must be >= 0")
        if np.linalg.eigvalsh(0.5 * (Q + Q.T)).min() < -1e-10:
            raise ValueError("process noise must be PSD")
        object.__setattr__(self, "transition", F)
        object.__setattr__(self, "process_noise", 0.5 * (Q + Q.T))
        object.__setattr__(self, "birth_mean", bm)
        object.__setattr__(self, "birth_cov", 0.5 * (bc + bc.T))

    @property
    def dim(self) -> int:
        return self.transition.shape[0]


@dataclass(frozen=True)
class SensorModel:
    """Linear detections with additive noise and uniform Poisson clutter."""

    measurement: np.ndarray
    noise: np.ndarray
    detection: float
    clutter_rate: float
    clutter_low: np.ndarray
    clutter_high: np.ndarray

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.measurement, dtype=np.float64))
        R = np.atleast_2d(np.asarray(self.noise, dtype=np.float64))
        lo = np.asarray(self.clutter_low, dtype=np.float64).ravel()
        hi = np.asarray(self.clutter_high, dtype=np.float64).ravel()
        m = H.shape[0]
        if R.shape != (m, m) or lo.size != m or hi.size != m:
            raise DimensionMismatchError("sensor model matrices have inconsistent shapes")
        if not (0.0 <= self.detection <= 1.0):
            raise ValueError(f"detection probability {self.detection} outside [0, 1]")
        if self.clutter_rate < 0.0:
            raise ValueError(f"clutter rate {self.clutter_rate} must be >= 0")
        if np.linalg.eigvalsh(0.5 * (R + R.T)).min() < -1e-10:
            raise ValueError("measurement noise must be PSD")
        object.__setattr__(self, "measurement", H)
        object.__setattr__(self, "noise", 0.5 * (R + R.T))
        object.__setattr__(self, "clutter_low", lo)
        object.__setattr__(self, "clutter_high", hi)

    @property
    def meas_dim(self) -> int:
        return self.measurement.shape[0]


@dataclass
class Measurement:
    time: int
    value: np.ndarray
    source: Optional[int] = None  # truth trajectory index, None for clutter


@dataclass
class Scenario:
    window: TimeWindow
    truth: List[Trajectory]
    measurements: Dict[int, List[Measurement]] = field(default_factory=dict)

    def __post_init__(self):
        for t in self.truth:
            if t.birth < self.window.alpha or t.death > self.window.gamma:
                raise ValueError(f"trajectory {t.birth}..{t.death} exceeds window")


def _noise_factor(cov: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(cov)
    return v * np.sqrt(np.clip(w, 0.0, None))


def simulate_truth(mm: MotionModel, window: TimeWindow, rng_seed: int = 0) -> List[Trajectory]:
    """Sample a ground-truth trajectory set from the motion model.

    A ``birth_schedule`` replaces Poisson births with one deterministic birth
    per listed time step.
    """
    rng = child_rng(rng_seed)
    q_fac = _noise_factor(mm.process_noise)
    b_fac = _noise_factor(mm.birth_cov)
    alive: List[Tuple[int, List[np.ndarray]]] = []
    done: List[Trajectory] = []
    for k in window.steps():
        survivors = []
        for birth, states in alive:
            if rng.random() < mm.survival:
                x = mm.transition @ states[-1] + q_fac @ rng.standard_normal(mm.dim)
                states.append(x)
                survivors.append((birth, states))
            else:
                done.append(Trajectory(birth, k - 1, np.array(states)))
        alive = survivors
        if mm.birth_schedule is not None:
            n_births = mm.birth_schedule.count(k)
        else:
            n_births = int(rng.poisson(mm.birth_rate))
        for _ in range(n_births):
            x0 = mm.birth_mean + b_fac @ rng.standard_normal(mm.dim)
            alive.append((k, [x0]))
    for birth, states in alive:
        done.append(Trajectory(birth, window.gamma, np.array(states)))
    done.sort(key=lambda t: (t.birth, t.death))
    return done


def simulate_measurements(
    truth: Sequence[Trajectory],
    sm: SensorModel,
    window: TimeWindow,
    rng_seed: int = 0,
) -> Dict[int, List[Measurement]]:
    """Per-step detections (probability ``detection``) plus uniform Poisson clutter."""
    rng = child_rng(rng_seed)
    r_fac = _noise_factor(sm.noise)
    out: Dict[int, List[Measurement]] = {k: [] for k in window.steps()}
    for k in window.steps():
        for i, traj in enumerate(truth):
            if traj.alive_at(k) and rng.random() < sm.detection:
                z = sm.measurement @ traj.state_at(k) + r_fac @ rng.standard_normal(sm.meas_dim)
                out[k].append(Measurement(k, z, source=i))
        for _ in range(int(rng.poisson(sm.clutter_rate))):
            z = rng.uniform(sm.clutter_low, sm.clutter_high)
            out[k].append(Measurement(k, z, source=None))
    return out


def _smooth_hypothesis(
    beta: int,
    eps: int,
    meas: Dict[int, np.ndarray],
    mm: MotionModel,
    sm: SensorModel,
) -> Tuple[GaussianSequence, float]:
    """Kalman filter + RTS smoother over beta..eps; returns the joint smoothed
    Gaussian (with cross-time covariances from the smoother gains) and the
    log marginal measurement likelihood."""
    F, Q, H, R = mm.transition, mm.process_noise, sm.measurement, sm.noise
    d = mm.dim
    nu = eps - beta + 1
    means_f = np.empty((nu, d))
    covs_f = np.empty((nu, d, d))
    means_p = np.empty((nu, d))
    covs_p = np.empty((nu, d, d))
    log_lik = 0.0
    m, P = mm.birth_mean.copy(), mm.birth_cov.copy()
    for i, k in enumerate(range(beta, eps + 1)):
        if i > 0:
            m = F @ m
            P = F @ P @ F.T + Q
        means_p[i], covs_p[i] = m, P
        z = meas.get(k)
        if z is not None:
            S = H @ P @ H.T + R
            S = 0.5 * (S + S.T)
            innov = z - H @ m
            sign, logdet = np.linalg.slogdet(S)
            sol = np.linalg.solve(S, innov)
            log_lik += -0.5 * (z.size * math.log(2 * math.pi) + logdet + innov @ sol)
            K = np.linalg.solve(S, H @ P).T
            m = m + K @ innov
            P = P - K @ S @ K.T
            P = 0.5 * (P + P.T)
        means_f[i], covs_f[i] = m, P
    # RTS backward pass
    means_s = means_f.copy()
    covs_s = covs_f.copy()
    gains = np.empty((nu - 1, d, d)) if nu > 1 else np.empty((0, d, d))
    for i in range(nu - 2, -1, -1):
        G = np.linalg.solve(covs_p[i + 1], F @ covs_f[i]).T
        gains[i] = G
        means_s[i] = means_f[i] + G @ (means_s[i + 1] - means_p[i + 1])
        covs_s[i] = covs_f[i] + G @ (covs_s[i + 1] - covs_p[i + 1]) @ G.T
        covs_s[i] = 0.5 * (covs_s[i] + covs_s[i].T)
    # Joint covariance: Cov(x_s, x_t) = G_s ... G_{t-1} P_t for s < t.
    joint_mean = means_s.reshape(-1)
    joint_cov = np.zeros((nu * d, nu * d))
    for t in range(nu):
        joint_cov[t * d : (t + 1) * d, t * d : (t + 1) * d] = covs_s[t]
        cross = covs_s[t]
        for s in range(t - 1, -1, -1):
            cross = gains[s] @ cross
            joint_cov[s * d : (s + 1) * d, t * d : (t + 1) * d] = cross
            joint_cov[t * d : (t + 1) * d, s * d : (s + 1) * d] = cross.T
    joint_cov = 0.5 * (joint_cov + joint_cov.T)
    return GaussianSequence(joint_mean, joint_cov, d), log_lik


def fit_bernoulli_track(
    measurements: Sequence[Tuple[int, np.ndarray]],
    mm: MotionModel,
    sm: SensorModel,
    window: TimeWindow,
    r0: float = 0.9,
    slack: int = 3,
) -> BernoulliTrajectory:
    """Bernoulli density from one associated measurement sequence.

    Hypothesized births lie within ``slack`` steps before the first
    measurement and deaths within ``slack`` steps after the last one.
    Existence r is the supplied prior, not estimated from data.
    """
    if not measurements:
        raise ValueError("measurement list is empty")
    times = [t for t, _ in measurements]
    if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
        raise ValueError("measurement times must be strictly increasing")
    if times[0] < window.alpha or times[-1] > window.gamma:
        raise ValueError("measurement times must lie within the window")
    meas = {int(t): np.asarray(z, dtype=np.float64).ravel() for t, z in measurements}

    betas = range(max(window.alpha, times[0] - slack), times[0] + 1)
    epss = range(times[-1], min(window.gamma, times[-1] + slack) + 1)
    pairs: List[Tuple[int, int]] = []
    conds: List[GaussianSequence] = []
    log_w: List[float] = []
    n_betas = len(list(betas))
    for b in betas:
        for e in epss:
            gs, log_lik = _smooth_hypothesis(b, e, meas, mm, sm)
            surv = math.log(mm.survival) * (e - b) if mm.survival > 0 else (0.0 if e == b else -np.inf)
            if e == window.gamma:
                death = 0.0
            else:
                death = math.log(1.0 - mm.survival) if mm.survival < 1.0 else -np.inf
            prior = -math.log(n_betas) + surv + death
            pairs.append((b, e))
            conds.append(gs)
            log_w.append(log_lik + prior)
    log_w = np.asarray(log_w)
    probs = np.exp(log_w - logsumexp(log_w))
    probs /= probs.sum()
    density = TrajectoryDensity(BirthDeathPmf(tuple(pairs), probs), tuple(conds))
    return BernoulliTrajectory(r0, density)
