"""Random-walk latent position processes and their closed-form oracles.

A walk starts at ``c`` and at each of ``m`` steps jumps by ``delta`` with a
step-dependent probability: ``p`` up to the changepoint step, ``q`` after it.
The module also evaluates the analytic quantities attached to this family:
the exact pairwise d_MV matrix, the limiting (centered, piecewise-linear)
mirror, and the mirror of a deterministic trajectory.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from . import _rng
from .dissim import DissimilarityMatrix

__all__ = [
    "WalkConfig",
    "LatentTrajectorySet",
    "simulate_walk",
    "true_dmv_squared",
    "true_dmv_matrix",
    "asymptotic_mirror",
    "deterministic_mirror",
]


@dataclass(frozen=True)
class WalkConfig:
    """Parameters of the jump-probability-changepoint walk.

    m       number of sampled times (grid i/m, i = 1..m)
    c       starting latent position, >= 0
    delta   jump size, > 0, with c + delta*m <= 1 so inner products stay
            valid edge probabilities
    p, q    pre-/post-change jump probabilities in [0, 1]; p == q means no
            changepoint
    t_star  changepoint location on the unit interval, in (0, 1)
    seed    64-bit seed for the walk increments
    """

    m: int
    c: float
    delta: float
    p: float
    q: float
    t_star: float
    seed: int = 0

    def __post_init__(self):
        if int(self.m) != self.m or self.m < 1:
            raise ValueError(f"m must be a positive integer, got {self.m}")
        if not 0 <= self.c:
            raise ValueError(f"c must be >= 0, got {self.c}")
        if not self.delta > 0:
            raise ValueError(f"delta must be > 0, got {self.delta}")
        for name, value in (("p", self.p), ("q", self.q)):
            if not 0 <= value <= 1:
                raise ValueError(f"{name} must lie in [0, 1], got {value}")
        if not 0 < self.t_star < 1:
            raise ValueError(f"t_star must lie in (0, 1), got {self.t_star}")
        if self.c + self.delta * self.m > 1 + 1e-12:
            raise ValueError(
                f"c + delta*m = {self.c + self.delta * self.m} exceeds 1; "
                "latent positions would leave [0, 1]"
            )
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {self.seed}")

    @property
    def changepoint_step(self) -> int:
        """Last step index that still uses p: floor(t_star * m).

        The 1e-9 nudge absorbs IEEE representation error when t_star * m is
        an exact integer in real arithmetic (e.g. 0.7 * 10).
        """
        return int(np.floor(self.t_star * self.m + 1e-9))

    def with_seed(self, seed: int) -> "WalkConfig":
        return replace(self, seed=int(seed))

    @property
    def times(self) -> np.ndarray:
        return np.arange(1, self.m + 1) / self.m


@dataclass(frozen=True)
class LatentTrajectorySet:
    """Per-vertex latent trajectories on a shared time grid.

    positions[j, i] is the latent position of vertex j at times[i].  Rows are
    nondecreasing (walk increments are nonnegative) and stay in [0, 1].
    """

    n: int
    times: np.ndarray
    positions: np.ndarray
    dim: int = 1

    @property
    def m(self) -> int:
        return len(self.times)


def simulate_walk(cfg: WalkConfig, n: int) -> LatentTrajectorySet:
    """Draw n independent walk trajectories on the grid i/m, i = 1..m.

    Step i (from time (i-1)/m to i/m) adds delta with probability p when
    i <= floor(t_star*m), else with probability q.  Increments are
    independent across vertices and steps; cell (vertex, step) always
    consumes the same Philox counter position, so output is a pure function
    of (cfg, n).
    """
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n}")
    n = int(n)
    steps = np.arange(1, cfg.m + 1)
    probs = np.where(steps <= cfg.changepoint_step, cfg.p, cfg.q)
    rng = _rng.generator(cfg.seed, _rng.WALK)
    jumps = rng.random((n, cfg.m)) < probs
    positions = cfg.c + cfg.delta * np.cumsum(jumps, axis=1)
    return LatentTrajectorySet(n=n, times=cfg.times, positions=positions)


def _regime_step_counts(cfg: WalkConfig, i, j):
    """Counts of p-steps and q-steps strictly between step indices i < j."""
    lo, hi = np.minimum(i, j), np.maximum(i, j)
    k = cfg.changepoint_step
    n_p = np.clip(np.minimum(hi, k) - np.minimum(lo, k), 0, None)
    n_q = (hi - lo) - n_p
    return n_p, n_q


def true_dmv_squared(cfg: WalkConfig, i, j):
    """Exact d_MV^2 between walk positions at step indices i, j in {0..m}.

    The squared distance is E[(X_i - X_j)^2]: the increment over |i - j|
    steps is delta times a sum of independent Bernoulli counts, n_p of them
    with rate p and n_q with rate q, giving

        delta^2 * ((n_p p + n_q q)^2 + n_p p(1-p) + n_q q(1-q)).

    Scalar or broadcastable array indices are accepted.
    """
    i = np.asarray(i)
    j = np.asarray(j)
    if (i < 0).any() or (j < 0).any() or (i > cfg.m).any() or (j > cfg.m).any():
        raise ValueError("step indices must lie in {0..m}")
    n_p, n_q = _regime_step_counts(cfg, i, j)
    mean = n_p * cfg.p + n_q * cfg.q
    var = n_p * cfg.p * (1 - cfg.p) + n_q * cfg.q * (1 - cfg.q)
    return cfg.delta ** 2 * (mean ** 2 + var)


def true_dmv_matrix(cfg: WalkConfig) -> DissimilarityMatrix:
    """Exact m x m d_MV matrix on the sampled grid (step indices 1..m)."""
    idx = np.arange(1, cfg.m + 1)
    sq = true_dmv_squared(cfg, idx[:, None], idx[None, :])
    sq = np.maximum(sq, 0.0)
    values = np.sqrt(sq)
    values = np.triu(values, 1)
    values = values + values.T
    return DissimilarityMatrix(values=values, kind="true_dmv")


def asymptotic_mirror(p: float, q: float, t_star: float, t):
    """Limiting mirror of the in-fill walk: centered piecewise-linear curve.

    Returns p*t + c0 for t <= t_star and q*t + (p-q)*t_star + c0 after, with
    c0 = t_star*(p-q)*(t_star/2 - 1) - q/2, the constant that makes the
    curve integrate to zero over [0, 1].
    """
    if not 0 < t_star < 1:
        raise ValueError(f"t_star must lie in (0, 1), got {t_star}")
    t = np.asarray(t, dtype=float)
    if (t < 0).any() or (t > 1).any():
        raise ValueError("t must lie in [0, 1]")
    c0 = t_star * (p - q) * (t_star / 2 - 1) - q / 2
    out = np.where(t <= t_star, p * t + c0, q * t + (p - q) * t_star + c0)
    return out if out.ndim else float(out)


def deterministic_mirror(norms) -> np.ndarray:
    """Mirror of a deterministic trajectory: its norm sequence, centered.

    For a deterministic latent path the pairwise d_MV distance is the
    absolute difference of trajectory norms, so subtracting the time-average
    gives an exact one-dimensional mirror.
    """
    norms = np.asarray(norms, dtype=float)
    if norms.size == 0:
        raise ValueError("empty trajectory")
    return norms - norms.mean()
