"""Shared test fixtures-in-spirit: independent oracles and generators.

Everything here is deliberately independent of the package's computation
paths: Monte Carlo moment estimates for the closed-form d_MV values,
exhaustive subset search for the common-component heuristic, brute-force
alignment search for the Procrustes distance, and plain reimplementations
of small quantities (binomial moments, zero crossings).
"""

from __future__ import annotations

import itertools

import numpy as np


def mc_walk_second_moment(m, c, delta, p, q, t_star_step, i, j, walks, seed):
    """Monte Carlo estimate of E[(X_i - X_j)^2] for the jump walk.

    Simulated directly from the model definition (no shared code with the
    package): step s jumps with probability p if s <= t_star_step else q.
    Returns (estimate, standard error).
    """
    rng = np.random.default_rng(seed)
    steps = np.arange(1, m + 1)
    probs = np.where(steps <= t_star_step, p, q)
    jumps = rng.random((walks, m)) < probs
    pos = c + delta * np.cumsum(jumps, axis=1)
    full = np.concatenate([np.full((walks, 1), float(c)), pos], axis=1)
    sq = (full[:, i] - full[:, j]) ** 2
    return float(sq.mean()), float(sq.std(ddof=1) / np.sqrt(walks))


def brute_force_common_component(series) -> np.ndarray:
    """Largest vertex subset inducing a connected subgraph in every matrix.

    Exhaustive search over all subsets (n <= ~14), size descending; a
    single-vertex subgraph does not count (needs >= 2 vertices).
    """
    mats = [np.asarray(a) for a in series]
    n = mats[0].shape[0]
    vertices = list(range(n))
    for size in range(n, 1, -1):
        for subset in itertools.combinations(vertices, size):
            idx = np.array(subset)
            if all(_is_connected(a[np.ix_(idx, idx)]) for a in mats):
                return idx
    return np.arange(0)


def _is_connected(a: np.ndarray) -> bool:
    """Connectivity of an induced subgraph; strong if directed."""
    n = a.shape[0]
    if n < 2:
        return False
    directed = not np.array_equal(a, a.T)
    reach = _reachable(a, 0)
    if not reach.all():
        return False
    if directed:
        return _reachable(a.T, 0).all()
    return True


def _reachable(a: np.ndarray, start: int) -> np.ndarray:
    n = a.shape[0]
    seen = np.zeros(n, dtype=bool)
    stack = [start]
    seen[start] = True
    while stack:
        v = stack.pop()
        for w in np.flatnonzero(a[v]):
            if not seen[w]:
                seen[w] = True
                stack.append(w)
    return seen


def brute_force_alignment_distance(x, y, angles=10000):
    """min over O(2) of n^{-1/2} ||x - y W||_2 by dense grid search."""
    best = np.inf
    n = x.shape[0]
    for theta in np.linspace(0, 2 * np.pi, angles, endpoint=False):
        c, s = np.cos(theta), np.sin(theta)
        for refl in (1.0, -1.0):
            w = np.array([[c, -s * refl], [s, c * refl]])
            best = min(best, np.linalg.norm(x - y @ w, 2) / np.sqrt(n))
    return best


def zero_crossings(values, times):
    """Linearly interpolated zero-crossing locations of a sampled curve."""
    out = []
    for i in range(len(values) - 1):
        if values[i] == 0.0:
            out.append(times[i])
        elif values[i] * values[i + 1] < 0:
            frac = values[i] / (values[i] - values[i + 1])
            out.append(times[i] + frac * (times[i + 1] - times[i]))
    return np.array(out)


def crossing_gap_ratio(values, times, t_star):
    """Mean consecutive-crossing gap on (0, t*) over the mean gap on (t*, 1).

    Raises ValueError when either side has fewer than two crossings (the
    statistic is undefined there).
    """
    crossings = zero_crossings(values, times)
    pre = crossings[crossings < t_star]
    post = crossings[crossings > t_star]
    if len(pre) < 2 or len(post) < 2:
        raise ValueError(
            f"gap ratio undefined: {len(pre)} pre-change and {len(post)} "
            "post-change zero crossings (need >= 2 on each side)"
        )
    return float(np.diff(pre).mean() / np.diff(post).mean())


def random_rdpg(n, latent, seed):
    """One undirected RDPG snapshot with constant latent position."""
    rng = np.random.default_rng(seed)
    p = latent * latent
    a = (rng.random((n, n)) < p).astype(np.uint8)
    a = np.triu(a, 1)
    return a + a.T
