"""Minimax piecewise-linear changepoint localization and detection.

For each interior knot t_k the best continuous one-knot piecewise-linear fit
under the sup norm is a 4-variable linear program

    minimize z  s.t.  |alpha + bL (t_i - t_k) + (bR - bL)(t_i - t_k) 1{t_i > t_k} - y_i| <= z,

solved with dual simplex so the reported (alpha, bL, bR) is a vertex of the
feasible set.  The changepoint estimate is the smallest knot minimizing the
optimal objective, and |bR - bL| at that knot is the detection statistic,
calibrated under the null (equal jump probabilities) by a parametric
bootstrap of the whole simulate/embed/localize pipeline.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sparse
from scipy.optimize import linprog

from . import _rng
from .embed import estimated_dissimilarity_matrix
from .graphs import sample_tsg
from .mirror import cmds, first_dimension
from .walks import WalkConfig, simulate_walk

__all__ = [
    "PiecewiseLinearFit",
    "DetectionResult",
    "fit_at_knot",
    "localize",
    "detection_statistic",
    "bootstrap_detect",
]

#: Objectives within this (scale-relative) distance of the minimum count as
#: tied, so degenerate all-knots-equal data resolves to the smallest knot
#: even through solver-level noise.
_TIE_TOL = 1e-12


@dataclass(frozen=True)
class PiecewiseLinearFit:
    """Best sup-norm one-knot fit over all interior knots.

    knot_index          0-based position of the chosen knot within ts
    t_hat               ts[knot_index]
    alpha               fitted value at the knot
    beta_left/right     slopes left/right of the knot
    objective           minimax residual at the chosen knot
    per_knot_objectives objective of every interior knot (positions 1..m-2)
    n_tied_knots        knots whose objective ties the minimum
    """

    knot_index: int
    t_hat: float
    alpha: float
    beta_left: float
    beta_right: float
    objective: float
    per_knot_objectives: np.ndarray = field(repr=False, compare=False)
    n_tied_knots: int = 1


@dataclass(frozen=True)
class DetectionResult:
    """Bootstrap changepoint test.

    critical_value   empirical (1 - level) quantile of the null statistics
    p_value          add-one-corrected fraction of null draws >= observed
    reject           observed statistic exceeds the critical value
    observed         the statistic under test
    null_statistics  sorted bootstrap draws (kept for reporting)
    n_failed         replicates whose pipeline raised and were skipped
    """

    critical_value: float
    p_value: float
    reject: bool
    observed: float
    null_statistics: np.ndarray = field(repr=False, compare=False)
    n_failed: int = 0


def _validate_series(ts, ys):
    ts = np.asarray(ts, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if ts.ndim != 1 or ts.shape != ys.shape:
        raise ValueError(f"ts and ys must be equal-length vectors, got {ts.shape} and {ys.shape}")
    if not (np.diff(ts) > 0).all():
        raise ValueError("ts must be strictly increasing")
    return ts, ys


def _knot_design(ts, knot: int) -> np.ndarray:
    offset = ts - ts[knot]
    left = np.where(ts <= ts[knot], offset, 0.0)
    right = np.where(ts > ts[knot], offset, 0.0)
    return np.column_stack([np.ones(len(ts)), left, right])


def fit_at_knot(ts, ys, knot: int):
    """Solve the sup-norm fit with the slope change forced at ts[knot].

    Returns (alpha, beta_left, beta_right, objective).  knot is a 0-based
    index and must be interior (1 <= knot <= m-2) so both slopes are
    identified.  The paper-level constraint beta_left != beta_right is an
    open set with no LP meaning and is relaxed; equality at the optimum just
    signals linear data.
    """
    ts, ys = _validate_series(ts, ys)
    m = len(ts)
    if not 1 <= knot <= m - 2:
        raise ValueError(f"knot index {knot} must be interior: 1 <= knot <= {m - 2}")
    # Variables (z, alpha, bL, bR); rows: residual <= z and -residual <= z.
    pred = _knot_design(ts, knot)
    a_ub = np.vstack([
        np.column_stack([-np.ones(m), pred]),
        np.column_stack([-np.ones(m), -pred]),
    ])
    b_ub = np.concatenate([ys, -ys])
    bounds = [(0, None), (None, None), (None, None), (None, None)]
    res = linprog(c=[1.0, 0.0, 0.0, 0.0], A_ub=a_ub, b_ub=b_ub, bounds=bounds,
                  method="highs-ds")
    if not res.success:
        raise RuntimeError(f"LP solver failed at knot {knot}: {res.message}")
    z, alpha, beta_left, beta_right = res.x
    return float(alpha), float(beta_left), float(beta_right), float(z)


def _fit_all_knots_batched(ts, ys):
    """All interior-knot LPs as one block-diagonal solve.

    The blocks share no variables or constraints, so a basic optimal
    solution of the combined program is a vertex solution of every
    per-knot program; batching only amortizes solver overhead.
    """
    m = len(ts)
    knots = range(1, m - 1)
    blocks = []
    for k in knots:
        pred = _knot_design(ts, k)
        blocks.append(np.vstack([
            np.column_stack([-np.ones(m), pred]),
            np.column_stack([-np.ones(m), -pred]),
        ]))
    a_ub = sparse.block_diag(blocks, format="csc")
    n_knots = len(blocks)
    b_ub = np.tile(np.concatenate([ys, -ys]), n_knots)
    c = np.tile([1.0, 0.0, 0.0, 0.0], n_knots)
    bounds = [(0, None), (None, None), (None, None), (None, None)] * n_knots
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs-ds")
    if not res.success:
        raise RuntimeError(f"batched LP solve failed: {res.message}")
    x = res.x.reshape(n_knots, 4)
    return [(float(a), float(bl), float(br), float(z)) for z, a, bl, br in x]


#: Above this many stacked constraint rows localize falls back to per-knot
#: solves to keep the batched LP from ballooning.
_BATCH_ROW_LIMIT = 400_000


def localize(ts, ys) -> PiecewiseLinearFit:
    """Scan all interior knots and keep the smallest one achieving min S_k."""
    ts, ys = _validate_series(ts, ys)
    m = len(ts)
    if m < 4:
        raise ValueError(f"need at least 4 points to localize, got {m}")
    knots = range(1, m - 1)
    if (m - 2) * 2 * m <= _BATCH_ROW_LIMIT:
        fits = _fit_all_knots_batched(ts, ys)
    else:
        fits = [fit_at_knot(ts, ys, k) for k in knots]
    objectives = np.array([f[3] for f in fits])
    scale = max(1.0, float(np.max(np.abs(ys))))
    tol = _TIE_TOL * scale
    tied = objectives <= objectives.min() + tol
    best = int(np.argmax(tied))  # first tied knot
    alpha, beta_left, beta_right, objective = fits[best]
    knot_index = best + 1
    return PiecewiseLinearFit(
        knot_index=knot_index,
        t_hat=float(ts[knot_index]),
        alpha=alpha,
        beta_left=beta_left,
        beta_right=beta_right,
        objective=objective,
        per_knot_objectives=objectives,
        n_tied_knots=int(tied.sum()),
    )


def detection_statistic(fit: PiecewiseLinearFit) -> float:
    """Slope change |beta_right - beta_left| of a fitted changepoint."""
    return abs(fit.beta_right - fit.beta_left)


def null_pipeline_statistic(cfg: WalkConfig, n: int, seed: int,
                            ase_dim: int = 1, cmds_dim: int = 1) -> float:
    """Detection statistic of one simulated pipeline run (used as the
    bootstrap null when cfg has p == q)."""
    walk_cfg = cfg.with_seed(seed)
    latents = simulate_walk(walk_cfg, n)
    tsg = sample_tsg(latents, seed=seed + 1)
    dmat = estimated_dissimilarity_matrix(tsg, d=ase_dim)
    ys = first_dimension(cmds(dmat, cmds_dim))
    return detection_statistic(localize(tsg.times, ys))


def bootstrap_detect(
    cfg: WalkConfig,
    n: int,
    observed_statistic: float,
    replicates: int,
    level: float,
    seed: int,
    ase_dim: int = 1,
    cmds_dim: int = 1,
    n_jobs: int | None = None,
) -> DetectionResult:
    """Calibrate the slope-change statistic by a null-model bootstrap.

    cfg must have p == q (no changepoint).  Each replicate simulates a fresh
    null time series of graphs, runs the full estimation pipeline, and
    records the statistic.  The critical value is the empirical (1 - level)
    quantile; the p-value uses the add-one correction (R p + 1)/(R + 1) so
    it is never exactly 0.  More than 5% failed replicates aborts.
    """
    from .experiments import run_parallel  # local import, avoids cycle

    if cfg.p != cfg.q:
        raise ValueError("bootstrap null config must have p == q")
    if replicates < 100:
        raise ValueError(f"need at least 100 replicates, got {replicates}")
    if not 0 < level < 1:
        raise ValueError(f"level must lie in (0, 1), got {level}")

    jobs = [
        (cfg, n, _derived_seed(seed, r), ase_dim, cmds_dim)
        for r in range(replicates)
    ]
    results = run_parallel(_null_statistic_job, jobs, n_jobs=n_jobs)
    stats = np.array([s for s in results if s is not None])
    n_failed = int(replicates - len(stats))
    if n_failed > 0.05 * replicates:
        raise RuntimeError(
            f"{n_failed}/{replicates} bootstrap replicates failed; aborting"
        )
    critical = float(np.quantile(stats, 1 - level, method="higher"))
    p_value = (np.sum(stats >= observed_statistic) + 1) / (len(stats) + 1)
    return DetectionResult(
        critical_value=critical,
        p_value=float(p_value),
        reject=bool(observed_statistic > critical),
        observed=float(observed_statistic),
        null_statistics=np.sort(stats),
        n_failed=n_failed,
    )


def _derived_seed(seed: int, replicate: int) -> int:
    # One 63-bit word per (seed, DETECT, replicate) stream.
    g = _rng.generator(seed, _rng.DETECT, replicate)
    return int(g.integers(0, 2 ** 63))


def _null_statistic_job(args):
    cfg, n, rep_seed, ase_dim, cmds_dim = args
    try:
        return null_pipeline_statistic(cfg, n, rep_seed, ase_dim, cmds_dim)
    except Exception:
        return None
