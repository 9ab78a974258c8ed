"""Acceptance suite: one test per criterion, at the stated tolerances.

Statistical criteria use fixed seeds, so the suite is reproducible run to
run.  The conftest prints a PASS/FAIL line per criterion in the terminal
summary.  Criterion 8 is expected to fail: the gap statistic it names is
undefined on the literal second eigenvector (see the frequency-break test
in test_mirror.py for the substantive Appendix-style check, and the
decisions ledger for the analysis).
"""

import numpy as np
import pytest
from scipy.integrate import quad

from helpers import (
    brute_force_common_component,
    crossing_gap_ratio,
    mc_walk_second_moment,
)
from netmirror import (
    WalkConfig,
    asymptotic_mirror,
    bootstrap_detect,
    cmds,
    dimension_sweep,
    estimated_dissimilarity_matrix,
    estimated_dmv,
    fit_at_knot,
    first_dimension,
    iso_reduce,
    largest_common_component,
    localize,
    mc_localization,
    network_summaries,
    sample_tsg,
    simulate_walk,
    true_dmv_matrix,
    true_dmv_squared,
)
from netmirror.experiments import replicate_seeds, run_parallel
from netmirror.localize import null_pipeline_statistic

pytestmark = pytest.mark.acceptance


def model4_cfg(m, p=0.4, q=0.2, t_star=0.5, seed=0):
    return WalkConfig(m=m, c=0.0, delta=1 / m, p=p, q=q, t_star=t_star, seed=seed)


def experiment_cfg(m, p=0.4, q=0.3, t_star=0.5, seed=0):
    return WalkConfig(m=m, c=0.1, delta=0.9 / m, p=p, q=q, t_star=t_star, seed=seed)


# --- criterion 1: deterministic oracle identities --------------------------


class TestCriterion1OracleIdentities:
    def test_dmv_formulas_match_monte_carlo_moments(self):
        walks = 1_000_000
        within = WalkConfig(m=40, c=0.0, delta=1 / 40, p=0.4, q=0.4, t_star=0.5, seed=0)
        est, se = mc_walk_second_moment(40, 0.0, 1 / 40, 0.4, 0.4,
                                        within.changepoint_step, 10, 0,
                                        walks=walks, seed=101)
        assert abs(est - true_dmv_squared(within, 10, 0)) < 3 * se

        across = model4_cfg(40)
        est, se = mc_walk_second_moment(40, 0.0, 1 / 40, 0.4, 0.2,
                                        across.changepoint_step, 10, 30,
                                        walks=walks, seed=102)
        assert abs(est - true_dmv_squared(across, 10, 30)) < 3 * se

        est, se = mc_walk_second_moment(40, 0.0, 1 / 40, 0.4, 0.2,
                                        across.changepoint_step, 25, 35,
                                        walks=walks, seed=103)
        assert abs(est - true_dmv_squared(across, 25, 35)) < 3 * se

    def test_asymptotic_mirror_integrates_to_zero(self):
        for p, q, t_star in [(0.4, 0.2, 0.5), (0.7, 0.1, 0.3), (0.2, 0.6, 0.75)]:
            total, err = quad(lambda t: asymptotic_mirror(p, q, t_star, t),
                              0, 1, points=[t_star], limit=200)
            assert abs(total) < 1e-12 + err

    def test_exactly_realizable_matrix_is_psd_rank_one(self):
        t = np.linspace(0, 1, 30)
        line = 0.45 * t + 0.05
        d = np.abs(line[:, None] - line[None, :])
        me = cmds(d, 1)
        tol = 1e-8 * max(1.0, me.spectrum[0])
        assert me.spectrum[0] > 0
        assert np.all(np.abs(me.spectrum[1:]) <= tol)

    def test_kkt_value_matches_lp_on_dense_grid(self):
        m = 2001
        ts = np.arange(m) / (m - 1)
        p, q, t_star = 0.4, 0.2, 0.5
        delta = p - q
        ys = asymptotic_mirror(p, q, t_star, ts)
        for knot in (400, 600, 800):
            _, _, _, obj = fit_at_knot(ts, ys, knot)
            t_hat = ts[knot]
            oracle = abs(delta) * (t_star - t_hat) * (1 - t_star) / (2 * (1 - t_hat))
            assert abs(obj - oracle) <= 2 / 2001 * abs(delta)


# --- criterion 2: estimated dissimilarities track the truth ----------------


def _criterion2_replicate(args):
    n, replicate = args
    cfg = model4_cfg(20)
    walk_seed, graph_seed = replicate_seeds(1002 + n, replicate)
    tsg = sample_tsg(simulate_walk(cfg.with_seed(walk_seed), n), seed=graph_seed)
    est = estimated_dissimilarity_matrix(tsg, d=1).values
    true = true_dmv_matrix(cfg).values
    bound = np.log(n) / np.sqrt(n)
    iu = np.triu_indices(cfg.m, 1)
    diff = np.abs(est ** 2 - true ** 2)[iu]
    return int(np.sum(diff > bound)), diff.size


class TestCriterion2DissimilarityConsistency:
    def test_violation_fraction_small_and_nonincreasing(self):
        replicates = 100
        fractions = {}
        for n in (500, 2000):
            results = run_parallel(_criterion2_replicate,
                                   [(n, r) for r in range(replicates)])
            violations = sum(v for v, _ in results)
            total = sum(t for _, t in results)
            fractions[n] = violations / total
        assert fractions[2000] <= 0.05
        assert fractions[2000] <= fractions[500]


# --- criterion 3: localization error shrinks with n and with m -------------


class TestCriterion3LocalizationTrends:
    def test_mse_decreases_in_n_and_m(self):
        replicates = 500
        mse_by_n = {}
        for n in (200, 800, 1600):
            rep = mc_localization(experiment_cfg(12), n, "mirror_dim_1",
                                  replicates=replicates, seed=1003)
            mse_by_n[n] = rep.mse
        assert mse_by_n[200] > mse_by_n[800] > mse_by_n[1600], mse_by_n

        mse_by_m = {}
        for m in (16, 40):
            rep = mc_localization(experiment_cfg(m), 800, "mirror_dim_1",
                                  replicates=replicates, seed=1013)
            mse_by_m[m] = rep.mse
        assert mse_by_m[40] < mse_by_m[16], mse_by_m


# --- criterion 4: quantitative agreement with the reported table -----------


class TestCriterion4QuantitativeTable:
    def test_iso_mirror_and_degree_baseline(self):
        replicates = 500
        cfg = experiment_cfg(16)
        iso = mc_localization(cfg, 800, "iso_mirror", replicates=replicates,
                              seed=1004, cmds_dim=1)
        assert 0.0024 / 3 <= iso.mse <= 0.0024 * 3, iso.mse
        assert iso.mse <= 0.0045  # 3x the top of the reported d=2->1 interval

        degree = mc_localization(cfg, 800, "sqrt_avg_degree",
                                 replicates=replicates, seed=1004)
        assert 0.00033 / 3 <= degree.mse <= 0.00033 * 3, degree.mse

        random_guess = 0.064
        assert iso.mse < random_guess
        assert degree.mse < random_guess


# --- criterion 5: embedding-dimension bias/variance U-shape ----------------


class TestCriterion5DimensionUShape:
    def test_mse_has_both_arms(self):
        reports = dimension_sweep(experiment_cfg(12), 1600, [1, 2, 3, 4, 5, 6],
                                  replicates=500, seed=1005)
        mses = np.array([rep.mse for rep in reports])
        best = int(np.argmin(mses)) + 1
        assert 1 < best <= 6, mses.tolist()
        assert mses[5] > mses.min(), mses.tolist()


# --- criterion 6: bootstrap detection level and power ----------------------


def _criterion6_statistic(args):
    q, master_seed, replicate = args
    cfg = WalkConfig(m=16, c=0.1, delta=0.9 / 16, p=0.4, q=q, t_star=0.5, seed=0)
    walk_seed, _ = replicate_seeds(master_seed, replicate)
    return null_pipeline_statistic(cfg, 500, walk_seed)


class TestCriterion6Detection:
    def test_level_and_power(self):
        replicates = 300
        level = 0.05
        null_cfg = WalkConfig(m=16, c=0.1, delta=0.9 / 16, p=0.4, q=0.4,
                              t_star=0.5, seed=0)
        calibration = bootstrap_detect(null_cfg, 500, observed_statistic=0.0,
                                       replicates=replicates, level=level,
                                       seed=42)
        critical = calibration.critical_value

        fresh_null = np.array(run_parallel(
            _criterion6_statistic, [(0.4, 2006, r) for r in range(replicates)]))
        rejection_rate = float(np.mean(fresh_null > critical))
        assert rejection_rate <= 0.08, rejection_rate

        alternative = np.array(run_parallel(
            _criterion6_statistic, [(0.2, 3006, r) for r in range(replicates)]))
        power = float(np.mean(alternative > critical))
        assert power >= 0.9, power


# --- criterion 7: deterministic property suite ------------------------------


class TestCriterion7PropertySuite:
    def test_localizer_invariances(self):
        rng = np.random.default_rng(7)
        ts = np.arange(1, 16) / 15
        ys = asymptotic_mirror(0.5, 0.2, 0.4, ts) + 0.02 * rng.standard_normal(15)
        base = localize(ts, ys)
        flipped = localize(ts, -ys)
        assert flipped.knot_index == base.knot_index
        np.testing.assert_allclose(flipped.per_knot_objectives,
                                   base.per_knot_objectives, atol=1e-10)
        shifted = localize(ts, ys + 0.9 - 1.4 * ts)
        assert shifted.knot_index == base.knot_index
        np.testing.assert_allclose(shifted.per_knot_objectives,
                                   base.per_knot_objectives, atol=1e-10)
        scaled = localize(ts, 4.0 * ys)
        assert scaled.knot_index == base.knot_index
        np.testing.assert_allclose(scaled.per_knot_objectives,
                                   4.0 * base.per_knot_objectives, atol=4e-10)

    def test_isomap_rigid_motion_invariance(self):
        rng = np.random.default_rng(17)
        pts = rng.standard_normal((24, 3))
        q, _ = np.linalg.qr(rng.standard_normal((3, 3)))
        a = iso_reduce(pts)
        b = iso_reduce(pts @ q + np.array([2.0, -0.5, 1.5]))
        err = min(np.abs(a.values - b.values).max(),
                  np.abs(a.values + b.values).max())
        assert err < 1e-8

    def test_cmds_homogeneity(self):
        rng = np.random.default_rng(27)
        pts = rng.standard_normal((10, 3))
        d = np.linalg.norm(pts[:, None] - pts[None, :], axis=2)
        base = cmds(d, 3)
        scaled = cmds(2.5 * d, 3)
        scale = max(1.0, np.abs(base.coords).max())
        np.testing.assert_allclose(scaled.coords, 2.5 * base.coords,
                                   atol=1e-10 * scale)

    def test_estimated_dmv_orthogonal_invariance(self):
        rng = np.random.default_rng(37)
        for d in (1, 2, 3):
            x = rng.standard_normal((100, d))
            q, _ = np.linalg.qr(rng.standard_normal((d, d)))
            assert estimated_dmv(x, x @ q) < 1e-8

    def test_density_path_length_identity(self):
        # identity holds for strongly connected graphs with diameter <= 2;
        # this seeded draw has been checked to satisfy the precondition
        rng = np.random.default_rng(0)
        a = (rng.random((30, 30)) < 0.5).astype(np.uint8)
        np.fill_diagonal(a, 0)
        s = network_summaries([a])[0]
        assert s.strongly_connected
        assert abs(s.edge_density + s.avg_path_length - 2.0) < 1e-10

    def test_control_chart_single_edge_case(self):
        g1 = np.zeros((6, 6), dtype=np.uint8)
        g2 = g1.copy()
        g2[1, 4] = g2[4, 1] = 1
        steps = [s.frobenius_step for s in network_summaries([g1, g2])]
        assert steps == [0.0, pytest.approx(np.sqrt(2), abs=1e-12)]

    def test_common_component_matches_brute_force(self):
        def und(n, edges):
            a = np.zeros((n, n), dtype=np.uint8)
            for u, v in edges:
                a[u, v] = a[v, u] = 1
            return a

        cases = [
            [und(9, [(0, 1), (1, 2), (0, 2), (3, 4), (5, 6)]),
             und(9, [(0, 1), (1, 2), (0, 2), (3, 5), (4, 6), (7, 8)])],
        ]
        for seed in (3, 6, 8, 12, 13):
            rng = np.random.default_rng(seed)
            mats = []
            for _ in range(3):
                a = (rng.random((10, 10)) < 0.22).astype(np.uint8)
                a = np.triu(a, 1)
                mats.append(a + a.T)
            cases.append(mats)
        for mats in cases:
            keep, _ = largest_common_component(mats)
            brute = brute_force_common_component(mats)
            assert len(keep) == len(brute)


# --- criterion 8: frequency break on the literal second eigenvector --------


class TestCriterion8SecondEigenvectorFrequency:
    def test_second_eigenvector_gap_ratio(self):
        # Known-red criterion: at m=200 the second eigenvector crosses zero
        # once per regime, so the per-side mean crossing gap does not exist.
        # Kept as specified; the analysis lives in the decisions ledger and
        # the substantive frequency-break check in test_mirror.py.
        p, q, t_star = 0.4, 0.1, 0.5
        cfg = model4_cfg(200, p=p, q=q, t_star=t_star)
        me = cmds(true_dmv_matrix(cfg), 2)
        second = me.coords[:, 1]
        expected = np.sqrt(q * (1 - q) / (p * (1 - p)))
        try:
            ratio = crossing_gap_ratio(second, cfg.times, t_star)
        except ValueError as exc:
            pytest.fail(f"criterion undefined on the second eigenvector: {exc}")
        assert abs(ratio - expected) <= 0.25 * expected
