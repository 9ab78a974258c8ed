import numpy as np
import pytest

from helpers import brute_force_common_component
from netmirror import (
    WalkConfig,
    dimension_sweep,
    largest_common_component,
    mc_localization,
    network_summaries,
)


def undirected(n, edges):
    a = np.zeros((n, n), dtype=np.uint8)
    for u, v in edges:
        a[u, v] = a[v, u] = 1
    return a


def small_cfg(**kw):
    base = dict(m=8, c=0.1, delta=0.8 / 8, p=0.5, q=0.3, t_star=0.5, seed=0)
    base.update(kw)
    return WalkConfig(**base)


class TestMcLocalization:
    def test_degenerate_null_collapses_to_first_knot(self):
        # c=0, p=q=0: graphs are empty, the mirror is identically zero, every
        # knot ties, and the localizer returns t_2 deterministically.
        cfg = WalkConfig(m=8, c=0.0, delta=1 / 8, p=0.0, q=0.0, t_star=0.5, seed=0)
        rep = mc_localization(cfg, 20, "mirror_dim_1", replicates=2, seed=5)
        t2 = 2 / 8
        assert rep.mse == (t2 - 0.5) ** 2
        assert rep.std == 0.0
        assert rep.tie_fraction == 1.0

    def test_ci_formula_reproducible_from_stored_errors(self):
        rep = mc_localization(small_cfg(), 40, "edge_density", replicates=6, seed=1)
        sq = rep.squared_errors
        assert rep.mse == np.mean(sq)
        assert rep.std == np.std(sq, ddof=1)
        half = 1.96 * rep.std / np.sqrt(len(sq))
        assert rep.ci_low == rep.mse - half
        assert rep.ci_high == rep.mse + half
        assert rep.ci_low <= rep.mse <= rep.ci_high

    def test_deterministic_across_job_counts(self):
        a = mc_localization(small_cfg(), 40, "sqrt_avg_degree", replicates=6,
                            seed=2, n_jobs=1)
        b = mc_localization(small_cfg(), 40, "sqrt_avg_degree", replicates=6,
                            seed=2, n_jobs=2)
        assert np.array_equal(a.squared_errors, b.squared_errors)
        assert a.config_digest == b.config_digest

    def test_pipeline_validation(self):
        with pytest.raises(ValueError, match="unknown pipeline"):
            mc_localization(small_cfg(), 30, "psychic", replicates=2, seed=0)
        with pytest.raises(NotImplementedError):
            mc_localization(small_cfg(), 30, "leiden_modularity", replicates=2, seed=0)
        with pytest.raises(ValueError, match="replicates"):
            mc_localization(small_cfg(), 30, "edge_density", replicates=1, seed=0)

    def test_null_ties_are_rare_at_scale(self):
        cfg = small_cfg(m=12, c=0.1, delta=0.8 / 12, p=0.4, q=0.4)
        rep = mc_localization(cfg, 800, "mirror_dim_1", replicates=40, seed=3)
        assert rep.tie_fraction < 0.01


class TestDimensionSweep:
    def test_matches_separate_mc_runs(self):
        cfg = small_cfg()
        sweep = dimension_sweep(cfg, 40, [1, 2], replicates=4, seed=7)
        for rep in sweep:
            single = mc_localization(cfg, 40, "iso_mirror", replicates=4, seed=7,
                                     cmds_dim=rep.cmds_dim)
            assert np.array_equal(rep.squared_errors, single.squared_errors)

    def test_one_report_per_dimension(self):
        sweep = dimension_sweep(small_cfg(), 30, [1, 2, 3], replicates=2, seed=8)
        assert [rep.cmds_dim for rep in sweep] == [1, 2, 3]


class TestNetworkSummaries:
    def test_complete_directed_graph(self):
        n = 6
        a = np.ones((n, n), dtype=np.uint8) - np.eye(n, dtype=np.uint8)
        s = network_summaries([a])[0]
        assert s.edge_density == 1.0
        assert s.avg_path_length == 1.0
        assert s.reciprocity == 1.0
        assert s.strongly_connected

    def test_density_plus_path_length_identity(self):
        # strongly connected with diameter <= 2: rho + L = 2 exactly
        rng = np.random.default_rng(0)
        a = (rng.random((30, 30)) < 0.5).astype(np.uint8)
        np.fill_diagonal(a, 0)
        s = network_summaries([a])[0]
        assert s.strongly_connected
        assert s.edge_density + s.avg_path_length == pytest.approx(2.0, abs=1e-10)

    def test_control_chart_single_edge_flip(self):
        g1 = undirected(5, [(0, 1), (2, 3)])
        g2 = undirected(5, [(0, 1), (2, 3), (1, 4)])
        steps = [s.frobenius_step for s in network_summaries([g1, g2])]
        assert steps[0] == 0.0
        assert steps[1] == pytest.approx(np.sqrt(2), abs=1e-12)

    def test_disconnected_and_empty_flags(self):
        empty = np.zeros((4, 4), dtype=np.uint8)
        s = network_summaries([empty])[0]
        assert s.avg_path_length is None
        assert s.reciprocity is None
        assert not s.strongly_connected

    def test_symmetric_graph_reciprocity_is_one(self):
        g = undirected(6, [(0, 1), (1, 2), (3, 4)])
        assert network_summaries([g])[0].reciprocity == 1.0

    def test_rejects_nonzero_diagonal(self):
        bad = np.eye(4, dtype=np.uint8)
        with pytest.raises(ValueError, match="diagonal"):
            network_summaries([bad])


class TestLargestCommonComponent:
    def test_all_complete(self):
        n = 7
        a = np.ones((n, n), dtype=np.uint8) - np.eye(n, dtype=np.uint8)
        keep, restricted = largest_common_component([a, a.copy()])
        assert list(keep) == list(range(n))
        assert restricted[0].shape == (n, n)

    def test_one_empty_network_gives_empty_set(self):
        g = undirected(5, [(0, 1), (1, 2)])
        keep, restricted = largest_common_component([g, np.zeros((5, 5), np.uint8)])
        assert len(keep) == 0
        assert restricted[0].shape == (0, 0)

    def test_shared_triangle(self):
        g1 = undirected(9, [(0, 1), (1, 2), (0, 2), (3, 4), (5, 6)])
        g2 = undirected(9, [(0, 1), (1, 2), (0, 2), (3, 5), (4, 6), (7, 8)])
        keep, _ = largest_common_component([g1, g2])
        assert list(keep) == [0, 1, 2]

    def test_directed_needs_strong_connectivity(self):
        d1 = np.zeros((5, 5), np.uint8)
        d2 = np.zeros((5, 5), np.uint8)
        for u, v in [(0, 1), (1, 2), (2, 0), (3, 4)]:
            d1[u, v] = 1
        for u, v in [(0, 1), (1, 2), (2, 0), (4, 3)]:
            d2[u, v] = 1
        keep, _ = largest_common_component([d1, d2])
        assert list(keep) == [0, 1, 2]

    @pytest.mark.parametrize("seed", range(12))
    def test_matches_brute_force_on_random_inputs(self, seed):
        rng = np.random.default_rng(seed)
        mats = []
        for _ in range(3):
            a = (rng.random((10, 10)) < 0.22).astype(np.uint8)
            a = np.triu(a, 1)
            mats.append(a + a.T)
        keep, _ = largest_common_component(mats)
        brute = brute_force_common_component(mats)
        assert len(keep) == len(brute)
        if len(keep):
            sub_ok = all(
                len(brute_force_common_component([m[np.ix_(keep, keep)]])) == len(keep)
                for m in mats
            )
            assert sub_ok
