import numpy as np
import pytest

from gspconsensus import filter as flt
from gspconsensus import graph as gr
from gspconsensus import simulate as sim
from gspconsensus import spectral as sp
from gspconsensus import uncertainty as unc

from conftest import random_connected_graph


def assert_average_conserved(traj):
    x0 = traj.states[0]
    drift = np.abs(traj.states.mean(axis=1) - x0.mean()).max()
    assert drift <= 1e-10 * max(1.0, np.linalg.norm(x0))


def assert_errors_consistent(traj):
    x0 = traj.states[0]
    recomputed = ((traj.states - x0.mean()) ** 2).sum(axis=1)
    np.testing.assert_allclose(traj.errors, recomputed, rtol=0, atol=1e-12)


def random_schedule(rng, g):
    kind = rng.integers(3)
    s = sp.laplacian_spectrum(g)
    if kind == 0:
        return flt.design_finite_time(sp.distinct_nonzero_eigs(s))
    if kind == 1:
        return flt.design_unknown_topology(gr.max_degree(g), int(rng.integers(1, 8)))
    gains = rng.uniform(0, 1.0 / s.eigenvalues[-1], int(rng.integers(1, 10)))
    return flt.GainSchedule(tuple(gains), len(gains))


class TestStep:
    def test_zero_gain_is_identity(self, c6):
        x = np.arange(6.0)
        np.testing.assert_array_equal(sim.step(x, 0.0, gr.laplacian(c6)), x)

    def test_k2_half_gain_averages(self, k2):
        np.testing.assert_allclose(sim.step([1.0, 0.0], 0.5, gr.laplacian(k2)), [0.5, 0.5])

    def test_consensus_is_fixed_point(self, p6):
        x = np.full(6, 3.25)
        for eps in (0.1, 1.0, 7.0):
            np.testing.assert_allclose(sim.step(x, eps, gr.laplacian(p6)), x, atol=1e-14)

    def test_dimension_mismatch(self, c6):
        with pytest.raises(ValueError):
            sim.step(np.ones(5), 0.1, gr.laplacian(c6))


class TestConsensusError:
    def test_at_consensus(self):
        x0 = np.array([1.0, 2.0, 6.0])
        assert sim.consensus_error(np.full(3, 3.0), x0) == 0.0

    def test_k2_hand_value(self):
        assert sim.consensus_error([1.0, 0.0], [1.0, 0.0]) == 0.5

    def test_matches_definition(self, rng):
        x0, x = rng.normal(size=7), rng.normal(size=7)
        assert np.isclose(sim.consensus_error(x, x0), np.linalg.norm(x - x0.mean()) ** 2)

    def test_length_mismatch(self):
        with pytest.raises(ValueError):
            sim.consensus_error([1.0], [1.0, 2.0])


class TestRunMatrix:
    def test_finite_time_c6(self, c6, rng):
        sched = flt.design_finite_time([1, 3, 4])
        for _ in range(10):
            x0 = rng.uniform(0, 1, 6)
            traj = sim.run_matrix(x0, sched, c6, 5)
            assert traj.error_at(3) <= 1e-18 * (x0 @ x0)
            assert_average_conserved(traj)
            assert_errors_consistent(traj)

    def test_all_equal_x0(self, c6):
        traj = sim.run_matrix(np.full(6, 2.0), flt.design_unknown_topology(2, 5), c6, 20)
        assert np.all(traj.errors == 0.0)

    def test_shifted_ring_period_errors_decrease(self, c6, rng):
        lt = unc.perturb(unc.UncertaintyModel.from_graph(c6, 0.5))
        sched = flt.design_estimated_periodic([0, 1, 1, 3, 3, 4])
        traj = sim.run_matrix(rng.uniform(0, 1, 6), sched, lt, 15)
        e = [traj.error_at(k) for k in (5, 10, 15)]
        assert e[0] > e[1] > e[2]
        assert_average_conserved(traj)

    def test_stride_keeps_period_ends(self, c6):
        sched = flt.design_unknown_topology(2, 5)
        traj = sim.run_matrix(np.arange(6.0), sched, c6, 23, stride=4)
        assert list(traj.steps) == [0, 4, 5, 8, 10, 12, 15, 16, 20, 23]
        full = sim.run_matrix(np.arange(6.0), sched, c6, 23)
        for k in traj.steps:
            np.testing.assert_array_equal(traj.state_at(k), full.state_at(k))
        with pytest.raises(KeyError):
            traj.state_at(6)

    def test_period_end_errors(self, c6):
        traj = sim.run_matrix(np.arange(6.0), flt.design_unknown_topology(2, 5), c6, 25)
        ends = traj.period_end_errors()
        assert [k for k, _ in ends] == [5, 10, 15, 20, 25]
        assert all(a > b for (_, a), (_, b) in zip(ends, ends[1:]))


class TestRunLocal:
    def test_update_sees_only_neighbours(self, monkeypatch, p6):
        seen = []
        original = sim.agent_update

        def spy(x_i, eps, states, weights):
            seen.append(len(states))
            return original(x_i, eps, states, weights)

        monkeypatch.setattr(sim, "agent_update", spy)
        sim.run_local(np.arange(6.0), flt.GainSchedule((0.3,), 1), p6, 1)
        assert seen == [1, 2, 2, 2, 2, 1]

    def test_star_symmetry(self):
        g = gr.star(7)
        x0 = np.zeros(7)
        x0[0] = 1.0
        traj = sim.run_local(x0, flt.design_unknown_topology(gr.max_degree(g), 4), g, 12)
        leaves = traj.states[:, 1:]
        np.testing.assert_allclose(leaves, leaves[:, :1].repeat(6, axis=1), atol=1e-15)

    def test_p6_unknown_topology_converges(self, p6, rng):
        x0 = rng.uniform(0, 1, 6)
        traj = sim.run_local(x0, flt.design_unknown_topology(2, 5), p6, 200)
        assert traj.errors[-1] <= 1e-10 * (x0 @ x0)
        assert_average_conserved(traj)

    def test_matches_matrix_on_perturbed_system(self, c6, rng):
        lt = unc.perturb(unc.UncertaintyModel.from_graph(c6, 0.5, unc.SPECTRAL_JITTER), seed=4)
        sched = flt.design_estimated_periodic([0, 1, 1, 3, 3, 4])
        x0 = rng.uniform(0, 1, 6)
        a = sim.run_matrix(x0, sched, lt, 20)
        b = sim.run_local(x0, sched, lt, 20)
        assert np.abs(a.states - b.states).max() <= 1e-12


class TestRunSpectral:
    def test_zero_horizon(self, c6):
        s = sp.laplacian_spectrum(c6)
        traj = sim.run_spectral(np.arange(6.0), flt.GainSchedule((0.1,)), s, 0)
        np.testing.assert_array_equal(traj.states, [np.arange(6.0)])

    def test_consensus_state_is_projection(self, c6, rng):
        s = sp.laplacian_spectrum(c6)
        x0 = rng.normal(size=6)
        traj = sim.run_spectral(x0, flt.design_finite_time([1, 3, 4]), s, 3)
        v1 = s.eigenvectors[:, 0]
        np.testing.assert_allclose(traj.states[3], v1 * (v1 @ x0), atol=1e-12)
        np.testing.assert_allclose(traj.states[3], np.full(6, x0.mean()), atol=1e-12)

    def test_agrees_with_matrix(self, c6, rng):
        s = sp.laplacian_spectrum(c6)
        sched = flt.design_unknown_topology(2, 5)
        x0 = rng.uniform(0, 1, 6)
        a = sim.run_matrix(x0, sched, c6, 30)
        b = sim.run_spectral(x0, sched, s, 30)
        assert np.abs(a.states - b.states).max() <= 1e-8


def test_three_way_equivalence(rng):
    for _ in range(50):
        g = random_connected_graph(rng, n_max=20)
        sched = random_schedule(rng, g)
        x0 = rng.uniform(0, 1, g.n)
        t_end = int(rng.integers(1, 30))
        m = sim.run_matrix(x0, sched, g, t_end)
        loc = sim.run_local(x0, sched, g, t_end)
        spc = sim.run_spectral(x0, sched, sp.laplacian_spectrum(g), t_end)
        assert np.abs(m.states - loc.states).max() <= 1e-12
        assert np.abs(m.states - spc.states).max() <= 1e-8
        for traj in (m, loc, spc):
            assert_average_conserved(traj)
            assert_errors_consistent(traj)


def test_finite_time_exactness_families(rng):
    graphs = [gr.cycle(8), gr.path(7), gr.complete(5)]
    graphs += [random_connected_graph(rng, n_max=12) for _ in range(20)]
    for g in graphs:
        s = sp.laplacian_spectrum(g)
        sched = flt.design_finite_time(sp.distinct_nonzero_eigs(s))
        p = len(sched.prefix)
        x0 = rng.uniform(0, 1, g.n)
        traj = sim.run_matrix(x0, sched, g, p)
        assert traj.errors[p] <= 1e-16 * (x0 @ x0)


def test_degree_bound_decay_and_monotone_periods(c6, p6, rng):
    psi = flt.psi_bound(2, 5)
    sched = flt.design_unknown_topology(2, 5)
    for g in (c6, p6):
        for _ in range(20):
            x0 = rng.normal(size=6)
            traj = sim.run_matrix(x0, sched, g, 25)
            for j in range(1, 6):
                assert traj.error_at(5 * j) <= psi ** (2 * j) * (x0 @ x0)
            ends = [traj.errors[0]] + [e for _, e in traj.period_end_errors()]
            assert all(b <= a for a, b in zip(ends, ends[1:]))


def test_sound_decay_on_shifted_ring(c6, rng):
    # per-period factor over the true nonzero spectrum, not the lam_2-only phi
    lt = unc.perturb(unc.UncertaintyModel.from_graph(c6, 0.5))
    true_eigs = sp.eig_sym(lt).eigenvalues
    sched = flt.design_estimated_periodic([0, 1, 1, 3, 3, 4])
    factor = np.max(flt.filter_response(sched, true_eigs[1:], 5) ** 2)
    for _ in range(100):
        x0 = rng.uniform(0, 1, 6)
        traj = sim.run_matrix(x0, sched, lt, 25)
        disagreement = traj.errors[0]
        for j in range(1, 6):
            assert traj.error_at(5 * j) <= factor**j * disagreement * (1 + 1e-9) + 1e-30


def test_csv_round_trip(tmp_path, c6, rng):
    traj = sim.run_matrix(rng.normal(size=6), flt.design_unknown_topology(2, 5), c6, 12)
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    sim.write_trajectory_csv(traj, p1)
    back = sim.read_trajectory_csv(p1)
    np.testing.assert_array_equal(back.states, traj.states)
    np.testing.assert_array_equal(back.errors, traj.errors)
    sim.write_trajectory_csv(back, p2)
    assert p1.read_bytes() == p2.read_bytes()
    assert p1.read_text().splitlines()[0] == "k,x_0,x_1,x_2,x_3,x_4,x_5,e"
