"""Monte Carlo samplers, exit batches, occupation histograms and Hunt/Poisson post-processing"""

import numpy as np
import pytest

from src.catalog.processes import make_named, make_stable
from src.errors import ContractError, SingularEvaluationError, UnsupportedSpecError
from src.experiments.green import TOTAL_ALLOWANCE
from src.mc import (
    AnnulusPartition,
    BallTarget,
    FullComplement,
    HalfSpaceCap,
    IncrementSampler,
    PathConfig,
    PathSimulator,
    Shell,
    Tail,
    estimate_hitting_before_exit,
    exit_tail_reference,
    exit_time_reference,
    relative_volume,
    stable_subordinator,
    tempered_subordinator,
)
from src.mc.samplers import uniform_directions
from src.potential.green_function import hunt_green, poisson_kernel


@pytest.fixture(scope='module')
def cauchy_exit_distribution():
    """Occupation, exits and Poisson kernel of B_1 from the origin for the Cauchy process"""
    spec = make_stable(1.0, 3)
    cfg = PathConfig.from_config(seed=11, n_replicas=2000, dt=1e-3, block_size=200)
    histogram, batch = PathSimulator(spec, cfg).occupation(1.0, np.zeros(3), with_exits=True)
    return spec, histogram, batch, poisson_kernel(spec, 1.0, np.zeros(3), histogram)


class TestPathConfig:
    def test_defaults_follow_testing_environment(self):
        cfg = PathConfig.from_config()
        assert cfg.n_replicas == 2000 and cfg.block_size == 512

    def test_none_overrides_are_ignored(self):
        assert PathConfig.from_config(dt=None, seed=3).dt == pytest.approx(1e-3)

    @pytest.mark.parametrize("changes", [{'dt': 0.0}, {'eps': -1.0}, {'n_replicas': 0}, {'seed': -1},
                                         {'seed': 2 ** 64}, {'workers': 0}])
    def test_validation(self, changes):
        with pytest.raises(ContractError):
            PathConfig(**changes)

    def test_cutoff(self):
        assert PathConfig().cutoff(0.5) == pytest.approx(0.005)
        assert PathConfig().cutoff(10.0) == pytest.approx(0.01)
        assert PathConfig(eps=0.2).cutoff(0.5) == pytest.approx(0.2)

    def test_with_and_dict(self):
        cfg = PathConfig(seed=5).with_(workers=2)
        assert cfg.to_dict()['workers'] == 2 and cfg.seed == 5


class TestRegions:
    def test_cap_and_complement(self):
        points = np.array([[1.5, 0.0, 0.0], [-1.5, 0.0, 0.0], [0.5, 0.0, 0.0]])
        cap = HalfSpaceCap(1.0)
        assert cap.name == 'cap+0'
        assert cap.contains(points).tolist() == [True, False, False]
        assert FullComplement(1.0).contains(points).tolist() == [True, True, False]

    def test_sphere_point_counts_as_outside(self):
        point = np.array([[1.0 - 1e-14, 0.0, 0.0]])
        assert FullComplement(1.0).contains(point)[0]

    def test_shells_and_tail(self):
        points = np.array([[1.5, 0, 0], [2.5, 0, 0], [9.0, 0, 0]], dtype=float)
        assert Shell(1.0, 1).contains(points).tolist() == [True, False, False]
        assert Shell(1.0, 2).name == 'shell2'
        assert Tail(4.0).contains(points).tolist() == [False, False, True]
        with pytest.raises(ContractError):
            Shell(1.0, 0)

    def test_ball_target(self):
        target = BallTarget(center=np.array([0.1, 0.0, 0.0]), radius=0.05)
        assert target.inside(0.2) and not target.inside(0.1)
        assert target.contains(np.array([[0.12, 0.0, 0.0], [0.3, 0.0, 0.0]])).tolist() == [True, False]
        assert target.d == 3


class TestAnnulusPartition:
    def test_default_side_in_three_dimensions(self):
        partition = AnnulusPartition(3, 1.0)
        assert partition.side == pytest.approx(0.5)
        norms = np.linalg.norm(partition.centers, axis=1)
        assert np.all((norms > 1.0) & (norms <= 4.0))

    def test_assign(self):
        partition = AnnulusPartition(3, 1.0)
        labels = partition.assign(np.vstack([partition.centers[:3], [[5.0, 0.0, 0.0]]]))
        assert labels.tolist() == [0, 1, 2, partition.tail_label]

    def test_mirror_is_an_involution(self):
        partition = AnnulusPartition(3, 1.0)
        mirror = partition.mirror()
        assert np.all(mirror >= 0)
        np.testing.assert_array_equal(mirror[mirror], np.arange(partition.n_cells))


class TestSamplers:
    @pytest.mark.parametrize("lam", [0.5, 4.0, 50.0])
    def test_stable_subordinator_laplace_transform(self, lam):
        rng = np.random.default_rng(1)
        draws = stable_subordinator(rng, 0.5, 0.1, 40_000)
        assert np.exp(-lam * draws).mean() == pytest.approx(np.exp(-0.1 * lam ** 0.5), abs=0.01)

    def test_tempered_subordinator_laplace_transform(self):
        rng = np.random.default_rng(2)
        draws = tempered_subordinator(rng, 0.5, 1.0, 0.1, 40_000)
        expected = np.exp(-0.1 * ((3.0 + 1.0) ** 0.5 - 1.0))
        assert np.exp(-3.0 * draws).mean() == pytest.approx(expected, abs=0.01)

    def test_directions_are_unit_vectors(self):
        directions = uniform_directions(np.random.default_rng(3), 100, 4)
        np.testing.assert_allclose(np.linalg.norm(directions, axis=1), 1.0)

    def test_modes(self, brownian, cauchy, relativistic):
        assert IncrementSampler(brownian, 1e-3, 0.01).mode == 'brownian'
        assert IncrementSampler(cauchy, 1e-3, 0.01).mode == 'stable'
        assert IncrementSampler(relativistic, 1e-3, 0.01).mode == 'tempered'

    def test_compound_poisson_for_unimodal(self):
        sampler = IncrementSampler(make_named('tempered', {'alpha': 1.0}, 3), 1e-3, 0.01)
        assert sampler.mode == 'compound-poisson'
        assert sampler.table.rate > 0.0 and sampler.bridge_variance > 0.0
        radii = sampler.table.sample(np.random.default_rng(4).random(1000))
        assert np.all(radii >= 0.01 * (1.0 - 1e-9))

    def test_brownian_step_variance(self, brownian):
        increment = IncrementSampler(brownian, 1e-3, 0.01).sample(np.random.default_rng(5), 20_000)
        assert increment.total.var(axis=0) == pytest.approx(np.full(3, 2e-3), rel=0.05)
        assert not increment.jumped.any()

    def test_stable_increments_are_self_similar(self):
        """X_dt has the law of dt^(1 / alpha) X_1"""
        spec = make_stable(1.5, 3)
        small = IncrementSampler(spec, 1e-3, 0.01).sample(np.random.default_rng(6), 40_000).total
        unit = IncrementSampler(spec, 1.0, 0.01).sample(np.random.default_rng(7), 40_000).total
        scaled = np.minimum(np.linalg.norm(small, axis=1) / 1e-3 ** (1.0 / 1.5), 1.0)
        reference = np.minimum(np.linalg.norm(unit, axis=1), 1.0)
        stderr = np.sqrt(scaled.var(ddof=1) / scaled.size + reference.var(ddof=1) / reference.size)
        assert abs(scaled.mean() - reference.mean()) <= 3.0 * stderr

    def test_bad_step(self, cauchy):
        with pytest.raises(ContractError):
            IncrementSampler(cauchy, 0.0, 0.01)


class TestExitSimulation:
    def test_brownian_mean_exit_time(self, brownian, small_run):
        batch = PathSimulator(brownian, small_run).simulate_exit(np.zeros(3), 1.0)
        assert exit_time_reference(2.0, 3, 1.0) == pytest.approx(1.0 / 6.0)
        assert batch.n_censored == 0
        assert batch.mean_tau == pytest.approx(1.0 / 6.0, abs=0.02)
        np.testing.assert_allclose(np.linalg.norm(batch.exit_positions, axis=1), 1.0)
        assert batch.jump_fraction == 0.0

    def test_cauchy_exit_overshoot(self, cauchy, small_run):
        batch = PathSimulator(cauchy, small_run).simulate_exit(np.zeros(3), 1.0)
        estimate, stderr = batch.proportion(Tail(2.0).contains(batch.exit_positions))
        assert estimate == pytest.approx(exit_tail_reference(1.0, 1.0, 2.0), abs=max(0.05, 4 * stderr))
        assert batch.jump_fraction == 1.0

    def test_same_output_for_any_worker_count(self, cauchy, small_run):
        single = PathSimulator(cauchy, small_run).simulate_exit(np.zeros(3), 1.0)
        threaded = PathSimulator(cauchy, small_run.with_(workers=2)).simulate_exit(np.zeros(3), 1.0)
        np.testing.assert_array_equal(single.taus, threaded.taus)
        np.testing.assert_array_equal(single.exit_positions, threaded.exit_positions)

    def test_streams_differ(self, cauchy, small_run):
        simulator = PathSimulator(cauchy, small_run)
        first = simulator.simulate_exit(np.zeros(3), 1.0, stream=0)
        second = simulator.simulate_exit(np.zeros(3), 1.0, stream=1)
        assert not np.array_equal(first.taus, second.taus)

    def test_mean_exit_time_decreases_toward_the_sphere(self, cauchy, small_run):
        simulator = PathSimulator(cauchy, small_run)
        batches = [simulator.simulate_exit(np.array([t, 0.0, 0.0]), 1.0, stream=k)
                   for k, t in enumerate([0.0, 0.5, 0.9, 0.99])]
        for inner, outer in zip(batches, batches[1:]):
            band = 3.0 * np.hypot(inner.tau_stderr, outer.tau_stderr)
            assert inner.mean_tau >= outer.mean_tau - band
        assert batches[-1].mean_tau < 0.25 * batches[0].mean_tau

    @pytest.mark.parametrize("dt", [1e-3, 5e-4])
    def test_cauchy_leaves_by_a_jump(self, cauchy, small_run, dt):
        batch = PathSimulator(cauchy, small_run.with_(n_replicas=1000, dt=dt)).simulate_exit(np.zeros(3), 1.0)
        assert batch.jump_fraction > 0.9
        overshoot = np.linalg.norm(batch.exit_positions[batch.completed], axis=1) > 1.0 + 1e-9
        assert overshoot.mean() > 0.9

    def test_censoring(self, brownian, small_run):
        simulator = PathSimulator(brownian, small_run.with_(max_steps=5))
        batch = simulator.simulate_exit(np.zeros(3), 1.0)
        assert batch.censoring_rate > 0.9
        assert simulator.stats['censored'] == batch.n_censored
        assert batch.to_frame()['censored'].sum() == batch.n_censored

    def test_frame_schema(self, cauchy, small_run):
        frame = PathSimulator(cauchy, small_run.with_(n_replicas=10)).simulate_exit(0.0, 1.0).to_frame()
        assert list(frame.columns) == ['replica', 'tau', 'exit_x', 'exit_y', 'exit_z', 'jumped', 'steps',
                                       'censored']
        assert len(frame) == 10

    def test_start_must_be_inside(self, cauchy, small_run):
        with pytest.raises(ContractError):
            PathSimulator(cauchy, small_run).simulate_exit(np.array([2.0, 0.0, 0.0]), 1.0)

    def test_records(self, cauchy, small_run):
        batch = PathSimulator(cauchy, small_run.with_(n_replicas=3)).simulate_exit(np.zeros(3), 1.0)
        records = list(batch.records())
        assert len(records) == 3
        assert records[0].tau == pytest.approx(batch.taus[0])


class TestHarmonicAndHitting:
    def test_harmonic_frame(self, cauchy, small_run):
        simulator = PathSimulator(cauchy, small_run.with_(n_replicas=500))
        frame = simulator.estimate_harmonic(1.0, [HalfSpaceCap(1.0), FullComplement(1.0)], [0.0, 0.5])
        assert list(frame['region']) == ['cap+0', 'complement', 'cap+0', 'complement']
        assert np.all(frame.loc[frame['region'] == 'complement', 'estimate'] == 1.0)
        assert frame.loc[1, 'x0'] == 0.0 and frame.loc[2, 'x0'] == 0.5

    def test_cap_symmetry_from_origin(self, cauchy, small_run):
        frame = PathSimulator(cauchy, small_run).estimate_harmonic(1.0, HalfSpaceCap(1.0), [np.zeros(3)])
        row = frame.iloc[0]
        assert row['estimate'] == pytest.approx(0.5, abs=4 * row['stderr'] + 1e-3)

    def test_start_in_target(self, brownian, small_run):
        target = BallTarget(center=np.zeros(3), radius=0.1)
        estimate = estimate_hitting_before_exit(brownian, target, 1.0, np.zeros(3), small_run)
        assert estimate.probability == 1.0
        assert estimate.to_dict()['replicas'] == small_run.n_replicas

    def test_concentric_hitting(self, brownian, small_run):
        """1/|x| is harmonic: P = (1/0.15 - 1) / (1/0.05 - 1) ~ 0.30, discrete monitoring biases it low"""
        target = BallTarget(center=np.zeros(3), radius=0.05)
        estimate = PathSimulator(brownian, small_run.with_(dt=1e-4)).estimate_hitting_before_exit(
            target, 1.0, np.array([0.15, 0.0, 0.0]))
        assert 0.15 < estimate.probability < 0.35

    def test_inner_radius_uses_configured_factor(self, cauchy, small_run):
        factor = PathSimulator(cauchy, small_run).green_lower_factor()
        assert factor.source == 'config' and factor.proven > 8.0
        assert factor.inner_radius(1.0) == pytest.approx(0.2)

    def test_target_outside_inner_ball(self, brownian, small_run):
        target = BallTarget(center=np.array([0.5, 0.0, 0.0]), radius=0.1)
        with pytest.raises(ContractError):
            estimate_hitting_before_exit(brownian, target, 1.0, np.zeros(3), small_run)

    def test_start_outside_inner_ball(self, brownian, small_run):
        target = BallTarget(center=np.zeros(3), radius=0.05)
        with pytest.raises(ContractError):
            estimate_hitting_before_exit(brownian, target, 1.0, np.array([0.5, 0.0, 0.0]), small_run)


class TestOccupation:
    def test_total_mass_is_mean_exit_time(self, cauchy, small_run):
        histogram, batch = PathSimulator(cauchy, small_run).occupation(1.0, np.zeros(3), with_exits=True)
        assert histogram.total_mass == pytest.approx(batch.taus.mean(), rel=1e-9)
        assert histogram.n == small_run.n_replicas
        assert histogram.side == pytest.approx(1.0 / 16.0)

    def test_frame_and_cells(self, brownian, small_run):
        histogram = PathSimulator(brownian, small_run.with_(n_replicas=500)).occupation(1.0, np.zeros(3))
        frame = histogram.to_frame()
        assert list(frame.columns) == ['cell_index', 'cx', 'cy', 'cz', 'mass', 'stderr']
        assert histogram.cell_of(np.zeros(3)) is not None
        assert np.all(np.linalg.norm(histogram.centers, axis=1) < 1.0 + histogram.side)
        assert histogram.block_weights.sum() == pytest.approx(1.0)


class TestReferences:
    def test_cauchy_exit_time(self):
        assert exit_time_reference(1.0, 3, 1.0) == pytest.approx(0.5)
        assert exit_time_reference(1.0, 3, 2.0) == pytest.approx(1.0)

    def test_cauchy_exit_tail(self):
        assert exit_tail_reference(1.0, 1.0, 2.0) == pytest.approx(1.0 / 3.0)
        assert exit_tail_reference(1.0, 1.0, 0.5) == 1.0
        with pytest.raises(ContractError):
            exit_tail_reference(2.0, 1.0, 2.0)

    def test_relative_volume(self):
        assert relative_volume(3, 1.0, 2.0) == pytest.approx(1.0 / 8.0)


class TestGreenAndPoisson:
    def test_hunt_formula_for_cauchy_ball(self, cauchy, small_run):
        """G_B1(0, y) = sqrt(3) / pi^2 at |y| = 1/2 for the Cauchy process in d = 3"""
        batch = PathSimulator(cauchy, small_run).simulate_exit(np.zeros(3), 1.0)
        estimate = hunt_green(cauchy, 1.0, np.zeros(3), 0.5, batch)
        assert estimate.free_kernel == pytest.approx(2.0 / np.pi ** 2, rel=1e-3)
        assert estimate.value == pytest.approx(np.sqrt(3.0) / np.pi ** 2, abs=max(0.01, 4 * estimate.stderr))
        assert estimate.samples == small_run.n_replicas

    def test_hunt_singular_diagonal(self, cauchy):
        exits = np.array([[1.5, 0.0, 0.0], [0.0, 2.0, 0.0]])
        with pytest.raises(SingularEvaluationError):
            hunt_green(cauchy, 1.0, 0.2, 0.2, exits)

    def test_hunt_needs_interior_points(self, cauchy):
        exits = np.array([[1.5, 0.0, 0.0], [0.0, 2.0, 0.0]])
        with pytest.raises(ContractError):
            hunt_green(cauchy, 1.0, 0.0, 1.5, exits)

    def test_poisson_kernel_tail(self, cauchy, small_run):
        histogram = PathSimulator(cauchy, small_run).occupation(1.0, np.zeros(3))
        frame = poisson_kernel(cauchy, 1.0, np.zeros(3), histogram)
        tail = frame[frame['cell'] == 'tail'].iloc[0]
        assert tail['mass'] == pytest.approx(exit_tail_reference(1.0, 1.0, 4.0), abs=0.03)
        assert np.all(frame['mass'] >= 0.0)
        assert list(frame.columns) == ['cell', 'c0', 'c1', 'c2', 'volume', 'mass', 'stderr']

    def test_poisson_kernel_needs_jumps(self, brownian, small_run):
        histogram = PathSimulator(brownian, small_run.with_(n_replicas=100)).occupation(1.0, np.zeros(3))
        with pytest.raises(UnsupportedSpecError):
            poisson_kernel(brownian, 1.0, np.zeros(3), histogram)

    def test_hunt_drops_censored_exits(self, cauchy):
        cfg = PathConfig.from_config(seed=11, n_replicas=400, dt=1e-3, block_size=200, max_steps=20)
        x = np.array([0.9, 0.0, 0.0])
        batch = PathSimulator(cauchy, cfg).simulate_exit(x, 1.0)
        assert 2 <= batch.n_censored < batch.n - 2
        estimate = hunt_green(cauchy, 1.0, x, 0.5, batch)
        assert np.isfinite(estimate.value) and np.isfinite(estimate.stderr)
        assert estimate.censored == batch.n_censored
        assert estimate.samples == batch.n - batch.n_censored
        completed = hunt_green(cauchy, 1.0, x, 0.5, batch.exit_positions[batch.completed])
        assert estimate.value == pytest.approx(completed.value)

    @pytest.mark.slow
    def test_poisson_kernel_is_a_subprobability(self, cauchy_exit_distribution):
        frame = cauchy_exit_distribution[3]
        assert frame['mass'].sum() <= 1.0 + 3.0 * frame['stderr'].sum() + TOTAL_ALLOWANCE

    @pytest.mark.slow
    def test_poisson_kernel_mirror_cells(self, cauchy_exit_distribution):
        frame = cauchy_exit_distribution[3]
        masses, errors = frame['mass'].to_numpy()[:-1], frame['stderr'].to_numpy()[:-1]
        image = AnnulusPartition(3, 1.0).mirror()
        agree = np.abs(masses - masses[image]) <= 3.0 * np.hypot(errors, errors[image])
        assert agree.mean() >= 0.9

    @pytest.mark.slow
    def test_poisson_mass_beyond_twice_the_radius(self, cauchy_exit_distribution):
        _, _, batch, frame = cauchy_exit_distribution
        cells, tail = frame.iloc[:-1], frame.iloc[-1]
        far = np.linalg.norm(cells[['c0', 'c1', 'c2']].to_numpy(), axis=1) >= 2.0
        mass = cells.loc[far, 'mass'].sum() + tail['mass']
        stderr = cells.loc[far, 'stderr'].sum() + tail['stderr']
        direct, direct_se = batch.proportion(Tail(2.0).contains(batch.exit_positions))
        assert direct == pytest.approx(exit_tail_reference(1.0, 1.0, 2.0), abs=4 * direct_se)
        assert abs(mass - direct) <= 3.0 * np.hypot(stderr, direct_se) + 0.03

    @pytest.mark.slow
    def test_occupation_density_matches_hunt_green(self, cauchy_exit_distribution):
        """Occupation time per unit volume on the shell 0.45 <= |y| <= 0.55 against the Hunt formula"""
        spec, histogram, batch, _ = cauchy_exit_distribution
        norms = np.linalg.norm(histogram.centers, axis=1)
        shell = (norms >= 0.45) & (norms <= 0.55)
        density = histogram.mass[shell].sum() / (shell.sum() * histogram.cell_volume)
        stderr = histogram.stderr[shell].sum() / (shell.sum() * histogram.cell_volume)
        hunt = np.mean([hunt_green(spec, 1.0, np.zeros(3), center, batch).value
                        for center in histogram.centers[shell]])
        assert density == pytest.approx(hunt, rel=0.1, abs=3.0 * stderr)
