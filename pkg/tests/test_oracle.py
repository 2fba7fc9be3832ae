import numpy as np
import pytest

from app.core.exceptions import InvalidArgumentError, OracleConvergenceError
from app.schemas.geometry import BoundaryCondition, GroupShape1D, GroupShape2D, GroupWeights
from app.schemas.prox import MmConfig, ProxProblem, Regime
from app.services.oracle import (
    BRUTE_FORCE_MAX_ENTRIES,
    MONOTONE_SLACK,
    brute_force_prox,
    compare,
    mm_prox,
    smoothing_schedule,
    table_matrix,
)
from app.services.ogs_prox import evaluate_objective, ogs_shrink, regime_bounds, soft_threshold


def _assert_non_increasing(trajectory):
    for before, after in zip(trajectory, trajectory[1:]):
        assert after <= before + MONOTONE_SLACK * max(abs(before), 1.0)


class TestMmProx:
    def test_zero_input_stays_zero(self, unit3x3):
        problem = ProxProblem(data=np.zeros((5, 5)), beta=2.0, weights=unit3x3)
        z, trajectory = mm_prox(problem)
        np.testing.assert_array_equal(z, np.zeros((5, 5)))
        assert trajectory == [0.0] * 21

    def test_singleton_groups_converge_to_soft_threshold(self, rng):
        x = rng.uniform(0.25, 1.0, size=12) * rng.choice([-1.0, 1.0], size=12)
        problem = ProxProblem(data=x, beta=10.0, weights=GroupWeights.ones(GroupShape1D(s=1)))
        z, _ = mm_prox(problem, MmConfig(max_iters=60))
        np.testing.assert_allclose(z, soft_threshold(x, 10.0), atol=1e-10)

    def test_symmetric_constant_signal(self):
        problem = ProxProblem(
            data=np.ones(4),
            beta=100.0,
            weights=GroupWeights.ones(GroupShape1D(s=2)),
            bc=BoundaryCondition.PERIODIC,
        )
        z, _ = mm_prox(problem)
        np.testing.assert_allclose(z, 1.0 - np.sqrt(2.0) / 100.0, atol=1e-7)

    @pytest.mark.parametrize("bc", list(BoundaryCondition))
    @pytest.mark.parametrize("beta", [0.5, 3.0, 40.0])
    def test_objective_never_increases(self, rng, unit3x3, bc, beta):
        problem = ProxProblem(data=rng.random((15, 12)), beta=beta, weights=unit3x3, bc=bc)
        _, trajectory = mm_prox(problem)
        assert len(trajectory) == 21
        _assert_non_increasing(trajectory)

    def test_trajectory_can_be_skipped(self, rng, unit3):
        problem = ProxProblem(data=rng.random(10), beta=2.0, weights=unit3)
        _, trajectory = mm_prox(problem, MmConfig(record_trajectory=False))
        assert trajectory == []


class TestBruteForce:
    def test_singleton_groups(self):
        problem = ProxProblem(
            data=np.array([2.0, -3.0, 1.5]),
            beta=1.0,
            weights=GroupWeights.ones(GroupShape1D(s=1)),
        )
        np.testing.assert_allclose(brute_force_prox(problem), [1.0, -2.0, 0.5], atol=1e-8)

    def test_symmetric_constant_signal(self):
        problem = ProxProblem(
            data=np.ones(4),
            beta=100.0,
            weights=GroupWeights.ones(GroupShape1D(s=2)),
            bc=BoundaryCondition.PERIODIC,
        )
        np.testing.assert_allclose(
            brute_force_prox(problem), 1.0 - np.sqrt(2.0) / 100.0, atol=1e-8
        )

    def test_rejects_large_problems(self, unit3):
        problem = ProxProblem(data=np.ones(BRUTE_FORCE_MAX_ENTRIES + 1), beta=1.0, weights=unit3)
        with pytest.raises(InvalidArgumentError):
            brute_force_prox(problem)

    def test_rejects_non_positive_smoothing(self, unit3):
        problem = ProxProblem(data=np.ones(6), beta=1.0, weights=unit3)
        with pytest.raises(InvalidArgumentError):
            brute_force_prox(problem, epsilon=0.0)

    def test_smoothing_schedule(self):
        assert smoothing_schedule(1e-9) == pytest.approx([1e-3, 1e-5, 1e-7, 1e-9])
        assert smoothing_schedule(1e-2) == [1e-2]

    @pytest.mark.parametrize(
        "bc, weights",
        [
            (BoundaryCondition.REFLECTIVE, np.array([0.7, 1.3, 0.9])),
            (BoundaryCondition.PERIODIC, np.array([[1.2, 0.6], [0.8, 1.4]])),
            (BoundaryCondition.ZERO, np.array([1.0, 0.5])),
        ],
    )
    @pytest.mark.parametrize("fraction", [0.3, 0.6, 0.9])
    def test_zero_minimizer_at_small_beta(self, rng, bc, weights, fraction):
        group = GroupWeights(values=weights)
        shape = (7,) if weights.ndim == 1 else (2, 4)
        lower, _ = regime_bounds(group)
        problem = ProxProblem(
            data=rng.uniform(-1.0, 1.0, size=shape), beta=fraction * lower, weights=group, bc=bc
        )
        z = brute_force_prox(problem)
        assert np.max(np.abs(z)) <= 1e-6
        assert evaluate_objective(z, problem) == pytest.approx(
            evaluate_objective(np.zeros(shape), problem), abs=1e-6
        )

    def test_iteration_cap_still_raises(self, rng, unit3):
        problem = ProxProblem(data=rng.random(8), beta=5.0, weights=unit3)
        with pytest.raises(OracleConvergenceError):
            brute_force_prox(problem, max_iters=1)


def _random_small_problem(rng, regime: Regime) -> ProxProblem:
    if rng.random() < 0.5:
        n, s = int(rng.integers(6, 9)), int(rng.integers(2, 4))
        data_shape, weights = (n,), GroupWeights(values=rng.uniform(0.5, 1.5, size=s))
    else:
        data_shape, weights = (2, 4), GroupWeights(values=rng.uniform(0.5, 1.5, size=(2, 2)))
    bc = list(BoundaryCondition)[int(rng.integers(3))]
    lower, upper = regime_bounds(weights)

    if regime is Regime.EXACT_SMALL_BETA:
        data = rng.uniform(-1.0, 1.0, size=data_shape)
        beta = lower * rng.uniform(0.2, 1.0)
    elif regime is Regime.EXACT_LARGE_BETA:
        data = rng.uniform(0.25, 1.0, size=data_shape) * rng.choice([-1.0, 1.0], size=data_shape)
        beta = lower * rng.uniform(300.0, 1000.0)
    else:
        data = rng.uniform(-1.0, 1.0, size=data_shape)
        beta = lower * rng.uniform(2.0, 20.0)
    return ProxProblem(data=data, beta=beta, weights=weights, bc=bc)


def test_explicit_and_mm_are_sandwiched_by_brute_force(rng):
    regimes = [Regime.EXACT_SMALL_BETA, Regime.EXACT_LARGE_BETA, Regime.APPROXIMATE]
    for idx in range(100):
        regime = regimes[idx % 3]
        problem = _random_small_problem(rng, regime)

        f_brute = evaluate_objective(brute_force_prox(problem), problem)
        explicit = ogs_shrink(problem)
        z_mm, trajectory = mm_prox(problem)

        assert explicit.regime is regime
        assert explicit.objective >= f_brute - 1e-6
        assert evaluate_objective(z_mm, problem) >= f_brute - 1e-6
        _assert_non_increasing(trajectory)
        if regime is Regime.APPROXIMATE:
            assert explicit.objective - f_brute <= 0.05 * f_brute
        else:
            assert explicit.objective - f_brute <= 1e-6


def test_large_beta_minimizer_error_decays_quadratically(rng):
    near, far = [], []
    for idx in range(100):
        if idx % 2:
            weights = GroupWeights.ones(GroupShape2D(k1=3, k2=3))
            data = rng.random((int(rng.integers(10, 17)), int(rng.integers(10, 17))))
        else:
            weights = GroupWeights.ones(GroupShape1D(s=9))
            data = rng.random(int(rng.integers(30, 61)))
        lower, upper = regime_bounds(weights)
        beta = rng.uniform(upper, 100.0 * lower)
        bc = [BoundaryCondition.ZERO, BoundaryCondition.PERIODIC][idx % 4 // 2]

        report = compare(ProxProblem(data=data, beta=beta, weights=weights, bc=bc))
        assert report.regime is Regime.EXACT_LARGE_BETA
        assert report.rel_err_objective <= 1e-4
        near.append(report.rel_err_minimizer)
        far.append(
            compare(
                ProxProblem(data=data, beta=4.0 * beta, weights=weights, bc=bc)
            ).rel_err_minimizer
        )
    # the explicit formula is first order in 1/beta: quadrupling beta cuts the error ~16x
    assert np.mean(far) <= np.mean(near) / 6.0
    assert max(near) <= 1e-2


class TestCompare:
    @pytest.fixture(scope="class")
    def reports(self):
        matrix = table_matrix(size=100, zero_block=11, seed=0)
        weights = GroupWeights.ones(GroupShape2D(k1=3, k2=3))
        return {
            (bc, beta): compare(ProxProblem(data=matrix, beta=beta, weights=weights, bc=bc))
            for bc in (BoundaryCondition.ZERO, BoundaryCondition.PERIODIC)
            for beta in (1.0, 7.0, 30.0, 50.0, 200.0)
        }

    @pytest.mark.parametrize("bc", [BoundaryCondition.ZERO, BoundaryCondition.PERIODIC])
    def test_small_beta_row(self, reports, bc):
        report = reports[(bc, 1.0)]
        assert report.regime is Regime.EXACT_SMALL_BETA
        assert report.rel_err_objective <= 1e-10
        assert report.rel_err_minimizer is None

    @pytest.mark.parametrize("bc", [BoundaryCondition.ZERO, BoundaryCondition.PERIODIC])
    def test_intermediate_row(self, reports, bc):
        report = reports[(bc, 7.0)]
        assert report.regime is Regime.APPROXIMATE
        assert report.rel_err_objective <= 1e-2

    @pytest.mark.parametrize("bc", [BoundaryCondition.ZERO, BoundaryCondition.PERIODIC])
    @pytest.mark.parametrize(
        "beta, objective_tol, minimizer_tol", [(30.0, 1e-4, 5e-3), (50.0, 1e-5, 2e-3)]
    )
    def test_large_beta_rows(self, reports, bc, beta, objective_tol, minimizer_tol):
        report = reports[(bc, beta)]
        assert report.regime is Regime.EXACT_LARGE_BETA
        assert report.rel_err_objective <= objective_tol
        assert report.rel_err_minimizer <= minimizer_tol

    @pytest.mark.parametrize("bc", [BoundaryCondition.ZERO, BoundaryCondition.PERIODIC])
    def test_minimizer_error_shrinks_like_inverse_beta_squared(self, reports, bc):
        errors = {beta: reports[(bc, beta)].rel_err_minimizer for beta in (30.0, 50.0, 200.0)}
        # (50/30)^2 ~ 2.8, (200/50)^2 = 16
        assert 2.0 <= errors[30.0] / errors[50.0] <= 4.5
        assert errors[50.0] / errors[200.0] >= 8.0
        assert errors[200.0] <= 1e-4
        assert reports[(bc, 200.0)].mae_minimizer <= 1e-4

    def test_trajectories(self, reports):
        for report in reports.values():
            assert len(report.mm_trajectory) == 21
            assert len(report.objective_trajectory) == 21
            assert len(set(report.objective_trajectory)) == 1
            _assert_non_increasing(report.mm_trajectory)


class TestTableMatrix:
    def test_centred_zero_block(self):
        matrix = table_matrix(size=100, zero_block=11, seed=0)
        assert matrix.shape == (100, 100)
        assert np.all(matrix[44:55, 44:55] == 0.0)
        assert np.count_nonzero(matrix == 0.0) == 121
        assert matrix.min() >= 0.0 and matrix.max() < 1.0

    def test_seeded(self):
        np.testing.assert_array_equal(table_matrix(seed=3), table_matrix(seed=3))
        assert not np.array_equal(table_matrix(seed=3), table_matrix(seed=4))

    def test_block_must_fit(self):
        with pytest.raises(InvalidArgumentError):
            table_matrix(size=10, zero_block=11)
