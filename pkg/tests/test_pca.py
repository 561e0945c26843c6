import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from orthantprob.pca import (
    ConvergenceError,
    CovarianceSpec,
    DegenerateDataError,
    NonSymmetricError,
    ZModel,
    eigen_decompose,
    make_spd,
    pearson_corr,
    random_orthogonal,
    run_experiment,
)


def spd_fixture(p, seed, gap=1e-3):
    rng = np.random.default_rng(seed)
    lam = np.sort(rng.uniform(0.5, 10.0, p))[::-1]
    lam = lam + gap * np.arange(p)[::-1]  # keep eigenvalues separated
    return CovarianceSpec(p, "random_spd", tuple(lam), seed=seed)


class TestCovarianceSpec:
    def test_identity(self):
        assert np.array_equal(make_spd(CovarianceSpec(3)), np.eye(3))

    def test_diagonal(self):
        assert np.array_equal(make_spd(CovarianceSpec(2, "diagonal", (4, 1))), np.diag([4.0, 1.0]))

    @pytest.mark.parametrize("kwargs", [
        dict(p=1),
        dict(p=2, kind="bogus"),
        dict(p=2, kind="diagonal"),
        dict(p=2, kind="diagonal", spectrum=(1, 2)),
        dict(p=2, kind="diagonal", spectrum=(1, 0)),
        dict(p=3, kind="diagonal", spectrum=(3, 2)),
        dict(p=2, kind="random_spd", spectrum=(2, 1)),
    ])
    def test_invalid(self, kwargs):
        with pytest.raises(ValueError):
            CovarianceSpec(**kwargs)

    def test_random_orthogonal_is_orthonormal(self):
        q = random_orthogonal(30, np.random.default_rng(1))
        assert np.abs(q.T @ q - np.eye(30)).max() < 1e-12

    def test_random_spd_spectrum_round_trip(self):
        spec = spd_fixture(12, 4)
        got = np.sort(np.linalg.eigvalsh(make_spd(spec)))[::-1]
        assert np.abs(got - np.array(spec.spectrum)).max() <= 1e-8


class TestEigenDecompose:
    def test_identity(self):
        basis = eigen_decompose(np.eye(3))
        assert np.array_equal(basis.eigenvalues, [1.0, 1.0, 1.0])
        assert np.array_equal(basis.components, np.eye(3))

    def test_diagonal_sorted(self):
        basis = eigen_decompose(np.diag([1.0, 4.0]))
        assert np.allclose(basis.eigenvalues, [4.0, 1.0])
        assert np.allclose(np.abs(basis.components), [[0, 1], [1, 0]])

    def test_ties_keep_input_order(self):
        basis = eigen_decompose(np.diag([2.0, 5.0, 2.0]))
        assert np.array_equal(np.abs(basis.components), np.eye(3)[:, [1, 0, 2]])

    @pytest.mark.parametrize("p, seed", [(2, 0), (8, 1), (8, 2), (25, 3)])
    def test_against_numpy(self, p, seed):
        spec = spd_fixture(p, seed)
        sigma = make_spd(spec)
        basis = eigen_decompose(sigma)
        v = basis.components
        assert np.abs(v.T @ v - np.eye(p)).max() <= 1e-9
        assert np.linalg.norm((v * basis.eigenvalues) @ v.T - sigma) / np.linalg.norm(sigma) <= 1e-8
        assert np.allclose(basis.eigenvalues, np.linalg.eigvalsh(sigma)[::-1], atol=1e-10)

    def test_recovers_generating_rotation(self):
        spec = spd_fixture(10, 9)
        q = random_orthogonal(10, np.random.Generator(np.random.PCG64(spec.seed)))
        v = eigen_decompose(make_spd(spec)).components
        assert np.allclose(np.abs(q.T @ v), np.eye(10), atol=1e-6)

    def test_indefinite_symmetric(self):
        a = np.array([[0.0, 2.0], [2.0, 3.0]])
        assert np.allclose(eigen_decompose(a).eigenvalues, [4.0, -1.0])

    def test_non_symmetric(self):
        with pytest.raises(NonSymmetricError):
            eigen_decompose(np.array([[1.0, 2.0], [0.0, 1.0]]))

    def test_non_convergence(self):
        with pytest.raises(ConvergenceError):
            eigen_decompose(make_spd(spd_fixture(6, 1)), max_sweeps=1)

    def test_deterministic(self):
        sigma = make_spd(spd_fixture(7, 5))
        a, b = eigen_decompose(sigma), eigen_decompose(sigma)
        assert np.array_equal(a.components, b.components)


class TestPearson:
    def test_examples(self):
        x = np.arange(10.0)
        assert pearson_corr(x, x) == pytest.approx(1.0, abs=1e-15)
        assert pearson_corr(x, -x) == pytest.approx(-1.0, abs=1e-15)
        assert pearson_corr(x, x + 3.0) == pytest.approx(1.0, abs=1e-12)

    @settings(max_examples=200)
    @given(arrays(float, 20, elements=st.floats(-100, 100)),
           arrays(float, 20, elements=st.floats(-100, 100)),
           st.floats(-50, 50), st.floats(-50, 50))
    def test_translation_invariance(self, x, y, cx, cy):
        if np.ptp(x) < 1e-3 or np.ptp(y) < 1e-3:
            return
        assert abs(pearson_corr(x + cx, y + cy) - pearson_corr(x, y)) <= 1e-12

    def test_degenerate(self):
        with pytest.raises(DegenerateDataError):
            pearson_corr(np.ones(5), np.arange(5.0))

    def test_too_short(self):
        with pytest.raises(ValueError):
            pearson_corr([1.0, 2.0], [2.0, 1.0])


class TestZModel:
    def test_invalid(self):
        with pytest.raises(ValueError):
            ZModel("bogus")
        with pytest.raises(ValueError):
            ZModel("noisy_linear", noise=-1)

    def test_independent_ignores_data(self):
        x = np.zeros((50, 3))
        z = ZModel("independent").draw(x, np.random.default_rng(0))
        assert z.shape == (50,) and np.ptp(z) > 0


class TestExperiment:
    def test_identity_symmetry(self):
        rep = run_experiment(CovarianceSpec(4), 1, 3, n_obs=60, n_trials=1500,
                             z_model=ZModel(), seed=12)
        assert rep.estimates[1, 3].within(0.5)
        assert rep.skipped == 0
        assert rep.notes  # tie note for identity covariance

    def test_identity_full_matrix(self):
        rep = run_experiment(CovarianceSpec(3), 1, 1, n_obs=30, n_trials=800,
                             z_model=ZModel(), seed=2, full_matrix=True)
        m = rep.matrix()
        assert m.shape == (3, 3)
        assert np.all(np.diag(m) == 1.0)  # Y_k == X_k when all eigenvalues tie
        off = [rep.estimates[k, i] for k in range(1, 4) for i in range(1, 4) if k != i]
        assert all(est.within(0.5) for est in off)

    def test_translation_of_data_changes_nothing(self):
        rng = np.random.default_rng(3)
        x = rng.standard_normal((40, 3))
        z = x @ np.array([0.3, -0.2, 0.9])
        for col in x.T:
            assert abs(pearson_corr(col + 7.0, z - 2.0) - pearson_corr(col, z)) <= 1e-12

    @pytest.mark.parametrize("z_kind", ["random_direction", "noisy_linear", "independent"])
    def test_diagonal_report(self, z_kind):
        spec = CovarianceSpec(3, "diagonal", (5.0, 2.0, 1.0))
        rep = run_experiment(spec, 1, 2, n_obs=30, n_trials=200,
                             z_model=ZModel(z_kind, noise=0.5), seed=4, full_matrix=True)
        assert all(0.0 <= est.estimate <= 1.0 for est in rep.estimates.values())
        assert rep.config["z_model"]["kind"] == z_kind
        assert rep.skip_rate <= 0.01

    def test_sample_pca_mode(self):
        rep = run_experiment(spd_fixture(4, 6), 1, 1, n_obs=80, n_trials=200,
                             z_model=ZModel(), seed=5, sample_pca=True)
        assert rep.pc_source == "sample"
        assert 0.0 <= rep.estimates[1, 1].estimate <= 1.0

    def test_deterministic(self):
        args = (spd_fixture(4, 1), 2, 3, 60, 300, ZModel("noisy_linear"), 99)
        assert run_experiment(*args).estimates == run_experiment(*args).estimates

    @pytest.mark.parametrize("k, i, n_obs, trials", [(0, 1, 50, 100), (1, 6, 50, 100),
                                                     (1, 1, 49, 100), (1, 1, 50, 99)])
    def test_preconditions(self, k, i, n_obs, trials):
        with pytest.raises(ValueError):
            run_experiment(CovarianceSpec(5), k, i, n_obs, trials, ZModel(), seed=0)
