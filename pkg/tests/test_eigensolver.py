import numpy as np
import pytest
import scipy.linalg
from sklearn.base import clone

from bilinosc import BilinearOscillator, ConvergenceError, LatticeConfig, PhysicalScale, SolveRequest, postprocess, solve, to_physical
from bilinosc.lanczos import lanczos_smallest

from .conftest import lattice


def test_lanczos_matches_dense_random_matrix():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((300, 300))
    a = a + a.T
    vals, vecs, info = lanczos_smallest(lambda v: a @ v, 300, 6, tol=1e-10, seed=4)
    ref = scipy.linalg.eigh(a, eigvals_only=True, subset_by_index=[0, 5])
    np.testing.assert_allclose(vals, ref, atol=1e-9)
    for j in range(6):
        assert np.linalg.norm(a @ vecs[:, j] - vals[j] * vecs[:, j]) <= 1e-9
    assert info["matvecs"] > 0


def test_lanczos_small_operator_exhausts_krylov_space():
    a = np.diag(np.arange(1.0, 9.0))
    vals, _, _ = lanczos_smallest(lambda v: a @ v, 8, 8, seed=1)
    np.testing.assert_allclose(vals, np.arange(1.0, 9.0), atol=1e-10)


def test_lanczos_iteration_budget():
    rng = np.random.default_rng(5)
    a = np.diag(rng.uniform(0, 1, 2000))
    with pytest.raises(ConvergenceError):
        lanczos_smallest(lambda v: a @ v, 2000, 10, tol=1e-14, max_iter=300, seed=1)


def test_solve_request_validation(small_cfg):
    with pytest.raises(ValueError):
        SolveRequest(small_cfg, method="arpack")
    with pytest.raises(ValueError):
        SolveRequest(small_cfg, n_eig=0)
    assert SolveRequest(lattice(11, 4.0), n_eig=50).n_eig == 11
    assert SolveRequest(small_cfg).resolved_method == "dense"
    assert SolveRequest(LatticeConfig(4001, 20.0)).resolved_method == "iterative"


def test_full_spectrum_of_tiny_lattice():
    cfg = lattice(11, 2.0)
    spec = solve(SolveRequest(cfg, n_eig=11, method="dense"))
    assert spec.n_eig == 11
    assert np.all(np.diff(spec.lambdas) > 0)


def test_dense_and_iterative_agree(small_cfg, small_spectrum):
    it = solve(SolveRequest(small_cfg, n_eig=10, method="iterative"))
    np.testing.assert_allclose(it.lambdas, small_spectrum.lambdas, atol=1e-9, rtol=0)
    np.testing.assert_allclose(it.vectors, small_spectrum.vectors, atol=1e-6, rtol=0)
    assert it.parities == small_spectrum.parities


def test_iterative_is_deterministic(small_cfg):
    req = SolveRequest(small_cfg, n_eig=4, method="iterative", seed=7)
    a, b = solve(req), solve(req)
    np.testing.assert_array_equal(a.lambdas, b.lambdas)
    np.testing.assert_array_equal(a.vectors, b.vectors)


def test_normalization_sign_and_parity(small_spectrum):
    s = small_spectrum
    a = s.config.lattice_constant
    np.testing.assert_allclose(a * (s.vectors**2).sum(axis=0), 1.0, atol=1e-12)
    for n in range(s.n_eig):
        phi = s.phi(n)
        if n % 2 == 0:
            assert s.parities[n] == "even"
            assert s.phi_at_zero(n) > 0
            np.testing.assert_allclose(phi, phi[::-1], atol=1e-9)
        else:
            assert s.parities[n] == "odd"
            assert s.dphi_at_zero(n) > 0
            assert abs(s.phi_at_zero(n)) < 1e-9
            np.testing.assert_allclose(phi, -phi[::-1], atol=1e-9)
    assert s.asymmetry.max() < 1e-8
    assert s.residuals.max() < 1e-9
    assert not s.flags


def test_spectrum_is_read_only(small_spectrum):
    with pytest.raises(ValueError):
        small_spectrum.vectors[0, 0] = 1.0


def test_postprocess_flips_signs(small_spectrum):
    flipped = -np.asarray(small_spectrum.vectors)
    again = postprocess(small_spectrum.lambdas, flipped, small_spectrum.config)
    np.testing.assert_allclose(again.vectors, small_spectrum.vectors, atol=1e-14)


def test_postprocess_rejects_unsorted(small_spectrum):
    with pytest.raises(ValueError, match="sorted"):
        postprocess(small_spectrum.lambdas[::-1], small_spectrum.vectors[:, ::-1], small_spectrum.config)


def test_desk_scale_values(desk_spectrum):
    assert desk_spectrum.lambdas[0] == pytest.approx(1.10408, abs=5e-4)
    assert desk_spectrum.lambdas[19] == pytest.approx(7.82800, abs=5e-3)


def test_physical_rescaling(small_spectrum):
    phys = to_physical(small_spectrum, PhysicalScale(v=2.0, F=8.0, hbar=1.0))
    np.testing.assert_allclose(phys.energies, 4.0 * small_spectrum.lambdas)
    np.testing.assert_allclose(phys.positions, 0.5 * small_spectrum.positions)


def test_estimator_api(small_spectrum):
    est = BilinearOscillator(n_sites=1001, lambda_c=10.0, n_eig=10, method="dense")
    assert est.get_params()["lambda_c"] == 10.0
    est.fit()
    np.testing.assert_allclose(est.eigenvalues_, small_spectrum.lambdas)
    # projecting an eigenvector gives a unit coordinate
    coeffs = est.transform(small_spectrum.vectors[:, :3].T)
    np.testing.assert_allclose(coeffs, np.eye(3, 10), atol=1e-10)
    back = est.inverse_transform(coeffs)
    np.testing.assert_allclose(back, small_spectrum.vectors[:, :3].T, atol=1e-10)
    twin = clone(est).set_params(n_eig=2)
    assert twin.n_eig == 2 and not hasattr(twin, "spectrum_")
