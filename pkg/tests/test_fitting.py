import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from bilinosc import EigenfunctionModel, LatticeConfig, ansatz_ground_state, eval_model, fit, scan_ansatz
from bilinosc.fitting import FitError, levenberg_marquardt, model_jacobian


def test_rosenbrock():
    res = levenberg_marquardt(
        lambda p: np.array([10 * (p[1] - p[0] ** 2), 1 - p[0]]),
        lambda p: np.array([[-20 * p[0], 10.0], [-1.0, 0.0]]),
        [-1.2, 1.0],
    )
    assert res.converged
    np.testing.assert_allclose(res.params, [1.0, 1.0], atol=1e-6)
    assert all(b < a for a, b in zip(res.history, res.history[1:]))


@pytest.mark.parametrize("n", range(4))
def test_jacobian_matches_finite_differences(n):
    p = np.array([1.3, 0.7, 0.4, 1.1][: 3 if n < 2 else 4])
    x = np.linspace(-6, 6, 41)
    jac = model_jacobian(n, p, x)
    for k in range(p.size):
        dp = np.zeros_like(p)
        dp[k] = 1e-6
        fd = (eval_model(n, p + dp, x) - eval_model(n, p - dp, x)) / 2e-6
        np.testing.assert_allclose(jac[:, k], fd, atol=1e-6)


@pytest.mark.parametrize(
    "n, truth",
    [(0, (1.18, 0.57, 0.47)), (1, (1.74, 0.97, 1.95)), (2, (1.95, 0.94, 2.24, 0.64)), (3, (2.28, 1.18, 2.94, 1.15))],
)
def test_recovers_synthetic_parameters(n, truth):
    x = np.linspace(-8, 8, 801)
    est = EigenfunctionModel(n=n).fit(x, eval_model(n, truth, x))
    np.testing.assert_allclose(est.params_, truth, rtol=1e-6)
    assert est.max_abs_residual_ < 1e-9
    np.testing.assert_allclose(est.predict(x[:5]), eval_model(n, truth, x[:5]))


def test_model_rejects_unknown_level():
    with pytest.raises(ValueError):
        eval_model(4, (1, 1, 1), np.zeros(3))


def test_estimator_api():
    est = EigenfunctionModel(n=2, max_iter=50)
    assert est.get_params()["max_iter"] == 50
    with pytest.raises(NotFittedError):
        est.predict(np.zeros(3))
    assert clone(est).n == 2
    with pytest.raises(ValueError):
        EigenfunctionModel(n=0, initial_params=(1.0, 1.0)).fit(np.zeros(5), np.zeros(5))


def test_desk_fits_within_curve_tolerance(desk_spectrum):
    for n in range(4):
        res = fit(desk_spectrum, n)
        assert res.converged
        assert res.max_abs_residual < 0.02
        assert set(res.named_params()) <= {"a", "b", "c", "d"}


def test_fit_window_validation(desk_spectrum):
    with pytest.raises(ValueError):
        fit(desk_spectrum, 0, window_xf=50.0)


def test_fit_iteration_cap(desk_spectrum):
    with pytest.raises(FitError):
        fit(desk_spectrum, 3, max_iter=2)


def test_ansatz_respects_variational_bound(desk_spectrum):
    cfg = desk_spectrum.config
    res = ansatz_ground_state(cfg, 1.172, desk_spectrum)
    assert res.rayleigh_quotient >= desk_spectrum.lambdas[0] - 1e-9
    assert res.rayleigh_quotient - desk_spectrum.lambdas[0] < 0.05
    assert res.overlap > 0.99


def test_ansatz_config_mismatch(desk_spectrum):
    with pytest.raises(ValueError):
        ansatz_ground_state(LatticeConfig(1001, 10.0), 1.172, desk_spectrum)


def test_scan_refines_inside_grid():
    cfg = LatticeConfig(1001, 10.0)
    scan = scan_ansatz(cfg, [0.9, 1.2, 1.5, 1.8])
    assert 0.9 <= scan.best_a <= 1.8
    assert scan.best_value <= min(scan.values) + 1e-12
    assert scan.refinement_evaluations > 0
