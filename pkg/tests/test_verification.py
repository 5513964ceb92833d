import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bilinosc import LatticeConfig, SolveRequest, Thresholds, check_fourier_duality, check_integral_relation, check_tail, hilbert_residual, solve, verify
from bilinosc.verification import duality_residual, hilbert_transform, kink_diagnostic, pv_sum


@settings(max_examples=30, deadline=None)
@given(n=st.integers(3, 60), c=st.floats(-1e3, 1e3, allow_nan=False))
def test_pv_sum_of_constant_cancels_at_center(n, c):
    g = np.full(2 * n + 1, c)
    assert pv_sum(g, [n])[0] == 0.0


def test_pv_sum_direct():
    g = np.array([1.0, 2.0, 4.0, 8.0])
    expected = [sum(g[j] / (i - j) for j in range(4) if j != i) for i in range(4)]
    np.testing.assert_allclose(pv_sum(g), expected)


def test_hilbert_of_lorentzian():
    # H[1/(1+x^2)] = x/(1+x^2); the grid principal value is first order in the spacing
    errors = []
    for n in (8001, 16001):
        x = np.linspace(-200, 200, n)
        rows = np.flatnonzero(np.abs(x) <= 5)
        got = hilbert_transform(1 / (1 + x**2), rows)
        errors.append(np.abs(got - x[rows] / (1 + x[rows] ** 2)).max())
    assert errors[0] < 2e-2
    assert errors[1] < errors[0] / 1.8


def test_duality_of_gaussian_vector(small_cfg):
    g = np.exp(-small_cfg.positions**2 / 2)
    assert duality_residual(small_cfg, g, 0) < 1e-10
    # x e^{-x^2/2} is an eigenfunction of the transform with eigenvalue -i
    h = small_cfg.positions * g
    assert duality_residual(small_cfg, h, 1) < 1e-10
    assert duality_residual(small_cfg, h, 0) > 1.0


def test_duality_window_inside_zone(small_cfg, small_spectrum):
    with pytest.raises(ValueError, match="Brillouin"):
        check_fourier_duality(small_spectrum, 0, window_xmax=10 * small_cfg.k_max)


def test_duality_on_desk_spectrum(desk_spectrum):
    for n in range(4):
        assert check_fourier_duality(desk_spectrum, n) < 5e-3


def test_tail_exponent_ground_state(desk_spectrum):
    res = check_tail(desk_spectrum, 0)
    assert res.exponent == pytest.approx(-3.0, abs=0.3)
    assert res.window == pytest.approx((desk_spectrum.lambdas[0] + 3, 0.8 * 12))


@pytest.mark.parametrize("window", [(1.0, 8.0), (5.0, 11.5), (9.0, 8.0)])
def test_tail_window_validation(desk_spectrum, window):
    with pytest.raises(ValueError):
        check_tail(desk_spectrum, 0, window)


def test_integral_relation_shrinks_with_box():
    # the truncated integrals miss a tail of order C / lambda_c
    small = solve(SolveRequest(LatticeConfig(1201, 12.0), n_eig=2, method="dense"))
    large = solve(SolveRequest(LatticeConfig(2401, 24.0), n_eig=2, method="dense"))
    for n in range(2):
        r_small = check_integral_relation(small, n)
        r_large = check_integral_relation(large, n)
        assert r_large.residual < 0.7 * r_small.residual
        assert r_large.tail_completed_residual < r_large.residual


def test_hilbert_residual_converges():
    values = []
    for n_sites in (1001, 2001):
        spec = solve(SolveRequest(LatticeConfig(n_sites, 10.0), n_eig=1, method="dense"))
        values.append(hilbert_residual(spec, 0))
    assert values[1] < values[0] / 1.5


def test_kink_diagnostic_finite(small_spectrum):
    assert np.isfinite(kink_diagnostic(small_spectrum, 0))
    assert np.isfinite(kink_diagnostic(small_spectrum, 1))


def test_report_structure(desk_spectrum):
    rep = verify(desk_spectrum, levels=range(2))
    data = rep.to_dict()
    json.dumps(data)
    assert set(data) == {"meta", "levels"}
    assert set(data["levels"]) == {"0", "1"}
    lenient = Thresholds(integral_relation=1.0, tail_exponent=10.0, tail_coeff=10.0, duality=1.0)
    assert rep.failures(lenient) == []
    strict = Thresholds(duality=1e-12)
    assert any("duality" in f for f in rep.failures(strict))


def test_thresholds_from_dict():
    assert Thresholds.from_dict({"duality": 0.5}).duality == 0.5
    with pytest.raises(ValueError, match="unknown"):
        Thresholds.from_dict({"dualty": 0.5})


def test_level_out_of_range(small_spectrum):
    with pytest.raises(IndexError):
        check_tail(small_spectrum, 99)
