"""Closed-form fits to the low eigenfunctions and the self-dual ground-state ansatz.

Levels 0 and 1 are modelled as ``x**n exp(-a sqrt(x**2 + b**2) + c)``;
levels 2 and 3 as ``x**(n-2) (d**2 - x**2) exp(-a sqrt(x**2 + b**2) + c)``.
The fits use a small Levenberg-Marquardt solver with analytic Jacobians.
"""

import logging
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, RegressorMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_int, check_positions, check_positive
from .lattice import build_operator, semi_discrete_ft
from .verification import duality_residual

logger = logging.getLogger(__name__)

#: Default Levenberg-Marquardt starting points per level.
DEFAULT_INITIAL = {0: (1.0, 1.0, 0.0), 1: (1.5, 1.0, 1.0), 2: (2.0, 1.0, 2.0, 1.0), 3: (2.0, 1.0, 2.0, 1.0)}
PARAM_NAMES = ("a", "b", "c", "d")


class FitError(RuntimeError):
    pass


def n_params(n):
    return 3 if n < 2 else 4


def _check_model_level(n):
    n = check_int(n, "n", minimum=0)
    if n > 3:
        raise ValueError(f"closed-form models exist only for n in 0..3, got {n}")
    return n


def eval_model(n, params, x):
    """Evaluate the level-`n` model at positions `x`."""
    n = _check_model_level(n)
    p = np.asarray(params, dtype=float)
    if p.shape != (n_params(n),):
        raise ValueError(f"level {n} takes {n_params(n)} parameters, got {p.shape}")
    x = np.asarray(x, dtype=float)
    a, b, c = p[:3]
    envelope = np.exp(-a * np.sqrt(x * x + b * b) + c)
    if n < 2:
        return x**n * envelope
    return x ** (n - 2) * (p[3] ** 2 - x * x) * envelope


def model_jacobian(n, params, x):
    """Derivatives of :func:`eval_model` with respect to the parameters, shape ``(len(x), P)``."""
    n = _check_model_level(n)
    p = np.asarray(params, dtype=float)
    x = np.asarray(x, dtype=float)
    a, b, c = p[:3]
    s = np.sqrt(x * x + b * b)
    envelope = np.exp(-a * s + c)
    if n < 2:
        prefactor = x**n
    else:
        prefactor = x ** (n - 2) * (p[3] ** 2 - x * x)
    f = prefactor * envelope
    cols = [-s * f, -a * b / s * f, f]
    if n >= 2:
        cols.append(x ** (n - 2) * 2.0 * p[3] * envelope)
    return np.column_stack(cols)


@dataclass(frozen=True)
class LMResult:
    params: np.ndarray
    cost: float
    iterations: int
    converged: bool
    gradient_norm: float
    history: tuple


def levenberg_marquardt(
    residual,
    jacobian,
    p0,
    *,
    max_iter=500,
    ftol=1e-12,
    gtol=1e-10,
    damping=1e-3,
    max_damping=1e12,
):
    """Minimize ``0.5 * ||residual(p)||**2``.

    Steps solve ``(J^T J + mu D) dp = -J^T r`` with ``D = diag(J^T J)`` and
    are accepted only if they lower the cost, so ``history`` is strictly
    decreasing. ``mu`` follows Nielsen's gain-ratio rule. Stops when the
    relative cost change of an accepted step drops below `ftol` or the
    gradient norm below `gtol`.
    """
    p = np.array(p0, dtype=float)
    r = residual(p)
    cost = 0.5 * float(r @ r)
    history = [cost]
    mu, nu = damping, 2.0
    grad_norm = np.inf
    for it in range(1, max_iter + 1):
        J = jacobian(p)
        g = J.T @ r
        grad_norm = float(np.linalg.norm(g))
        if grad_norm < gtol:
            return LMResult(p, cost, it - 1, True, grad_norm, tuple(history))
        A = J.T @ J
        scale = np.diag(A).copy()
        scale[scale == 0.0] = 1.0
        while True:
            try:
                step = np.linalg.solve(A + mu * np.diag(scale), -g)
            except np.linalg.LinAlgError:
                step = None
            if step is not None and np.all(np.isfinite(step)):
                trial = p + step
                r_trial = residual(trial)
                cost_trial = 0.5 * float(r_trial @ r_trial)
                predicted = 0.5 * float(step @ (mu * scale * step - g))
                if np.isfinite(cost_trial) and cost_trial < cost and predicted > 0:
                    break
            mu *= nu
            nu *= 2.0
            if mu > max_damping:
                if step is None:
                    raise FitError("normal equations stayed singular under maximal damping")
                # no descent direction left at double precision
                return LMResult(p, cost, it, True, grad_norm, tuple(history))
        gain = (cost - cost_trial) / predicted
        rel_change = (cost - cost_trial) / max(cost, np.finfo(float).tiny)
        p, r, cost = trial, r_trial, cost_trial
        history.append(cost)
        mu *= max(1.0 / 3.0, 1.0 - (2.0 * gain - 1.0) ** 3)
        nu = 2.0
        if rel_change < ftol:
            return LMResult(p, cost, it, True, grad_norm, tuple(history))
    return LMResult(p, cost, max_iter, False, grad_norm, tuple(history))


class EigenfunctionModel(RegressorMixin, BaseEstimator):
    """Least-squares fit of the closed-form level-`n` model to samples ``(x, phi)``.

    Parameters
    ----------
    n : int, default=0
        Level index, 0..3.
    initial_params : tuple, optional
        Starting point; defaults to ``DEFAULT_INITIAL[n]``.
    max_iter : int, default=500
    ftol, gtol : float
        Stopping tolerances of the Levenberg-Marquardt loop.

    Attributes
    ----------
    params_ : ndarray
        Fitted ``(a, b, c)`` or ``(a, b, c, d)``. ``b`` and ``d`` enter only
        squared and are reported as absolute values.
    rms_residual_, max_abs_residual_ : float
    n_iter_ : int
    converged_ : bool
    history_ : tuple of float
        Objective after each accepted step.
    """

    def __init__(self, n=0, initial_params=None, max_iter=500, ftol=1e-12, gtol=1e-10):
        self.n = n
        self.initial_params = initial_params
        self.max_iter = max_iter
        self.ftol = ftol
        self.gtol = gtol

    def fit(self, X, y):
        n = _check_model_level(self.n)
        x = check_positions(X, "X")
        y = np.asarray(y, dtype=float)
        if y.shape != x.shape:
            raise ValueError(f"y has shape {y.shape}, expected {x.shape}")
        p0 = DEFAULT_INITIAL[n] if self.initial_params is None else self.initial_params
        if len(p0) != n_params(n):
            raise ValueError(f"level {n} takes {n_params(n)} initial parameters")
        result = levenberg_marquardt(
            lambda p: eval_model(n, p, x) - y,
            lambda p: model_jacobian(n, p, x),
            p0,
            max_iter=self.max_iter,
            ftol=self.ftol,
            gtol=self.gtol,
        )
        params = result.params.copy()
        params[1] = abs(params[1])
        if n >= 2:
            params[3] = abs(params[3])
        resid = eval_model(n, params, x) - y
        self.params_ = params
        self.rms_residual_ = float(np.sqrt(np.mean(resid**2)))
        self.max_abs_residual_ = float(np.abs(resid).max())
        self.n_iter_ = result.iterations
        self.converged_ = result.converged
        self.history_ = result.history
        if not result.converged:
            logger.warning("fit for n=%d stopped after %d iterations without converging", n, result.iterations)
        return self

    def predict(self, X):
        check_is_fitted(self, "params_")
        return eval_model(self.n, self.params_, check_positions(X, "X"))


@dataclass(frozen=True)
class FitResult:
    n: int
    params: np.ndarray
    rms_residual: float
    max_abs_residual: float
    window: tuple
    iterations: int
    converged: bool

    def named_params(self):
        return dict(zip(PARAM_NAMES, (float(p) for p in self.params)))


def fit(spectrum, n, window_xf=8.0, initial_params=None, max_iter=500):
    """Fit the level-`n` model to ``phi_n`` on ``|x| <= window_xf`` with uniform weights."""
    n = _check_model_level(n)
    if n >= spectrum.n_eig:
        raise IndexError(f"level {n} not in spectrum with {spectrum.n_eig} levels")
    window_xf = check_positive(window_xf, "window_xf")
    if window_xf > spectrum.config.lambda_c:
        raise ValueError(f"window_xf={window_xf} extends past the lattice edge {spectrum.config.lambda_c}")
    x = spectrum.positions
    mask = np.abs(x) <= window_xf
    est = EigenfunctionModel(n=n, initial_params=initial_params, max_iter=max_iter)
    est.fit(x[mask], spectrum.phi(n)[mask])
    if not est.converged_:
        raise FitError(f"fit for n={n} did not converge in {max_iter} iterations")
    return FitResult(
        n=n,
        params=est.params_,
        rms_residual=est.rms_residual_,
        max_abs_residual=est.max_abs_residual_,
        window=(-window_xf, window_xf),
        iterations=est.n_iter_,
        converged=est.converged_,
    )


# -- Fourier-symmetric ground-state ansatz ------------------------------------


@dataclass(frozen=True)
class AnsatzResult:
    a: float
    rayleigh_quotient: float
    overlap: float
    trial: np.ndarray = None


def _power_law_part(x, a):
    return (x * x + a * a) ** -1.5


def ansatz_trials(config, a_values):
    """Trial vectors ``f + FT[f]`` with ``f = (x**2 + a**2)**-1.5``, one column per `a`."""
    a_values = np.atleast_1d(np.asarray(a_values, dtype=float))
    if np.any(a_values <= 0):
        raise ValueError("ansatz parameter a must be > 0")
    x = config.positions
    base = np.column_stack([_power_law_part(x, a) for a in a_values])
    # f is even and real, so its transform is real
    transformed = semi_discrete_ft(config, base, x).real
    return base + transformed


def _evaluate(config, op, ground, a, trial):
    t = trial
    rq = float(t @ op.apply(t) / (t @ t))
    overlap = None
    if ground is not None:
        h = config.lattice_constant
        overlap = float(abs(h * (t @ ground)) / np.sqrt(h * (t @ t)))
    return AnsatzResult(a=float(a), rayleigh_quotient=rq, overlap=overlap, trial=t)


def _ground_state(config, spectrum):
    if spectrum is None:
        from .eigensolver import SolveRequest, solve

        spectrum = solve(SolveRequest(config, n_eig=1))
    if spectrum.config != config:
        raise ValueError("spectrum was computed on a different lattice")
    return spectrum.phi(0)


def ansatz_ground_state(config, a, spectrum=None):
    """Rayleigh quotient and ground-state overlap of the self-dual trial at `a`."""
    a = check_positive(a, "a")
    op = build_operator(config)
    ground = _ground_state(config, spectrum)
    trial = ansatz_trials(config, [a])[:, 0]
    return _evaluate(config, op, ground, a, trial)


def ansatz_duality_residual(config, a, window_xmax=None):
    trial = ansatz_trials(config, [a])[:, 0]
    return duality_residual(config, trial, 0, window_xmax)


@dataclass(frozen=True)
class AnsatzScan:
    best_a: float
    best_value: float
    grid: np.ndarray
    values: np.ndarray
    refinement_evaluations: int


def scan_ansatz(config, a_grid, xtol=1e-3, max_refine=60):
    """Minimize the trial's Rayleigh quotient over `a_grid`, then refine by golden section.

    The golden-section search runs on the bracket formed by the grid
    neighbours of the best grid point.
    """
    grid = np.sort(np.atleast_1d(np.asarray(a_grid, dtype=float)))
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("a_grid must be nonempty and positive")
    op = build_operator(config)
    trials = ansatz_trials(config, grid)
    values = np.array([t @ op.apply(t) / (t @ t) for t in trials.T])
    i = int(np.argmin(values))
    if grid.size == 1:
        return AnsatzScan(float(grid[0]), float(values[0]), grid, values, 0)

    def rq(a):
        t = ansatz_trials(config, [a])[:, 0]
        return float(t @ op.apply(t) / (t @ t))

    lo, hi = grid[max(i - 1, 0)], grid[min(i + 1, grid.size - 1)]
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    c = hi - invphi * (hi - lo)
    d = lo + invphi * (hi - lo)
    fc, fd = rq(c), rq(d)
    evals = 2
    while hi - lo > xtol and evals < max_refine:
        if fc < fd:
            hi, d, fd = d, c, fc
            c = hi - invphi * (hi - lo)
            fc = rq(c)
        else:
            lo, c, fc = c, d, fd
            d = lo + invphi * (hi - lo)
            fd = rq(d)
        evals += 1
    best_a, best_val = (c, fc) if fc < fd else (d, fd)
    if values[i] <= best_val:
        best_a, best_val = grid[i], values[i]
    return AnsatzScan(float(best_a), float(best_val), grid, values, evals)
