"""Lowest eigenpairs of the lattice Hamiltonian, in the continuum conventions.

Two routes compute the same :class:`Spectrum`: a dense LAPACK solve for
lattices up to :data:`~bilinosc.lattice.DENSE_MAX_SITES` sites, and
thick-restart Lanczos on the FFT matvec for anything larger. Both hand
their raw pairs to :func:`postprocess`, which fixes normalization, sign and
parity labels.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ._validation import check_int, check_positive
from .lanczos import ConvergenceError, lanczos_smallest
from .lattice import DENSE_MAX_SITES, LatticeConfig, PhysicalScale, build_operator, to_dense

logger = logging.getLogger(__name__)

AUTO_DENSE_MAX_SITES = 2001
PARITY_FLAG_THRESHOLD = 1e-6
TIE_THRESHOLD = 1e-12

__all__ = [
    "BilinearOscillator",
    "ConvergenceError",
    "PhysicalSpectrum",
    "SolveRequest",
    "Spectrum",
    "postprocess",
    "solve",
    "solve_dense",
    "solve_iterative",
    "to_physical",
]


@dataclass(frozen=True)
class SolveRequest:
    config: LatticeConfig
    n_eig: int = 20
    method: str = "auto"
    tol: float = 1e-10
    max_iter: int = 50000
    seed: int = 20001

    def __post_init__(self):
        if not isinstance(self.config, LatticeConfig):
            raise TypeError("config must be a LatticeConfig")
        n_eig = check_int(self.n_eig, "n_eig", minimum=1)
        if n_eig > self.config.n_sites:
            # a request for more pairs than sites means "all of them"
            object.__setattr__(self, "n_eig", self.config.n_sites)
        if self.method not in ("dense", "iterative", "auto"):
            raise ValueError(f"method must be 'dense', 'iterative' or 'auto', got {self.method!r}")
        check_positive(self.tol, "tol")
        check_int(self.max_iter, "max_iter", minimum=1)
        check_int(self.seed, "seed", minimum=0)

    @property
    def resolved_method(self):
        if self.method != "auto":
            return self.method
        return "dense" if self.config.n_sites <= AUTO_DENSE_MAX_SITES else "iterative"


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Sorted eigenpairs on the lattice.

    ``vectors[:, n]`` is normalized so that ``a * sum(phi**2) == 1``. Even
    states have ``phi(0) > 0``; odd states have a positive central-difference
    slope at the origin. ``residuals`` are ``||H y - lambda y||_2`` for the
    unit-2-norm version ``y`` of each vector, and ``asymmetry`` is the
    L2 distance (lattice measure) between ``phi`` and its parity image.
    """

    lambdas: np.ndarray
    vectors: np.ndarray
    parities: tuple
    config: LatticeConfig
    residuals: np.ndarray
    asymmetry: np.ndarray
    flags: tuple = ()
    method: str = ""
    info: dict = field(default_factory=dict)

    @property
    def n_eig(self):
        return self.lambdas.shape[0]

    @property
    def positions(self):
        return self.config.positions

    def phi(self, n):
        return self.vectors[:, n]

    def phi_at_zero(self, n):
        return float(self.vectors[self.config.center, n])

    def dphi_at_zero(self, n):
        """Central-difference slope ``(phi(a) - phi(-a)) / 2a`` at the origin."""
        c, a = self.config.center, self.config.lattice_constant
        return float((self.vectors[c + 1, n] - self.vectors[c - 1, n]) / (2.0 * a))


def _classify(vec):
    mirrored = vec[::-1]
    scale = np.linalg.norm(vec)
    d_even = np.linalg.norm(vec - mirrored) / scale
    d_odd = np.linalg.norm(vec + mirrored) / scale
    if d_even <= d_odd:
        return "even", d_even
    return "odd", d_odd


def postprocess(values, vectors, config, op=None, *, method=""):
    """Normalize, sign-fix and parity-label raw eigenpairs sorted ascending."""
    values = np.asarray(values, dtype=float)
    vectors = np.array(vectors, dtype=float, copy=True)
    if vectors.ndim == 1:
        vectors = vectors[:, None]
    if values.shape[0] != vectors.shape[1] or vectors.shape[0] != config.n_sites:
        raise ValueError("values/vectors shapes do not match the lattice")
    if np.any(np.diff(values) < 0):
        raise ValueError("eigenpairs must be sorted ascending")
    op = op if op is not None else build_operator(config)
    a = config.lattice_constant
    c = config.center

    parities, asym, resid, flags = [], [], [], []
    for n in range(values.shape[0]):
        y = vectors[:, n]
        y /= np.linalg.norm(y)
        resid.append(np.linalg.norm(op.apply(y) - values[n] * y))
        parity, rel = _classify(y)
        if rel > PARITY_FLAG_THRESHOLD:
            flags.append(f"n={n}: parity asymmetry {rel:.2e}")
        if parity == "even":
            sign = np.sign(y[c])
        else:
            sign = np.sign(y[c + 1] - y[c - 1])
        if sign == 0:
            flags.append(f"n={n}: sign convention undefined at x=0")
            sign = 1.0
        y *= sign / np.sqrt(a)
        parities.append(parity)
        # rel is scale-free; with the lattice measure ||phi|| = 1
        asym.append(rel)

    order = np.arange(values.shape[0])
    for n in range(values.shape[0] - 1):
        if values[n + 1] - values[n] < TIE_THRESHOLD:
            flags.append(f"n={n},{n + 1}: near-degenerate eigenvalues")
            if parities[order[n]] == "odd" and parities[order[n + 1]] == "even":
                order[n], order[n + 1] = order[n + 1], order[n]
    values = values[order]
    vectors = vectors[:, order]
    parities = [parities[i] for i in order]
    lambdas = values.copy()
    for arr in (lambdas, vectors):
        arr.setflags(write=False)
    return Spectrum(
        lambdas=lambdas,
        vectors=vectors,
        parities=tuple(parities),
        config=config,
        residuals=np.asarray(resid)[order],
        asymmetry=np.asarray(asym)[order],
        flags=tuple(flags),
        method=method,
    )


def solve_dense(req):
    """Full dense diagonalization (LAPACK ``syevr``) of the lattice matrix."""
    n = req.config.n_sites
    if n > DENSE_MAX_SITES:
        raise MemoryError(f"n_sites={n} exceeds the dense limit {DENSE_MAX_SITES}")
    op = build_operator(req.config)
    mat = to_dense(op)
    try:
        values, vectors = scipy.linalg.eigh(
            mat, subset_by_index=[0, req.n_eig - 1], driver="evr", overwrite_a=True
        )
    except np.linalg.LinAlgError as exc:
        raise ConvergenceError(f"dense eigensolver failed: {exc}") from exc
    spec = postprocess(values, vectors, req.config, op, method="dense")
    bound = 1e-10 * op.norm_bound
    if spec.residuals.max() > bound:
        raise ConvergenceError(
            f"dense residual {spec.residuals.max():.3e} exceeds {bound:.3e}"
        )
    return spec


def solve_iterative(req):
    """Thick-restart Lanczos on the FFT matvec; deterministic for a fixed seed."""
    op = build_operator(req.config)
    values, vectors, info = lanczos_smallest(
        op.apply,
        req.config.n_sites,
        req.n_eig,
        tol=req.tol,
        max_iter=req.max_iter,
        seed=req.seed,
        norm_hint=op.norm_bound,
    )
    logger.info("Lanczos converged: %s", info)
    spec = postprocess(values, vectors, req.config, op, method="iterative")
    object.__setattr__(spec, "info", info)
    return spec


def solve(req):
    if req.resolved_method == "dense":
        return solve_dense(req)
    return solve_iterative(req)


@dataclass(frozen=True, eq=False)
class PhysicalSpectrum:
    """Spectrum of ``v|p| + F|x|`` in the units of a :class:`PhysicalScale`.

    ``psi[:, n]`` holds ``phi_n`` sampled at the physical ``positions``.
    """

    energies: np.ndarray
    positions: np.ndarray
    psi: np.ndarray
    energy_scale: float
    length_scale: float


def to_physical(spectrum, scale):
    if not isinstance(scale, PhysicalScale):
        raise TypeError("scale must be a PhysicalScale")
    return PhysicalSpectrum(
        energies=spectrum.lambdas * scale.energy_scale,
        positions=spectrum.positions * scale.length_scale,
        psi=spectrum.vectors,
        energy_scale=scale.energy_scale,
        length_scale=scale.length_scale,
    )


class BilinearOscillator(TransformerMixin, BaseEstimator):
    """Estimator wrapper around the lattice solver.

    ``fit`` takes no data: it diagonalizes the lattice Hamiltonian and stores
    the lowest ``n_eig`` pairs. ``transform`` projects lattice vectors (rows
    of ``X``) onto the fitted eigenbasis with the lattice inner product, and
    ``inverse_transform`` maps coefficients back.

    Parameters
    ----------
    n_sites : int, default=20001
        Odd number of lattice sites.
    lambda_c : float, default=20.0
        Half-width of the box (potential cutoff).
    n_eig : int, default=20
    method : {'auto', 'dense', 'iterative'}, default='auto'
    tol : float, default=1e-10
    max_iter : int, default=50000
    seed : int, default=20001

    Attributes
    ----------
    spectrum_ : Spectrum
    eigenvalues_ : ndarray of shape (n_eig,)
    eigenvectors_ : ndarray of shape (n_sites, n_eig)
    parities_ : tuple of str
    """

    def __init__(
        self,
        n_sites=20001,
        lambda_c=20.0,
        n_eig=20,
        method="auto",
        tol=1e-10,
        max_iter=50000,
        seed=20001,
    ):
        self.n_sites = n_sites
        self.lambda_c = lambda_c
        self.n_eig = n_eig
        self.method = method
        self.tol = tol
        self.max_iter = max_iter
        self.seed = seed

    def _request(self):
        return SolveRequest(
            config=LatticeConfig(self.n_sites, self.lambda_c),
            n_eig=self.n_eig,
            method=self.method,
            tol=self.tol,
            max_iter=self.max_iter,
            seed=self.seed,
        )

    def fit(self, X=None, y=None):
        self.spectrum_ = solve(self._request())
        self.eigenvalues_ = self.spectrum_.lambdas
        self.eigenvectors_ = self.spectrum_.vectors
        self.parities_ = self.spectrum_.parities
        return self

    def transform(self, X):
        check_is_fitted(self, "spectrum_")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.spectrum_.config.n_sites:
            raise ValueError(
                f"X must have shape (n_samples, {self.spectrum_.config.n_sites}), got {X.shape}"
            )
        return self.spectrum_.config.lattice_constant * (X @ self.eigenvectors_)

    def inverse_transform(self, X):
        check_is_fitted(self, "spectrum_")
        X = np.asarray(X, dtype=float)
        if X.ndim != 2 or X.shape[1] != self.eigenvectors_.shape[1]:
            raise ValueError(f"X must have shape (n_samples, {self.eigenvectors_.shape[1]})")
        return X @ self.eigenvectors_.T

    def energies(self, scale):
        """Eigenvalues of ``v|p| + F|x|`` for a :class:`PhysicalScale`."""
        check_is_fitted(self, "spectrum_")
        return to_physical(self.spectrum_, scale).energies
